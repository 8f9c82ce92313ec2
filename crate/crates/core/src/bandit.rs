//! Channel-selection learners.
//!
//! Each learner is a plain value holding only its summary statistics: no
//! per-round history is kept. All randomness (tie-breaks, posterior samples,
//! uniform picks) comes from the generator passed to `select`, so a run is
//! replayed exactly from its seed.
//!
//! | learner   | state                                   |
//! |-----------|-----------------------------------------|
//! | UCB₁      | message counter `t`, `Tk[]`, `Sk[]`     |
//! | Thompson  | `K` Beta posterior pairs `(a, b)`       |
//! | greedy    | `Tk[]`, `Sk[]`                          |
//! | uniform   | channel count                           |

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use rand_distr::{Beta, Distribution};
use serde::Serialize;
use thiserror::Error;

/// Exploration parameter used when none is configured.
pub const DEFAULT_ALPHA: f64 = 0.5;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum BanditError {
    #[error("at least 2 channels are required, got {0}")]
    TooFewChannels(usize),
    #[error("exploration parameter alpha must be a positive finite number, got {0}")]
    InvalidAlpha(f64),
    #[error("channel {channel} out of range for {channels} channels")]
    ChannelOutOfRange { channel: usize, channels: usize },
    #[error("channel {0} has never been pulled; its index is undefined")]
    UnpulledArm(usize),
    #[error("unknown policy `{0}` (valid: ucb1, thompson, greedy, uniform)")]
    UnknownPolicy(String),
}

/// A channel choice.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub struct Decision {
    pub channel: usize,
}

/// Per-channel pull and success counts (`Tk[k]`, `Sk[k]`).
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct ArmStats {
    pulls: u64,
    successes: u64,
}

impl ArmStats {
    pub fn new(pulls: u64, successes: u64) -> Option<Self> {
        (successes <= pulls).then_some(Self { pulls, successes })
    }

    pub fn pulls(&self) -> u64 {
        self.pulls
    }

    pub fn successes(&self) -> u64 {
        self.successes
    }

    /// Empirical mean `Xk[k]`; 0 for a channel never tried.
    ///
    /// Rewards are binary, so the running mean `(x·n + r)/(n + 1)` is always
    /// the ratio `successes / pulls`; computing it from the integer counts
    /// keeps it exact for any number of updates.
    pub fn empirical_mean(&self) -> f64 {
        if self.pulls == 0 {
            0.0
        } else {
            self.successes as f64 / self.pulls as f64
        }
    }

    fn record(&mut self, reward: bool) {
        self.pulls += 1;
        self.successes += u64::from(reward);
    }
}

fn check_channels(k: usize) -> Result<(), BanditError> {
    if k < 2 {
        Err(BanditError::TooFewChannels(k))
    } else {
        Ok(())
    }
}

fn check_index(channel: usize, channels: usize) -> Result<(), BanditError> {
    if channel < channels {
        Ok(())
    } else {
        Err(BanditError::ChannelOutOfRange { channel, channels })
    }
}

/// Index of a maximal value, ties broken uniformly at random.
///
/// The generator is only consulted when more than one value attains the
/// maximum.
pub fn argmax_random_tie<R: Rng + ?Sized>(values: &[f64], rng: &mut R) -> usize {
    assert!(!values.is_empty(), "argmax of an empty slice");
    let best = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let ties = values.iter().filter(|&&v| v == best).count();
    let pick = if ties > 1 { rng.random_range(0..ties) } else { 0 };
    values
        .iter()
        .enumerate()
        .filter(|(_, &v)| v == best)
        .nth(pick)
        .map(|(i, _)| i)
        .expect("maximum is attained")
}

fn first_unpulled(arms: &[ArmStats]) -> Option<usize> {
    arms.iter().position(|a| a.pulls == 0)
}

/// UCB₁ learner: `t` messages sent so far and per-channel counts.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Ucb1State {
    alpha: f64,
    t: u64,
    arms: Vec<ArmStats>,
}

impl Ucb1State {
    pub fn new(channels: usize, alpha: f64) -> Result<Self, BanditError> {
        check_channels(channels)?;
        if !(alpha > 0.0 && alpha.is_finite()) {
            return Err(BanditError::InvalidAlpha(alpha));
        }
        Ok(Self {
            alpha,
            t: 0,
            arms: vec![ArmStats::default(); channels],
        })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    /// Learner clock: number of messages sent (and rewards observed).
    pub fn t(&self) -> u64 {
        self.t
    }

    pub fn arms(&self) -> &[ArmStats] {
        &self.arms
    }

    pub fn channels(&self) -> usize {
        self.arms.len()
    }

    /// Exploration bonus `sqrt(alpha · ln t / N_k)`.
    pub fn confidence(&self, channel: usize) -> Result<f64, BanditError> {
        check_index(channel, self.arms.len())?;
        let pulls = self.arms[channel].pulls;
        if pulls == 0 || self.t == 0 {
            return Err(BanditError::UnpulledArm(channel));
        }
        Ok((self.alpha * (self.t as f64).ln() / pulls as f64).sqrt())
    }

    /// Upper confidence index: empirical mean plus [`confidence`](Self::confidence).
    pub fn index(&self, channel: usize) -> Result<f64, BanditError> {
        let bonus = self.confidence(channel)?;
        Ok(self.arms[channel].empirical_mean() + bonus)
    }

    /// Next channel: unpulled channels first in index order, then the
    /// largest upper confidence index.
    pub fn select<R: Rng + ?Sized>(&self, rng: &mut R) -> Decision {
        if let Some(channel) = first_unpulled(&self.arms) {
            return Decision { channel };
        }
        let indexes: Vec<f64> = (0..self.arms.len())
            .map(|k| self.index(k).expect("all arms pulled"))
            .collect();
        Decision {
            channel: argmax_random_tie(&indexes, rng),
        }
    }

    pub fn update(&mut self, channel: usize, reward: bool) -> Result<(), BanditError> {
        check_index(channel, self.arms.len())?;
        self.arms[channel].record(reward);
        self.t += 1;
        Ok(())
    }

    /// Forget everything learned; keeps `alpha` and the channel count.
    pub fn reset(&mut self) {
        self.t = 0;
        self.arms.fill(ArmStats::default());
    }
}

/// Beta posterior `Beta(a, b)` over one channel's success probability.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct BetaPosterior {
    pub a: u64,
    pub b: u64,
}

impl BetaPosterior {
    pub const UNIFORM: Self = Self { a: 1, b: 1 };

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        Beta::new(self.a as f64, self.b as f64)
            .expect("a, b >= 1")
            .sample(rng)
    }
}

/// Thompson Sampling learner with a uniform prior on every channel.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TsState {
    arms: Vec<BetaPosterior>,
}

impl TsState {
    pub fn new(channels: usize) -> Result<Self, BanditError> {
        check_channels(channels)?;
        Ok(Self {
            arms: vec![BetaPosterior::UNIFORM; channels],
        })
    }

    /// Build from explicit posteriors, e.g. to resume a stored learner.
    pub fn from_posteriors(arms: Vec<BetaPosterior>) -> Result<Self, BanditError> {
        check_channels(arms.len())?;
        assert!(arms.iter().all(|p| p.a >= 1 && p.b >= 1), "Beta parameters must be >= 1");
        Ok(Self { arms })
    }

    pub fn arms(&self) -> &[BetaPosterior] {
        &self.arms
    }

    pub fn channels(&self) -> usize {
        self.arms.len()
    }

    /// One posterior sample per channel, in channel order.
    pub fn sample_indexes<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<f64> {
        self.arms.iter().map(|p| p.sample(rng)).collect()
    }

    pub fn select<R: Rng + ?Sized>(&self, rng: &mut R) -> Decision {
        let samples = self.sample_indexes(rng);
        Decision {
            channel: argmax_random_tie(&samples, rng),
        }
    }

    pub fn update(&mut self, channel: usize, reward: bool) -> Result<(), BanditError> {
        check_index(channel, self.arms.len())?;
        let arm = &mut self.arms[channel];
        if reward {
            arm.a += 1;
        } else {
            arm.b += 1;
        }
        Ok(())
    }

    pub fn reset(&mut self) {
        self.arms.fill(BetaPosterior::UNIFORM);
    }
}

/// Empirical-mean maximizer with the same round-robin start as UCB₁.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct GreedyState {
    arms: Vec<ArmStats>,
}

impl GreedyState {
    pub fn new(channels: usize) -> Result<Self, BanditError> {
        check_channels(channels)?;
        Ok(Self {
            arms: vec![ArmStats::default(); channels],
        })
    }

    pub fn from_arms(arms: Vec<ArmStats>) -> Result<Self, BanditError> {
        check_channels(arms.len())?;
        Ok(Self { arms })
    }

    pub fn arms(&self) -> &[ArmStats] {
        &self.arms
    }

    pub fn select<R: Rng + ?Sized>(&self, rng: &mut R) -> Decision {
        if let Some(channel) = first_unpulled(&self.arms) {
            return Decision { channel };
        }
        let means: Vec<f64> = self.arms.iter().map(ArmStats::empirical_mean).collect();
        Decision {
            channel: argmax_random_tie(&means, rng),
        }
    }

    pub fn update(&mut self, channel: usize, reward: bool) -> Result<(), BanditError> {
        check_index(channel, self.arms.len())?;
        self.arms[channel].record(reward);
        Ok(())
    }

    pub fn reset(&mut self) {
        self.arms.fill(ArmStats::default());
    }
}

/// Uniformly random channel: what a device without learning does.
pub fn uniform_select<R: Rng + ?Sized>(channels: usize, rng: &mut R) -> Decision {
    Decision {
        channel: rng.random_range(0..channels),
    }
}

/// Which learner a device runs.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "name", rename_all = "lowercase")]
pub enum PolicyKind {
    Ucb1 { alpha: f64 },
    Thompson,
    Greedy,
    Uniform,
}

impl PolicyKind {
    pub const NAMES: [&'static str; 4] = ["ucb1", "thompson", "greedy", "uniform"];

    pub fn name(&self) -> &'static str {
        match self {
            PolicyKind::Ucb1 { .. } => "ucb1",
            PolicyKind::Thompson => "thompson",
            PolicyKind::Greedy => "greedy",
            PolicyKind::Uniform => "uniform",
        }
    }

    /// Parse a policy name, giving UCB₁ the supplied exploration parameter.
    pub fn from_name(name: &str, alpha: f64) -> Result<Self, BanditError> {
        match name.trim() {
            "ucb1" => Ok(PolicyKind::Ucb1 { alpha }),
            "thompson" => Ok(PolicyKind::Thompson),
            "greedy" => Ok(PolicyKind::Greedy),
            "uniform" => Ok(PolicyKind::Uniform),
            other => Err(BanditError::UnknownPolicy(other.to_string())),
        }
    }

    pub fn build(&self, channels: usize) -> Result<Policy, BanditError> {
        Ok(match *self {
            PolicyKind::Ucb1 { alpha } => Policy::Ucb1(Ucb1State::new(channels, alpha)?),
            PolicyKind::Thompson => Policy::Thompson(TsState::new(channels)?),
            PolicyKind::Greedy => Policy::Greedy(GreedyState::new(channels)?),
            PolicyKind::Uniform => {
                check_channels(channels)?;
                Policy::Uniform { channels }
            }
        })
    }
}

impl FromStr for PolicyKind {
    type Err = BanditError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::from_name(s, DEFAULT_ALPHA)
    }
}

impl fmt::Display for PolicyKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// A running learner of any kind.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum Policy {
    Ucb1(Ucb1State),
    Thompson(TsState),
    Greedy(GreedyState),
    Uniform { channels: usize },
}

impl Policy {
    pub fn channels(&self) -> usize {
        match self {
            Policy::Ucb1(s) => s.channels(),
            Policy::Thompson(s) => s.channels(),
            Policy::Greedy(s) => s.arms().len(),
            Policy::Uniform { channels } => *channels,
        }
    }

    pub fn select<R: Rng + ?Sized>(&self, rng: &mut R) -> Decision {
        match self {
            Policy::Ucb1(s) => s.select(rng),
            Policy::Thompson(s) => s.select(rng),
            Policy::Greedy(s) => s.select(rng),
            Policy::Uniform { channels } => uniform_select(*channels, rng),
        }
    }

    pub fn update(&mut self, channel: usize, reward: bool) -> Result<(), BanditError> {
        match self {
            Policy::Ucb1(s) => s.update(channel, reward),
            Policy::Thompson(s) => s.update(channel, reward),
            Policy::Greedy(s) => s.update(channel, reward),
            Policy::Uniform { channels } => check_index(channel, *channels),
        }
    }

    pub fn reset(&mut self) {
        match self {
            Policy::Ucb1(s) => s.reset(),
            Policy::Thompson(s) => s.reset(),
            Policy::Greedy(s) => s.reset(),
            Policy::Uniform { .. } => {}
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::{substream, Entity};

    fn assert_close(a: f64, b: f64, tol: f64) {
        assert!((a - b).abs() <= tol, "{a} != {b} (tol {tol})");
    }

    fn rng() -> crate::rng::SimRng {
        substream(42, Entity::Policy(0))
    }

    fn ucb_with(alpha: f64, counts: &[(u64, u64)]) -> Ucb1State {
        let arms: Vec<ArmStats> = counts.iter().map(|&(n, s)| ArmStats::new(n, s).unwrap()).collect();
        Ucb1State {
            alpha,
            t: arms.iter().map(|a| a.pulls).sum(),
            arms,
        }
    }

    #[test]
    fn ucb1_init_shapes() {
        let s = Ucb1State::new(3, 0.5).unwrap();
        assert_eq!(s.t(), 0);
        assert_eq!(s.arms(), &[ArmStats::default(); 3]);
        assert!(Ucb1State::new(2, 2.0).is_ok());
        assert_eq!(Ucb1State::new(1, 0.5), Err(BanditError::TooFewChannels(1)));
        assert!(matches!(Ucb1State::new(3, 0.0), Err(BanditError::InvalidAlpha(_))));
        assert!(matches!(Ucb1State::new(3, -1.0), Err(BanditError::InvalidAlpha(_))));
        assert!(matches!(Ucb1State::new(3, f64::NAN), Err(BanditError::InvalidAlpha(_))));
    }

    #[test]
    fn ucb1_confidence_closed_form() {
        // t = 1: ln 1 = 0
        let s = Ucb1State { alpha: 0.5, t: 1, arms: vec![ArmStats::new(1, 1).unwrap(), ArmStats::default()] };
        assert_eq!(s.confidence(0).unwrap(), 0.0);
        // reference values from a 30-digit evaluation of sqrt(0.5 ln 4 / n)
        let s = Ucb1State { alpha: 0.5, t: 4, arms: vec![ArmStats::new(1, 0).unwrap(), ArmStats::new(3, 0).unwrap()] };
        assert_close(s.confidence(0).unwrap(), 0.832_554_611_157_697_8, 1e-12);
        let s = Ucb1State { alpha: 0.5, t: 4, arms: vec![ArmStats::new(4, 0).unwrap(), ArmStats::default()] };
        assert_close(s.confidence(0).unwrap(), 0.416_277_305_578_848_9, 1e-12);
    }

    #[test]
    fn ucb1_confidence_rejects_unpulled() {
        let s = Ucb1State::new(3, 0.5).unwrap();
        assert_eq!(s.confidence(0), Err(BanditError::UnpulledArm(0)));
        assert!(matches!(s.index(5), Err(BanditError::ChannelOutOfRange { .. })));
    }

    #[test]
    fn ucb1_index_values() {
        let s = Ucb1State { alpha: 0.5, t: 1, arms: vec![ArmStats::new(1, 1).unwrap(), ArmStats::default()] };
        assert_eq!(s.index(0).unwrap(), 1.0);
        // Table I end state; oracle = mpmath evaluation of Sk/Tk + sqrt(0.5 ln 129 / Tk)
        let s = ucb_with(0.5, &[(29, 0), (61, 7), (39, 2)]);
        assert_close(s.index(0).unwrap(), 0.289_464_797_584_643, 1e-12);
        assert_close(s.index(1).unwrap(), 0.314_339_989_406_601, 1e-12);
        assert_close(s.index(2).unwrap(), 0.300_892_321_974_998, 1e-12);
        // with the rounded mean 0.115 the channel-1 index is 0.31459
        let bonus = s.confidence(1).unwrap();
        assert_close(0.115 + bonus, 0.314_585_891_045_945, 1e-12);
    }

    #[test]
    fn ucb1_select_init_phase_and_argmax() {
        let mut r = rng();
        let s = Ucb1State::new(3, 0.5).unwrap();
        assert_eq!(s.select(&mut r).channel, 0);
        let s = ucb_with(0.5, &[(1, 0), (0, 0), (1, 1)]);
        assert_eq!(s.select(&mut r).channel, 1);
        let s = ucb_with(0.5, &[(29, 0), (61, 7), (39, 2)]);
        for _ in 0..20 {
            assert_eq!(s.select(&mut r).channel, 1);
        }
    }

    #[test]
    fn ucb1_update_counts() {
        let mut s = Ucb1State::new(2, 0.5).unwrap();
        s.update(0, true).unwrap();
        assert_eq!((s.t(), s.arms()[0].pulls(), s.arms()[0].empirical_mean()), (1, 1, 1.0));

        let mut s = ucb_with(0.5, &[(60, 7), (1, 0)]);
        s.update(0, false).unwrap();
        assert_eq!(s.arms()[0].pulls(), 61);
        assert_eq!(s.arms()[0].empirical_mean(), 7.0 / 61.0);
        assert_eq!(format!("{:.3}", s.arms()[0].empirical_mean()), "0.115");

        let mut s = ucb_with(0.5, &[(38, 1), (1, 0)]);
        s.update(0, true).unwrap();
        assert_eq!(s.arms()[0].pulls(), 39);
        assert_eq!(format!("{:.3}", s.arms()[0].empirical_mean()), "0.051");

        assert!(matches!(s.update(2, true), Err(BanditError::ChannelOutOfRange { channel: 2, channels: 2 })));
        assert_eq!(s.t(), 40);
    }

    #[test]
    fn ucb1_reset_zeroes_learning() {
        let mut s = ucb_with(2.0, &[(3, 1), (4, 4)]);
        s.reset();
        assert_eq!(s, Ucb1State::new(2, 2.0).unwrap());
    }

    #[test]
    fn ts_init_and_update() {
        assert_eq!(TsState::new(3).unwrap().arms(), &[BetaPosterior::UNIFORM; 3]);
        assert_eq!(TsState::new(2).unwrap().arms().len(), 2);
        assert_eq!(TsState::new(1), Err(BanditError::TooFewChannels(1)));

        let mut s = TsState::new(2).unwrap();
        s.update(0, true).unwrap();
        assert_eq!(s.arms()[0], BetaPosterior { a: 2, b: 1 });
        assert_eq!(s.arms()[1], BetaPosterior::UNIFORM);

        let mut s = TsState::from_posteriors(vec![BetaPosterior { a: 3, b: 5 }, BetaPosterior::UNIFORM]).unwrap();
        s.update(0, false).unwrap();
        assert_eq!(s.arms()[0], BetaPosterior { a: 3, b: 6 });

        let mut s = TsState::new(2).unwrap();
        for _ in 0..7 {
            s.update(1, true).unwrap();
        }
        for _ in 0..4 {
            s.update(1, false).unwrap();
        }
        assert_eq!(s.arms()[1], BetaPosterior { a: 8, b: 5 });
        assert!(s.update(2, true).is_err());
    }

    fn ts_frequency(arms: &[(u64, u64)], draws: usize) -> f64 {
        let s = TsState::from_posteriors(arms.iter().map(|&(a, b)| BetaPosterior { a, b }).collect()).unwrap();
        let mut r = rng();
        (0..draws).filter(|_| s.select(&mut r).channel == 0).count() as f64 / draws as f64
    }

    #[test]
    fn ts_select_concentrated_posteriors() {
        assert!(ts_frequency(&[(1_000_000, 1), (1, 1_000_000)], 1000) >= 0.999);
    }

    #[test]
    fn ts_select_symmetric_posteriors() {
        let f = ts_frequency(&[(1, 1), (1, 1)], 10_000);
        assert!((f - 0.5).abs() <= 0.02, "{f}");
    }

    #[test]
    fn ts_select_table_i_posteriors() {
        // P(Beta(8,55) > Beta(3,38)): 10^6-draw Monte-Carlo oracle 0.8330,
        // quadrature 0.833047.
        let f = ts_frequency(&[(8, 55), (3, 38)], 100_000);
        assert!((f - 0.8330).abs() <= 0.005, "{f}");
    }

    #[test]
    fn greedy_and_uniform() {
        let mut r = rng();
        let g = GreedyState::from_arms(vec![
            ArmStats::new(2, 0).unwrap(),
            ArmStats::new(2, 2).unwrap(),
            ArmStats::new(2, 0).unwrap(),
        ])
        .unwrap();
        assert_eq!(g.select(&mut r).channel, 1);

        let g = GreedyState::from_arms(vec![ArmStats::new(2, 1).unwrap(), ArmStats::new(4, 2).unwrap()]).unwrap();
        let zeros = (0..1000).filter(|_| g.select(&mut r).channel == 0).count();
        assert!((zeros as f64 / 1000.0 - 0.5).abs() <= 0.05, "{zeros}");

        let mut counts = [0usize; 3];
        for _ in 0..30_000 {
            counts[uniform_select(3, &mut r).channel] += 1;
        }
        for c in counts {
            assert!((c as f64 / 30_000.0 - 1.0 / 3.0).abs() <= 0.01, "{counts:?}");
        }

        let g = GreedyState::new(3).unwrap();
        assert_eq!(g.select(&mut r).channel, 0);
    }

    #[test]
    fn policy_names() {
        assert_eq!("ucb1".parse::<PolicyKind>().unwrap(), PolicyKind::Ucb1 { alpha: DEFAULT_ALPHA });
        assert_eq!("thompson".parse::<PolicyKind>().unwrap(), PolicyKind::Thompson);
        let err = "exp3".parse::<PolicyKind>().unwrap_err();
        let msg = err.to_string();
        for name in PolicyKind::NAMES {
            assert!(msg.contains(name), "{msg}");
        }
        assert!(PolicyKind::Uniform.build(1).is_err());
    }

    #[test]
    fn beta_sampler_moments() {
        let mut r = rng();
        for &(a, b) in &[(1u64, 1u64), (8, 55), (3, 38), (2, 5), (50, 50)] {
            let p = BetaPosterior { a, b };
            let n = 100_000;
            let xs: Vec<f64> = (0..n).map(|_| p.sample(&mut r)).collect();
            let mean = xs.iter().sum::<f64>() / n as f64;
            let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
            let (af, bf) = (a as f64, b as f64);
            let true_mean = af / (af + bf);
            let true_var = af * bf / ((af + bf).powi(2) * (af + bf + 1.0));
            let se = (true_var / n as f64).sqrt();
            assert!((mean - true_mean).abs() <= 3.0 * se, "Beta({a},{b}) mean {mean} vs {true_mean}");
            assert!((var / true_var - 1.0).abs() <= 0.10, "Beta({a},{b}) var {var} vs {true_var}");
        }
    }
}
