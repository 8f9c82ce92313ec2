//! i.i.d. Bernoulli channels.

use rand::Rng;
use serde::Serialize;
use thiserror::Error;

/// Channel availability means measured on the field device at the end of
/// its 129-message run: `Sk/Tk` = 0/29, 7/61, 2/39, rounded.
pub const FIELD_MEANS: [f64; 3] = [0.0, 0.115, 0.051];

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EnvError {
    #[error("at least 2 channels are required, got {0}")]
    TooFewChannels(usize),
    #[error("mean of channel {channel} must lie in [0, 1], got {mean}")]
    MeanOutOfRange { channel: usize, mean: f64 },
    #[error("channel {channel} out of range for {channels} channels")]
    ChannelOutOfRange { channel: usize, channels: usize },
}

/// Stationary Bernoulli rewards: channel `k` succeeds with probability `mu[k]`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BernoulliEnv {
    mu: Vec<f64>,
}

impl BernoulliEnv {
    pub fn new(mu: Vec<f64>) -> Result<Self, EnvError> {
        if mu.len() < 2 {
            return Err(EnvError::TooFewChannels(mu.len()));
        }
        if let Some((channel, &mean)) = mu.iter().enumerate().find(|(_, m)| !(0.0..=1.0).contains(*m)) {
            return Err(EnvError::MeanOutOfRange { channel, mean });
        }
        Ok(Self { mu })
    }

    /// The three-channel field surrogate built from [`FIELD_MEANS`].
    pub fn field() -> Self {
        Self::new(FIELD_MEANS.to_vec()).expect("valid means")
    }

    pub fn means(&self) -> &[f64] {
        &self.mu
    }

    pub fn channels(&self) -> usize {
        self.mu.len()
    }

    /// Largest mean: the success rate of always using the best channel.
    pub fn best_mean(&self) -> f64 {
        self.mu.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    /// Lowest-index channel with the largest mean.
    pub fn best_channel(&self) -> usize {
        let best = self.best_mean();
        self.mu.iter().position(|&m| m == best).expect("non-empty")
    }

    pub fn draw<R: Rng + ?Sized>(&self, channel: usize, rng: &mut R) -> Result<bool, EnvError> {
        let mean = *self.mu.get(channel).ok_or(EnvError::ChannelOutOfRange {
            channel,
            channels: self.mu.len(),
        })?;
        Ok(rng.random_bool(mean))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::{substream, Entity};

    #[test]
    fn rejects_bad_configs() {
        assert_eq!(BernoulliEnv::new(vec![0.5]), Err(EnvError::TooFewChannels(1)));
        assert!(matches!(
            BernoulliEnv::new(vec![0.5, 1.5]),
            Err(EnvError::MeanOutOfRange { channel: 1, .. })
        ));
        assert!(BernoulliEnv::new(vec![0.5, f64::NAN]).is_err());
        let env = BernoulliEnv::field();
        let mut rng = substream(0, Entity::Environment(0));
        assert!(matches!(env.draw(3, &mut rng), Err(EnvError::ChannelOutOfRange { .. })));
    }

    #[test]
    fn degenerate_arms() {
        let env = BernoulliEnv::new(vec![0.0, 1.0]).unwrap();
        let mut rng = substream(3, Entity::Environment(0));
        for _ in 0..10_000 {
            assert!(!env.draw(0, &mut rng).unwrap());
            assert!(env.draw(1, &mut rng).unwrap());
        }
    }

    #[test]
    fn field_channel_frequency() {
        let env = BernoulliEnv::field();
        let mut rng = substream(11, Entity::Environment(0));
        let n = 100_000;
        let hits = (0..n).filter(|_| env.draw(1, &mut rng).unwrap()).count();
        // binomial sd = sqrt(0.115 * 0.885 / 1e5) ≈ 0.001
        assert!((hits as f64 / n as f64 - 0.115).abs() <= 0.005);
        assert_eq!(env.best_channel(), 1);
    }

    #[test]
    fn lag_one_autocorrelation_is_noise() {
        let env = BernoulliEnv::new(vec![0.3, 0.7]).unwrap();
        let mut rng = substream(5, Entity::Environment(0));
        let xs: Vec<f64> = (0..100_000)
            .map(|i| f64::from(u8::from(env.draw(i % 2, &mut rng).unwrap())))
            .collect();
        // alternate arms, so centre each draw on its own arm mean
        let centred: Vec<f64> = xs.iter().enumerate().map(|(i, x)| x - env.means()[i % 2]).collect();
        let var: f64 = centred.iter().map(|c| c * c).sum();
        let cov: f64 = centred.windows(2).map(|w| w[0] * w[1]).sum();
        let rho = cov / var;
        assert!(rho.abs() <= 0.01, "lag-1 autocorrelation {rho}");
    }

    #[test]
    fn same_seed_same_rewards() {
        let env = BernoulliEnv::field();
        let run = |seed| {
            let mut rng = substream(seed, Entity::Environment(0));
            (0..1000).map(|i| env.draw(i % 3, &mut rng).unwrap()).collect::<Vec<_>>()
        };
        assert_eq!(run(9), run(9));
        assert_ne!(run(9), run(10));
    }
}
