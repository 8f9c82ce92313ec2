//! Quantities derived from a sequence of (channel, reward) observations.

use std::fmt;

use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MetricsError {
    #[error("regret needs the true channel means; none are known for this trace")]
    NoGroundTruth,
    #[error("observation {index} uses channel {channel}, but only {channels} channels exist")]
    ChannelOutOfRange { index: usize, channel: usize, channels: usize },
    #[error("cannot aggregate zero runs")]
    NoRuns,
    #[error("run {run} has length {len}, expected {expected}")]
    ShapeMismatch { run: usize, len: usize, expected: usize },
}

/// One transmission as seen by the learner.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Observation {
    pub channel: usize,
    pub reward: bool,
}

impl Observation {
    pub fn new(channel: usize, reward: bool) -> Self {
        Self { channel, reward }
    }
}

/// Total number of successful transmissions.
pub fn cumulative_reward(trace: &[Observation]) -> u64 {
    trace.iter().filter(|o| o.reward).count() as u64
}

fn best_mean(means: &[f64]) -> f64 {
    means.iter().copied().fold(f64::NEG_INFINITY, f64::max)
}

/// Pseudo-regret against the best fixed channel: `T·max μ − Σ reward`.
///
/// Only bench traces have known means; pass `None` for a radio simulation
/// trace and the call is rejected.
pub fn regret(trace: &[Observation], means: Option<&[f64]>) -> Result<f64, MetricsError> {
    let means = means.ok_or(MetricsError::NoGroundTruth)?;
    Ok(trace.len() as f64 * best_mean(means) - cumulative_reward(trace) as f64)
}

/// Regret after each transmission; entry `i` covers the first `i + 1`.
pub fn regret_curve(trace: &[Observation], means: Option<&[f64]>) -> Result<Vec<f64>, MetricsError> {
    let best = best_mean(means.ok_or(MetricsError::NoGroundTruth)?);
    let mut wins = 0u64;
    Ok(trace
        .iter()
        .enumerate()
        .map(|(i, o)| {
            wins += u64::from(o.reward);
            (i + 1) as f64 * best - wins as f64
        })
        .collect())
}

/// Expected success rate of a device picking channels uniformly at random.
pub fn random_baseline_rate(means: &[f64]) -> f64 {
    if means.is_empty() {
        return 0.0;
    }
    means.iter().sum::<f64>() / means.len() as f64
}

/// Fraction of `trace[from..]` spent on `channel`.
pub fn channel_fraction(trace: &[Observation], channel: usize, from: usize) -> f64 {
    let tail = &trace[from.min(trace.len())..];
    if tail.is_empty() {
        return 0.0;
    }
    tail.iter().filter(|o| o.channel == channel).count() as f64 / tail.len() as f64
}

/// Final counts of one channel (`Tk`, `Sk`).
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct ChannelSummary {
    pub pulls: u64,
    pub successes: u64,
}

impl ChannelSummary {
    /// `Xk = Sk / Tk`, or 0 for an unused channel.
    pub fn empirical_mean(&self) -> f64 {
        if self.pulls == 0 {
            0.0
        } else {
            self.successes as f64 / self.pulls as f64
        }
    }
}

/// End-of-run summary in the shape of the field experiment's results table.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunSummary {
    pub channels: Vec<ChannelSummary>,
    pub transmissions: u64,
    pub successes: u64,
    pub success_rate: f64,
    /// Best channel mean, when the environment is known.
    pub oracle_mean: Option<f64>,
    pub regret: Option<f64>,
}

impl RunSummary {
    pub fn from_counts(channels: Vec<ChannelSummary>, means: Option<&[f64]>) -> Self {
        let transmissions = channels.iter().map(|c| c.pulls).sum::<u64>();
        let successes = channels.iter().map(|c| c.successes).sum::<u64>();
        let success_rate = if transmissions == 0 {
            0.0
        } else {
            successes as f64 / transmissions as f64
        };
        let oracle_mean = means.map(best_mean);
        let regret = oracle_mean.map(|m| transmissions as f64 * m - successes as f64);
        Self {
            channels,
            transmissions,
            successes,
            success_rate,
            oracle_mean,
            regret,
        }
    }

    pub fn empirical_means(&self) -> Vec<f64> {
        self.channels.iter().map(ChannelSummary::empirical_mean).collect()
    }

    /// Success rate a uniform device would get if the measured `Xk` were the
    /// true channel means.
    pub fn uniform_baseline(&self) -> f64 {
        random_baseline_rate(&self.empirical_means())
    }
}

impl fmt::Display for RunSummary {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let row = |f: &mut fmt::Formatter<'_>, name: &str, cell: &dyn Fn(usize) -> String| {
            for k in 0..self.channels.len() {
                if k > 0 {
                    f.write_str("\t")?;
                }
                write!(f, "{name}[{k}] = {}", cell(k))?;
            }
            writeln!(f)
        };
        row(f, "Tk", &|k| self.channels[k].pulls.to_string())?;
        row(f, "Xk", &|k| format!("{:.3}", self.channels[k].empirical_mean()))?;
        row(f, "Sk", &|k| self.channels[k].successes.to_string())?;
        writeln!(
            f,
            "success rate {:.1}% ({}/{}), uniform-access baseline {:.1}%",
            100.0 * self.success_rate,
            self.successes,
            self.transmissions,
            100.0 * self.uniform_baseline()
        )?;
        if let (Some(best), Some(regret)) = (self.oracle_mean, self.regret) {
            writeln!(f, "best channel mean {best:.3}, regret {regret:.3}")?;
        }
        Ok(())
    }
}

/// Per-channel `Tk`, `Sk`, `Xk` and totals for a trace over `channels` channels.
pub fn table_summary(
    trace: &[Observation],
    channels: usize,
    means: Option<&[f64]>,
) -> Result<RunSummary, MetricsError> {
    let mut counts = vec![ChannelSummary::default(); channels];
    for (index, o) in trace.iter().enumerate() {
        let c = counts.get_mut(o.channel).ok_or(MetricsError::ChannelOutOfRange {
            index,
            channel: o.channel,
            channels,
        })?;
        c.pulls += 1;
        c.successes += u64::from(o.reward);
    }
    Ok(RunSummary::from_counts(counts, means))
}

/// Per-channel `Tk(t)` and `Xk(t)` curves.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Trajectory {
    /// Transmission index (1-based) of each sample.
    pub t: Vec<u64>,
    /// `pulls[k][i]`: pulls of channel `k` at sample `i`.
    pub pulls: Vec<Vec<u64>>,
    /// `means[k][i]`: empirical mean of channel `k` at sample `i`.
    pub means: Vec<Vec<f64>>,
}

/// Sample the learner's counts after every `every`-th transmission (and
/// always after the last one).
pub fn trajectory(trace: &[Observation], channels: usize, every: usize) -> Result<Trajectory, MetricsError> {
    let every = every.max(1);
    let mut counts = vec![ChannelSummary::default(); channels];
    let mut out = Trajectory {
        t: Vec::new(),
        pulls: vec![Vec::new(); channels],
        means: vec![Vec::new(); channels],
    };
    for (i, o) in trace.iter().enumerate() {
        let c = counts.get_mut(o.channel).ok_or(MetricsError::ChannelOutOfRange {
            index: i,
            channel: o.channel,
            channels,
        })?;
        c.pulls += 1;
        c.successes += u64::from(o.reward);
        let t = i + 1;
        if t % every == 0 || t == trace.len() {
            out.t.push(t as u64);
            for (k, c) in counts.iter().enumerate() {
                out.pulls[k].push(c.pulls);
                out.means[k].push(c.empirical_mean());
            }
        }
    }
    Ok(out)
}

/// Mean and population standard deviation.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize)]
pub struct MeanStd {
    pub mean: f64,
    pub std: f64,
}

impl MeanStd {
    pub fn of(values: &[f64]) -> Self {
        if values.is_empty() {
            return Self::default();
        }
        let n = values.len() as f64;
        let mean = values.iter().sum::<f64>() / n;
        let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
        Self { mean, std: var.sqrt() }
    }
}

/// Pointwise mean/std envelope across runs of equal length.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Envelope {
    pub mean: Vec<f64>,
    pub std: Vec<f64>,
}

pub fn aggregate<S: AsRef<[f64]>>(runs: &[S]) -> Result<Envelope, MetricsError> {
    let expected = runs.first().ok_or(MetricsError::NoRuns)?.as_ref().len();
    for (run, r) in runs.iter().enumerate() {
        let len = r.as_ref().len();
        if len != expected {
            return Err(MetricsError::ShapeMismatch { run, len, expected });
        }
    }
    let mut column = vec![0.0; runs.len()];
    let mut env = Envelope {
        mean: Vec::with_capacity(expected),
        std: Vec::with_capacity(expected),
    };
    for i in 0..expected {
        for (slot, r) in column.iter_mut().zip(runs) {
            *slot = r.as_ref()[i];
        }
        let ms = MeanStd::of(&column);
        env.mean.push(ms.mean);
        env.std.push(ms.std);
    }
    Ok(env)
}
