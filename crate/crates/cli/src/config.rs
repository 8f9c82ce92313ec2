//! Experiment config file (TOML) and its resolution against presets,
//! defaults and command-line overrides.
//!
//! ```toml
//! [bench]
//! means = [0.0, 0.115, 0.051]
//! policies = ["ucb1", "thompson", "uniform"]
//! alpha = 0.5
//! horizon = 10000
//! seeds = 200
//! seed = 0
//! reset_interval = 1000     # optional
//! regret_every = 1
//!
//! [scenario]
//! preset = "malin4"         # optional base; every key below overrides it
//! channels = 4
//! channel_labels = ["ch1", "ch2", "ch3", "ch4"]
//! interferer_load = [0.2, 0.1, 0.05, 0.0]
//! interferer_duration = 0.1
//! link_success = [...]      # optional
//! ack_delay = 0.2
//! ack_duration = 0.2
//! ack_timeout = 1.0
//! horizon_messages = 2000
//! seed = 0
//! seeds = 1
//! reset_interval = 500      # optional
//!
//! [[device]]                # one table per device; replaces the preset's devices
//! policy = "ucb1"
//! alpha = 0.5
//! uplink_duration = 1.0
//! period = 5.0
//! jitter_fraction = 0.1
//! start_offset = 0.0
//!
//! [sweep]
//! loads = [0.0, 0.05, 0.1, 0.2]
//! alphas = [0.5, 2.0]
//! device_counts = [1, 2, 4]
//! ```
//!
//! Unknown keys are rejected.

use std::path::Path;

use aloha_bandit::bandit::{PolicyKind, DEFAULT_ALPHA};
use aloha_bandit::environment::{BernoulliEnv, FIELD_MEANS};
use aloha_bandit::simulator::{DeviceConfig, ScenarioConfig, DEFAULT_JITTER, PRESET_NAMES};
use serde::{Deserialize, Serialize};

use crate::error::CliError;
use crate::RunArgs;

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub bench: Option<BenchSection>,
    pub scenario: Option<ScenarioSection>,
    pub device: Option<Vec<DeviceSection>>,
    pub sweep: Option<SweepSection>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BenchSection {
    pub means: Option<Vec<f64>>,
    pub policies: Option<Vec<String>>,
    pub alpha: Option<f64>,
    pub horizon: Option<u64>,
    pub seeds: Option<u64>,
    pub seed: Option<u64>,
    pub reset_interval: Option<u64>,
    pub regret_every: Option<u64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioSection {
    pub preset: Option<String>,
    pub channels: Option<usize>,
    pub channel_labels: Option<Vec<String>>,
    pub interferer_load: Option<Vec<f64>>,
    pub interferer_duration: Option<f64>,
    pub link_success: Option<Vec<f64>>,
    pub ack_delay: Option<f64>,
    pub ack_duration: Option<f64>,
    pub ack_timeout: Option<f64>,
    pub horizon_messages: Option<u64>,
    pub seed: Option<u64>,
    pub seeds: Option<u64>,
    pub reset_interval: Option<u64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DeviceSection {
    pub policy: Option<String>,
    pub alpha: Option<f64>,
    pub uplink_duration: Option<f64>,
    pub period: Option<f64>,
    pub jitter_fraction: Option<f64>,
    pub start_offset: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSection {
    pub loads: Option<Vec<f64>>,
    pub alphas: Option<Vec<f64>>,
    pub device_counts: Option<Vec<usize>>,
}

impl FileConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        Self::parse(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
    }

    pub fn parse(text: &str) -> Result<Self, String> {
        toml::from_str(text).map_err(|e| e.to_string())
    }

    pub fn load_opt(path: Option<&Path>) -> Result<Self, CliError> {
        path.map_or_else(|| Ok(Self::default()), Self::load)
    }
}

fn parse_policy(name: &str, alpha: f64, key: &str) -> Result<PolicyKind, CliError> {
    PolicyKind::from_name(name, alpha).map_err(|e| CliError::Config(format!("`{key}`: {e}")))
}

/// Fully resolved bench settings; echoed verbatim into the run manifest.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BenchConfig {
    pub means: Vec<f64>,
    pub policies: Vec<PolicyKind>,
    pub horizon: u64,
    pub seed: u64,
    pub seeds: u64,
    pub reset_interval: Option<u64>,
    pub regret_every: u64,
}

impl BenchConfig {
    pub fn resolve(file: &FileConfig, args: &RunArgs) -> Result<Self, CliError> {
        let sec = file.bench.as_ref();
        let get = |f: fn(&BenchSection) -> Option<u64>| sec.and_then(f);
        let means = match &args.preset {
            Some(name) => ScenarioConfig::preset(name)
                .ok_or_else(|| unknown_preset(name))?
                .link_success
                .ok_or_else(|| CliError::Config(format!("preset `{name}` has no channel means to bench against")))?,
            None => sec.and_then(|s| s.means.clone()).unwrap_or_else(|| FIELD_MEANS.to_vec()),
        };
        BernoulliEnv::new(means.clone()).map_err(|e| CliError::Config(format!("`bench.means`: {e}")))?;
        let alpha = sec.and_then(|s| s.alpha).unwrap_or(DEFAULT_ALPHA);
        let names: Vec<String> = match (&args.policy, sec.and_then(|s| s.policies.clone())) {
            (Some(p), _) => p.clone(),
            (None, Some(p)) => p,
            (None, None) => vec!["ucb1".into(), "thompson".into(), "uniform".into()],
        };
        if names.is_empty() {
            return Err(CliError::Config("`bench.policies`: at least one policy is required".into()));
        }
        let policies = names
            .iter()
            .map(|n| parse_policy(n, alpha, "bench.policies"))
            .collect::<Result<Vec<_>, _>>()?;
        for p in &policies {
            p.build(means.len()).map_err(|e| CliError::Config(format!("`bench.alpha`: {e}")))?;
        }
        let cfg = Self {
            means,
            policies,
            horizon: args.horizon.or(get(|s| s.horizon)).unwrap_or(10_000),
            seed: args.seed.or(get(|s| s.seed)).unwrap_or(0),
            seeds: args.seeds.or(get(|s| s.seeds)).unwrap_or(200),
            reset_interval: get(|s| s.reset_interval),
            regret_every: get(|s| s.regret_every).unwrap_or(1),
        };
        if cfg.horizon == 0 {
            return Err(CliError::Config("`bench.horizon`: must be at least 1".into()));
        }
        if cfg.seeds == 0 {
            return Err(CliError::Config("`bench.seeds`: must be at least 1".into()));
        }
        if cfg.regret_every == 0 {
            return Err(CliError::Config("`bench.regret_every`: must be at least 1".into()));
        }
        if cfg.reset_interval == Some(0) {
            return Err(CliError::Config("`bench.reset_interval`: must be at least 1 when set".into()));
        }
        Ok(cfg)
    }
}

fn unknown_preset(name: &str) -> CliError {
    CliError::Config(format!("unknown preset `{name}` (valid: {})", PRESET_NAMES.join(", ")))
}

/// Resolved radio scenario plus how many seeds to run it for.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimConfig {
    pub scenario: ScenarioConfig,
    pub seeds: u64,
}

impl SimConfig {
    /// Preset (flag, then file, then `malin4`) overridden by the file's keys
    /// and then by command-line flags.
    pub fn resolve(file: &FileConfig, args: &RunArgs) -> Result<Self, CliError> {
        let sec = file.scenario.as_ref();
        let preset = args
            .preset
            .clone()
            .or_else(|| sec.and_then(|s| s.preset.clone()))
            .unwrap_or_else(|| "malin4".into());
        let mut sc = ScenarioConfig::preset(&preset).ok_or_else(|| unknown_preset(&preset))?;

        if let Some(s) = sec {
            if let Some(k) = s.channels {
                if k != sc.channels {
                    sc.channels = k;
                    sc.channel_labels = (1..=k).map(|i| format!("ch{i}")).collect();
                }
            }
            macro_rules! take {
                ($($field:ident),*) => {$(
                    if let Some(v) = &s.$field {
                        sc.$field = v.clone();
                    }
                )*};
            }
            take!(channel_labels, interferer_load, interferer_duration, ack_delay, ack_duration, ack_timeout, horizon_messages, seed);
            if s.link_success.is_some() {
                sc.link_success = s.link_success.clone();
            }
            if s.reset_interval.is_some() {
                sc.reset_interval = s.reset_interval;
            }
        }

        if let Some(devs) = &file.device {
            let base = sc.devices[0].clone();
            sc.devices = devs
                .iter()
                .enumerate()
                .map(|(i, d)| {
                    let alpha = d.alpha.unwrap_or(DEFAULT_ALPHA);
                    let policy = match &d.policy {
                        Some(name) => parse_policy(name, alpha, &format!("device[{i}].policy"))?,
                        None => PolicyKind::Ucb1 { alpha },
                    };
                    Ok(DeviceConfig {
                        policy,
                        uplink_duration: d.uplink_duration.unwrap_or(base.uplink_duration),
                        period: d.period.unwrap_or(base.period),
                        jitter_fraction: d.jitter_fraction.unwrap_or(DEFAULT_JITTER),
                        start_offset: d.start_offset.unwrap_or(0.0),
                    })
                })
                .collect::<Result<Vec<_>, CliError>>()?;
        }

        if let Some(names) = &args.policy {
            let n = sc.devices.len();
            if names.len() != 1 && names.len() != n {
                return Err(CliError::Config(format!(
                    "`--policy`: give one policy for all devices or exactly {n} (one per device), got {}",
                    names.len()
                )));
            }
            for (i, dev) in sc.devices.iter_mut().enumerate() {
                let name = &names[if names.len() == 1 { 0 } else { i }];
                let alpha = match dev.policy {
                    PolicyKind::Ucb1 { alpha } => alpha,
                    _ => DEFAULT_ALPHA,
                };
                dev.policy = parse_policy(name, alpha, "--policy")?;
            }
        }
        if let Some(h) = args.horizon {
            sc.horizon_messages = h;
        }
        if let Some(seed) = args.seed {
            sc.seed = seed;
        }
        let seeds = args.seeds.or(sec.and_then(|s| s.seeds)).unwrap_or(1);
        if seeds == 0 {
            return Err(CliError::Config("`scenario.seeds`: must be at least 1".into()));
        }
        sc.validate().map_err(|e| CliError::Config(e.to_string()))?;
        Ok(Self { scenario: sc, seeds })
    }
}

/// Parameter grid of a sweep. Absent axes keep the base scenario's value.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct SweepGrid {
    pub loads: Vec<f64>,
    pub alphas: Vec<f64>,
    pub device_counts: Vec<usize>,
}

impl SweepGrid {
    pub fn resolve(file: &FileConfig, loads: Option<Vec<f64>>, alphas: Option<Vec<f64>>, counts: Option<Vec<usize>>) -> Result<Self, CliError> {
        let sec = file.sweep.as_ref();
        let grid = Self {
            loads: loads.or_else(|| sec.and_then(|s| s.loads.clone())).unwrap_or_default(),
            alphas: alphas.or_else(|| sec.and_then(|s| s.alphas.clone())).unwrap_or_default(),
            device_counts: counts.or_else(|| sec.and_then(|s| s.device_counts.clone())).unwrap_or_default(),
        };
        if grid.loads.is_empty() && grid.alphas.is_empty() && grid.device_counts.is_empty() {
            return Err(CliError::Config(
                "empty sweep grid: set at least one of `sweep.loads`, `sweep.alphas`, `sweep.device_counts`".into(),
            ));
        }
        if let Some(c) = grid.device_counts.iter().find(|&&c| c == 0) {
            return Err(CliError::Config(format!("`sweep.device_counts`: counts must be >= 1, got {c}")));
        }
        Ok(grid)
    }

    /// Cartesian product; `None` marks an axis left at its base value.
    pub fn points(&self) -> Vec<(Option<f64>, Option<f64>, Option<usize>)> {
        fn axis<T: Copy>(v: &[T]) -> Vec<Option<T>> {
            if v.is_empty() {
                vec![None]
            } else {
                v.iter().copied().map(Some).collect()
            }
        }
        let mut out = Vec::new();
        for &l in &axis(&self.loads) {
            for &a in &axis(&self.alphas) {
                for &d in &axis(&self.device_counts) {
                    out.push((l, a, d));
                }
            }
        }
        out
    }
}
