use serde::Serialize;
use thiserror::Error;

use crate::bandit::{PolicyKind, DEFAULT_ALPHA};
use crate::environment::FIELD_MEANS;

/// A configuration value that breaks a scenario constraint. `key` names the
/// offending setting the way the config file spells it.
#[derive(Debug, Clone, PartialEq, Error)]
#[error("invalid `{key}`: {reason}")]
pub struct ConfigError {
    pub key: String,
    pub reason: String,
}

impl ConfigError {
    pub fn new(key: impl Into<String>, reason: impl Into<String>) -> Self {
        Self {
            key: key.into(),
            reason: reason.into(),
        }
    }
}

/// One transmitting device.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DeviceConfig {
    pub policy: PolicyKind,
    /// Uplink airtime, seconds.
    pub uplink_duration: f64,
    /// Nominal time between two transmissions, seconds.
    pub period: f64,
    /// Each instant is moved by a uniform offset in ±`jitter_fraction·period/2`.
    pub jitter_fraction: f64,
    /// Shift of the whole transmission schedule, seconds.
    pub start_offset: f64,
}

impl DeviceConfig {
    pub fn new(policy: PolicyKind, uplink_duration: f64, period: f64) -> Self {
        Self {
            policy,
            uplink_duration,
            period,
            jitter_fraction: DEFAULT_JITTER,
            start_offset: 0.0,
        }
    }
}

pub const DEFAULT_JITTER: f64 = 0.1;
pub const DEFAULT_ACK_DELAY: f64 = 0.2;
pub const DEFAULT_ACK_DURATION: f64 = 0.2;
pub const DEFAULT_ACK_TIMEOUT: f64 = 1.0;
pub const DEFAULT_INTERFERER_DURATION: f64 = 0.1;

/// Names accepted by [`ScenarioConfig::preset`].
pub const PRESET_NAMES: [&str; 4] = ["malin4", "malin8", "malin16", "iotligent3"];

/// Everything needed to run one radio scenario.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScenarioConfig {
    pub channels: usize,
    /// Informational names for the channels (frequencies).
    pub channel_labels: Vec<String>,
    /// Airtime fraction occupied by interferers on each channel, in [0, 1).
    pub interferer_load: Vec<f64>,
    /// Airtime of one interfering packet, seconds.
    pub interferer_duration: f64,
    /// Optional per-channel end-to-end link availability. When set, a
    /// collision-free uplink additionally survives with this probability;
    /// it turns the scenario into a radio-timed Bernoulli surrogate.
    pub link_success: Option<Vec<f64>>,
    pub devices: Vec<DeviceConfig>,
    /// Gap between the end of an uplink and the start of its ACK, seconds.
    pub ack_delay: f64,
    pub ack_duration: f64,
    /// The device waits this long after its uplink ends before concluding.
    pub ack_timeout: f64,
    /// Transmissions per device.
    pub horizon_messages: u64,
    pub seed: u64,
    /// Re-zero every learner after this many of its own transmissions.
    pub reset_interval: Option<u64>,
}

fn positive(key: &str, v: f64) -> Result<(), ConfigError> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(ConfigError::new(key, format!("must be a positive number, got {v}")))
    }
}

/// Loads 20/10/5/0 % repeated over `channels`.
fn malin_loads(channels: usize) -> Vec<f64> {
    [0.20, 0.10, 0.05, 0.0].iter().copied().cycle().take(channels).collect()
}

impl ScenarioConfig {
    /// Lab scenario with `channels` channels: one UCB₁ device sending a
    /// one-second message every five seconds, Poisson interferers on every
    /// channel at 20/10/5/0 % load.
    pub fn malin(channels: usize) -> Self {
        Self {
            channels,
            channel_labels: (1..=channels).map(|k| format!("ch{k}")).collect(),
            interferer_load: malin_loads(channels),
            interferer_duration: DEFAULT_INTERFERER_DURATION,
            link_success: None,
            devices: vec![DeviceConfig::new(PolicyKind::Ucb1 { alpha: DEFAULT_ALPHA }, 1.0, 5.0)],
            ack_delay: DEFAULT_ACK_DELAY,
            ack_duration: DEFAULT_ACK_DURATION,
            ack_timeout: DEFAULT_ACK_TIMEOUT,
            horizon_messages: 2000,
            seed: 0,
            reset_interval: None,
        }
    }

    /// Field-network surrogate: three 868 MHz channels with the measured
    /// availabilities, no synthetic interferers, one UCB₁ device sending
    /// every two hours for 129 messages.
    pub fn iotligent3() -> Self {
        Self {
            channels: 3,
            channel_labels: vec!["868.1MHz".into(), "868.3MHz".into(), "868.5MHz".into()],
            interferer_load: vec![0.0; 3],
            interferer_duration: DEFAULT_INTERFERER_DURATION,
            link_success: Some(FIELD_MEANS.to_vec()),
            devices: vec![DeviceConfig::new(PolicyKind::Ucb1 { alpha: DEFAULT_ALPHA }, 1.0, 7200.0)],
            ack_delay: DEFAULT_ACK_DELAY,
            ack_duration: DEFAULT_ACK_DURATION,
            ack_timeout: DEFAULT_ACK_TIMEOUT,
            horizon_messages: 129,
            seed: 0,
            reset_interval: None,
        }
    }

    pub fn preset(name: &str) -> Option<Self> {
        match name {
            "malin4" => Some(Self::malin(4)),
            "malin8" => Some(Self::malin(8)),
            "malin16" => Some(Self::malin(16)),
            "iotligent3" => Some(Self::iotligent3()),
            _ => None,
        }
    }

    /// Time by which every device has finished its last exchange.
    pub(crate) fn end_time(&self) -> f64 {
        self.devices
            .iter()
            .map(|d| {
                d.start_offset
                    + (self.horizon_messages as f64 + 1.0) * d.period
                    + d.uplink_duration
                    + self.ack_timeout
            })
            .fold(0.0, f64::max)
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let k = self.channels;
        if k < 2 {
            return Err(ConfigError::new("channels", format!("at least 2 channels are required, got {k}")));
        }
        if self.channel_labels.len() != k {
            return Err(ConfigError::new(
                "channel_labels",
                format!("expected {k} labels, got {}", self.channel_labels.len()),
            ));
        }
        if self.interferer_load.len() != k {
            return Err(ConfigError::new(
                "interferer_load",
                format!("expected {k} loads, got {}", self.interferer_load.len()),
            ));
        }
        if let Some(load) = self.interferer_load.iter().find(|l| !(0.0..1.0).contains(*l)) {
            return Err(ConfigError::new("interferer_load", format!("loads must lie in [0, 1), got {load}")));
        }
        positive("interferer_duration", self.interferer_duration)?;
        if let Some(means) = &self.link_success {
            if means.len() != k {
                return Err(ConfigError::new("link_success", format!("expected {k} values, got {}", means.len())));
            }
            if let Some(m) = means.iter().find(|m| !(0.0..=1.0).contains(*m)) {
                return Err(ConfigError::new("link_success", format!("values must lie in [0, 1], got {m}")));
            }
        }
        positive("ack_delay", self.ack_delay)?;
        positive("ack_duration", self.ack_duration)?;
        positive("ack_timeout", self.ack_timeout)?;
        if self.ack_delay + self.ack_duration > self.ack_timeout {
            return Err(ConfigError::new(
                "ack_timeout",
                format!(
                    "ack_delay + ack_duration ({}) exceeds ack_timeout ({})",
                    self.ack_delay + self.ack_duration,
                    self.ack_timeout
                ),
            ));
        }
        if self.horizon_messages == 0 {
            return Err(ConfigError::new("horizon_messages", "must be at least 1"));
        }
        if self.reset_interval == Some(0) {
            return Err(ConfigError::new("reset_interval", "must be at least 1 when set"));
        }
        if self.devices.is_empty() {
            return Err(ConfigError::new("device", "at least one device is required"));
        }
        for (i, d) in self.devices.iter().enumerate() {
            let key = |field: &str| format!("device[{i}].{field}");
            positive(&key("uplink_duration"), d.uplink_duration)?;
            positive(&key("period"), d.period)?;
            if d.uplink_duration >= d.period {
                return Err(ConfigError::new(
                    key("uplink_duration"),
                    format!("uplink_duration ({}) must be shorter than period ({})", d.uplink_duration, d.period),
                ));
            }
            if !(0.0..1.0).contains(&d.jitter_fraction) {
                return Err(ConfigError::new(key("jitter_fraction"), format!("must lie in [0, 1), got {}", d.jitter_fraction)));
            }
            if !(d.start_offset >= 0.0 && d.start_offset.is_finite()) {
                return Err(ConfigError::new(key("start_offset"), format!("must be >= 0, got {}", d.start_offset)));
            }
            // the outcome of one message must be known before the next one leaves
            let min_gap = d.period * (1.0 - d.jitter_fraction);
            if d.uplink_duration + self.ack_timeout >= min_gap {
                return Err(ConfigError::new(
                    key("period"),
                    format!(
                        "uplink_duration + ack_timeout ({}) must be shorter than the minimum gap between transmissions ({min_gap})",
                        d.uplink_duration + self.ack_timeout
                    ),
                ));
            }
            d.policy
                .build(k)
                .map_err(|e| ConfigError::new(key("policy"), e.to_string()))?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn presets_are_valid() {
        for name in PRESET_NAMES {
            let cfg = ScenarioConfig::preset(name).unwrap();
            cfg.validate().unwrap_or_else(|e| panic!("{name}: {e}"));
        }
        assert_eq!(ScenarioConfig::preset("malin16").unwrap().channels, 16);
        assert_eq!(ScenarioConfig::preset("malin4").unwrap().interferer_load, vec![0.2, 0.1, 0.05, 0.0]);
        assert!(ScenarioConfig::preset("nope").is_none());
    }

    #[test]
    fn duty_cycle_of_field_preset_is_tiny() {
        let d = &ScenarioConfig::iotligent3().devices[0];
        assert!(d.uplink_duration / d.period < 0.01);
    }

    #[test]
    fn validation_names_the_key() {
        let mut cfg = ScenarioConfig::malin(4);
        cfg.devices[0].uplink_duration = 5.0;
        assert_eq!(cfg.validate().unwrap_err().key, "device[0].uplink_duration");

        let mut cfg = ScenarioConfig::malin(4);
        cfg.interferer_load[2] = 1.0;
        assert_eq!(cfg.validate().unwrap_err().key, "interferer_load");

        let mut cfg = ScenarioConfig::malin(4);
        cfg.ack_delay = 0.9;
        assert_eq!(cfg.validate().unwrap_err().key, "ack_timeout");

        let mut cfg = ScenarioConfig::malin(4);
        cfg.devices[0].period = 2.0;
        assert_eq!(cfg.validate().unwrap_err().key, "device[0].period");

        let mut cfg = ScenarioConfig::malin(4);
        cfg.devices[0].policy = PolicyKind::Ucb1 { alpha: -1.0 };
        assert_eq!(cfg.validate().unwrap_err().key, "device[0].policy");

        let mut cfg = ScenarioConfig::malin(4);
        cfg.channel_labels.pop();
        assert_eq!(cfg.validate().unwrap_err().key, "channel_labels");

        let mut cfg = ScenarioConfig::malin(4);
        cfg.channels = 1;
        assert_eq!(cfg.validate().unwrap_err().key, "channels");
    }
}
