//! Discrete-event pure-ALOHA simulation.
//!
//! Devices transmit at (jittered) periodic instants on the channel their
//! learner picks. A multi-channel gateway answers every collision-free uplink
//! with an ACK on the same channel, `ack_delay` after the uplink ends. Any
//! nonzero overlap on a channel destroys every transmission involved; there
//! is no capture. The device concludes `ack_timeout` after its uplink ends,
//! updates its learner and only then picks the channel for the next message.
//!
//! Events at the same instant are ordered by (time, interferer < device <
//! gateway, entity id), so a run is a pure function of its configuration.

mod bench;
mod config;
mod transmission;

use std::cmp::{Ordering, Reverse};
use std::collections::{BTreeMap, BinaryHeap};

use rand::Rng;
use serde::Serialize;

use crate::bandit::Policy;
use crate::metrics::{self, Observation, RunSummary};
use crate::rng::{substream, Entity, SimRng};

pub use bench::{run_bench, table_i_replay, TABLE_I_HORIZON};
pub use config::{
    ConfigError, DeviceConfig, ScenarioConfig, DEFAULT_ACK_DELAY, DEFAULT_ACK_DURATION, DEFAULT_ACK_TIMEOUT,
    DEFAULT_INTERFERER_DURATION, DEFAULT_JITTER, PRESET_NAMES,
};
pub use transmission::{gen_interference, overlaps, Source, Transmission};

/// Outcome of one uplink attempt.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TraceRecord {
    pub device_id: u32,
    /// 1-based index of the message among the device's transmissions.
    pub t_index: u64,
    /// Uplink start, seconds.
    pub time: f64,
    pub channel: usize,
    pub uplink_ok: bool,
    pub ack_ok: bool,
    pub reward: bool,
}

impl From<&TraceRecord> for Observation {
    fn from(r: &TraceRecord) -> Self {
        Observation::new(r.channel, r.reward)
    }
}

/// Trace plus the full airtime log of a run.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimOutput {
    /// Records in the order the devices learned their outcome.
    pub trace: Vec<TraceRecord>,
    /// Every transmission, sorted by (start, source rank).
    pub transmissions: Vec<Transmission>,
}

impl SimOutput {
    /// The learner's view of device `device`, in transmission order.
    pub fn observations(&self, device: u32) -> Vec<Observation> {
        self.trace
            .iter()
            .filter(|r| r.device_id == device)
            .map(Observation::from)
            .collect()
    }

    pub fn summary(&self, device: u32, channels: usize) -> RunSummary {
        metrics::table_summary(&self.observations(device), channels, None).expect("trace channels are in range")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum EventKind {
    Transmit,
    UplinkEnd,
    Feedback,
}

#[derive(Debug, Clone, Copy)]
struct Event {
    time: f64,
    /// 1 = device, 2 = gateway
    rank: u8,
    device: u32,
    kind: EventKind,
}

impl PartialEq for Event {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Event {}

impl PartialOrd for Event {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Event {
    fn cmp(&self, other: &Self) -> Ordering {
        self.time
            .total_cmp(&other.time)
            .then(self.rank.cmp(&other.rank))
            .then(self.device.cmp(&other.device))
    }
}

/// Device uplinks and gateway ACKs on one channel, keyed by start time.
#[derive(Default)]
struct ChannelLog {
    entries: BTreeMap<(u64, u64), Transmission>,
    seq: u64,
}

impl ChannelLog {
    fn insert(&mut self, t: Transmission) {
        // start times are nonnegative, where the IEEE bit pattern is monotone
        self.entries.insert((t.start.to_bits(), self.seq), t);
        self.seq += 1;
    }

    /// Any logged transmission other than `probe` itself overlapping it and
    /// accepted by `counts`.
    fn hits(&self, probe: &Transmission, longest: f64, counts: impl Fn(&Source) -> bool) -> bool {
        let lo = (probe.start - longest).max(0.0);
        self.entries
            .range((lo.to_bits(), 0)..(probe.end.to_bits(), 0))
            .map(|(_, t)| t)
            .any(|t| t.source != probe.source && counts(&t.source) && overlaps(t, probe))
    }
}

fn interferer_hit(packets: &[Transmission], probe: &Transmission) -> bool {
    // all packets share one duration, so the latest start has the latest end
    let idx = packets.partition_point(|p| p.start < probe.end);
    idx > 0 && packets[idx - 1].end > probe.start
}

struct Pending {
    uplink: Transmission,
    uplink_ok: bool,
    ack: Option<Transmission>,
}

struct DeviceRun {
    cfg: DeviceConfig,
    policy: Policy,
    policy_rng: SimRng,
    clock_rng: SimRng,
    link_rng: SimRng,
    sent: u64,
    pending: Option<Pending>,
}

impl DeviceRun {
    fn instant(&mut self, message: u64) -> f64 {
        let half = self.cfg.jitter_fraction * self.cfg.period / 2.0;
        let jitter = if half > 0.0 { self.clock_rng.random_range(-half..half) } else { 0.0 };
        self.cfg.start_offset + message as f64 * self.cfg.period + jitter
    }
}

/// Run a validated scenario to completion.
pub fn run_scenario(config: &ScenarioConfig) -> Result<SimOutput, ConfigError> {
    config.validate()?;
    let seed = config.seed;
    let end_time = config.end_time();

    let interferers: Vec<Vec<Transmission>> = config
        .interferer_load
        .iter()
        .enumerate()
        .map(|(k, &load)| {
            let mut rng = substream(seed, Entity::Interferer(k as u32));
            gen_interference(k, load, config.interferer_duration, end_time, &mut rng)
        })
        .collect();

    let longest = config
        .devices
        .iter()
        .map(|d| d.uplink_duration)
        .fold(config.ack_duration, f64::max);

    let mut devices: Vec<DeviceRun> = config
        .devices
        .iter()
        .enumerate()
        .map(|(i, d)| {
            let id = i as u32;
            DeviceRun {
                cfg: d.clone(),
                policy: d.policy.build(config.channels).expect("validated"),
                policy_rng: substream(seed, Entity::Policy(id)),
                clock_rng: substream(seed, Entity::Clock(id)),
                link_rng: substream(seed, Entity::Environment(id)),
                sent: 0,
                pending: None,
            }
        })
        .collect();

    let mut logs: Vec<ChannelLog> = (0..config.channels).map(|_| ChannelLog::default()).collect();
    let mut queue = BinaryHeap::new();
    for (i, dev) in devices.iter_mut().enumerate() {
        queue.push(Reverse(Event {
            time: dev.instant(1),
            rank: 1,
            device: i as u32,
            kind: EventKind::Transmit,
        }));
    }

    let mut trace = Vec::with_capacity(config.devices.len() * config.horizon_messages as usize);
    while let Some(Reverse(ev)) = queue.pop() {
        let id = ev.device;
        let dev = &mut devices[id as usize];
        match ev.kind {
            EventKind::Transmit => {
                let channel = dev.policy.select(&mut dev.policy_rng).channel;
                dev.sent += 1;
                let uplink = Transmission::new(
                    channel,
                    ev.time,
                    ev.time + dev.cfg.uplink_duration,
                    Source::Uplink { device: id, message: dev.sent },
                );
                logs[channel].insert(uplink);
                dev.pending = Some(Pending {
                    uplink,
                    uplink_ok: false,
                    ack: None,
                });
                queue.push(Reverse(Event {
                    time: uplink.end,
                    rank: 2,
                    device: id,
                    kind: EventKind::UplinkEnd,
                }));
            }
            EventKind::UplinkEnd => {
                let pending = dev.pending.as_mut().expect("uplink in flight");
                let up = pending.uplink;
                let clear = !interferer_hit(&interferers[up.channel], &up) && !logs[up.channel].hits(&up, longest, |_| true);
                let link = match &config.link_success {
                    Some(means) => dev.link_rng.random_bool(means[up.channel]),
                    None => true,
                };
                pending.uplink_ok = clear && link;
                if pending.uplink_ok {
                    let start = up.end + config.ack_delay;
                    let ack = Transmission::new(
                        up.channel,
                        start,
                        start + config.ack_duration,
                        Source::Ack {
                            device: id,
                            message: dev.sent,
                        },
                    );
                    logs[up.channel].insert(ack);
                    pending.ack = Some(ack);
                }
                queue.push(Reverse(Event {
                    time: up.end + config.ack_timeout,
                    rank: 1,
                    device: id,
                    kind: EventKind::Feedback,
                }));
            }
            EventKind::Feedback => {
                let pending = dev.pending.take().expect("uplink in flight");
                let channel = pending.uplink.channel;
                // an ACK is lost to interferers and device uplinks; the gateway
                // never collides with itself
                let ack_ok = pending.ack.is_some_and(|ack| {
                    !interferer_hit(&interferers[channel], &ack)
                        && !logs[channel].hits(&ack, longest, |s| matches!(s, Source::Uplink { .. }))
                });
                let reward = pending.uplink_ok && ack_ok;
                dev.policy.update(channel, reward).expect("channel in range");
                if config.reset_interval.is_some_and(|r| dev.sent.is_multiple_of(r)) {
                    dev.policy.reset();
                }
                trace.push(TraceRecord {
                    device_id: id,
                    t_index: dev.sent,
                    time: pending.uplink.start,
                    channel,
                    uplink_ok: pending.uplink_ok,
                    ack_ok,
                    reward,
                });
                if dev.sent < config.horizon_messages {
                    let next = dev.sent + 1;
                    let time = dev.instant(next);
                    queue.push(Reverse(Event {
                        time,
                        rank: 1,
                        device: id,
                        kind: EventKind::Transmit,
                    }));
                }
            }
        }
    }

    let mut transmissions: Vec<Transmission> = interferers.into_iter().flatten().collect();
    transmissions.extend(logs.into_iter().flat_map(|l| l.entries.into_values()));
    transmissions.sort_by(|a, b| {
        a.start
            .total_cmp(&b.start)
            .then(a.source.rank().cmp(&b.source.rank()))
            .then(a.channel.cmp(&b.channel))
    });
    Ok(SimOutput { trace, transmissions })
}
