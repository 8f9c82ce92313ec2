use rand::Rng;
use rand_distr::{Distribution, Exp};
use serde::Serialize;

/// Who put a transmission on the air.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Source {
    Interferer,
    /// Message `message` (1-based) of device `device`.
    Uplink { device: u32, message: u64 },
    /// The gateway's acknowledgement of that uplink.
    Ack { device: u32, message: u64 },
}

impl Source {
    /// Tie-break rank at identical timestamps: interferer < device < gateway.
    pub fn rank(&self) -> (u8, u32, u64) {
        match *self {
            Source::Interferer => (0, 0, 0),
            Source::Uplink { device, message } => (1, device, message),
            Source::Ack { device, message } => (2, device, message),
        }
    }
}

/// Airtime `[start, end)` on one channel.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Transmission {
    pub channel: usize,
    pub start: f64,
    pub end: f64,
    pub source: Source,
}

impl Transmission {
    pub fn new(channel: usize, start: f64, end: f64, source: Source) -> Self {
        debug_assert!(start < end, "empty transmission [{start}, {end})");
        Self {
            channel,
            start,
            end,
            source,
        }
    }

    pub fn duration(&self) -> f64 {
        self.end - self.start
    }
}

/// Same channel and a nonzero-length intersection of the half-open intervals.
pub fn overlaps(a: &Transmission, b: &Transmission) -> bool {
    a.channel == b.channel && a.start < b.end && b.start < a.end
}

/// Poisson interferer packets on `channel` over `[0, horizon)`.
///
/// Arrivals have rate `load / duration`, so the expected airtime fraction is
/// `load`. Packets may overlap each other. The result is sorted by start.
pub fn gen_interference<R: Rng + ?Sized>(
    channel: usize,
    load: f64,
    duration: f64,
    horizon: f64,
    rng: &mut R,
) -> Vec<Transmission> {
    assert!((0.0..1.0).contains(&load), "load must lie in [0, 1), got {load}");
    assert!(duration > 0.0, "interferer duration must be positive, got {duration}");
    if load == 0.0 {
        return Vec::new();
    }
    let gaps = Exp::new(load / duration).expect("positive rate");
    let mut out = Vec::with_capacity((horizon * load / duration * 1.05) as usize + 16);
    let mut t = gaps.sample(rng);
    while t < horizon {
        out.push(Transmission::new(channel, t, t + duration, Source::Interferer));
        t += gaps.sample(rng);
    }
    out
}
