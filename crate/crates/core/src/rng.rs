//! Seeded random substreams.
//!
//! Every stochastic entity (a learner, a device clock, an interferer
//! population, a Bernoulli environment) owns its own ChaCha stream derived
//! from the master seed and a stable entity id. Adding an entity never shifts
//! the draws seen by another one.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// The generator used throughout the crate.
pub type SimRng = ChaCha8Rng;

/// Stable identity of a random stream within one run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Entity {
    /// Channel choices of device `n` (tie-breaks, Thompson samples, uniform picks).
    Policy(u32),
    /// Transmission-instant jitter of device `n`.
    Clock(u32),
    /// Reward draws of the Bernoulli environment seen by device `n`.
    Environment(u32),
    /// Poisson interferer population on channel `k`.
    Interferer(u32),
}

impl Entity {
    fn stream_id(self) -> u64 {
        let (tag, idx) = match self {
            Entity::Policy(n) => (0u64, n),
            Entity::Clock(n) => (1, n),
            Entity::Environment(n) => (2, n),
            Entity::Interferer(k) => (3, k),
        };
        (u64::from(idx) << 8) | tag
    }
}

/// Independent generator for `entity` under `seed`.
pub fn substream(seed: u64, entity: Entity) -> SimRng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(entity.stream_id());
    rng
}
