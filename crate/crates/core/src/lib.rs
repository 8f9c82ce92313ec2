//! Decentralized multi-armed bandit channel selection for uncoordinated
//! ALOHA-style IoT devices.
//!
//! The crate is split into four layers:
//!
//! * [`bandit`]: the learners (UCB₁, Thompson Sampling, greedy, uniform) as
//!   small value types with `select` / `update` methods.
//! * [`environment`]: i.i.d. Bernoulli channels for validating the learners
//!   without any radio model.
//! * [`simulator`]: a discrete-event pure-ALOHA simulation with devices,
//!   a multi-channel gateway that acknowledges on the uplink channel, and
//!   Poisson interferers; plus the bench-mode driver over [`environment`].
//! * [`metrics`]: cumulative reward, regret, per-channel trajectories and
//!   summaries, and multi-seed aggregation.

pub mod bandit;
pub mod environment;
pub mod metrics;
pub mod rng;
pub mod simulator;

pub use bandit::{ArmStats, BanditError, Decision, GreedyState, Policy, PolicyKind, TsState, Ucb1State};
pub use environment::BernoulliEnv;
pub use metrics::{Observation, RunSummary};
pub use simulator::{DeviceConfig, ScenarioConfig, SimOutput, TraceRecord, Transmission};
