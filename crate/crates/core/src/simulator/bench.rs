//! Bench mode: a learner against i.i.d. Bernoulli channels, no radio model.

use crate::bandit::{BanditError, PolicyKind};
use crate::environment::BernoulliEnv;
use crate::metrics::{self, Observation, RunSummary};
use crate::rng::{substream, Entity};

/// Number of messages sent by the field device during its run.
pub const TABLE_I_HORIZON: u64 = 129;

/// `horizon` rounds of `policy` against `env`. The learner and the
/// environment draw from separate substreams of `seed`.
pub fn run_bench(
    policy: PolicyKind,
    env: &BernoulliEnv,
    horizon: u64,
    seed: u64,
    reset_interval: Option<u64>,
) -> Result<Vec<Observation>, BanditError> {
    let mut learner = policy.build(env.channels())?;
    let mut policy_rng = substream(seed, Entity::Policy(0));
    let mut env_rng = substream(seed, Entity::Environment(0));
    let mut trace = Vec::with_capacity(horizon as usize);
    for t in 1..=horizon {
        let channel = learner.select(&mut policy_rng).channel;
        let reward = env.draw(channel, &mut env_rng).expect("learner picks a valid channel");
        learner.update(channel, reward)?;
        if reset_interval.is_some_and(|r| r > 0 && t % r == 0) {
            learner.reset();
        }
        trace.push(Observation { channel, reward });
    }
    Ok(trace)
}

/// UCB₁ (α = 0.5) on the field surrogate for 129 messages, summarized like
/// the field device's end-of-run table. Counts vary with `seed`.
pub fn table_i_replay(seed: u64) -> RunSummary {
    let env = BernoulliEnv::field();
    let trace = run_bench(PolicyKind::Ucb1 { alpha: 0.5 }, &env, TABLE_I_HORIZON, seed, None).expect("valid policy");
    metrics::table_summary(&trace, env.channels(), Some(env.means())).expect("valid channels")
}
