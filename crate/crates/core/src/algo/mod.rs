//! Col-UCB and the two UCB baselines.
//!
//! Every policy implements [`GroupPolicy`]: choose one arm per group, then
//! observe one reward per group. [`run`] drives a policy for `T` rounds and
//! records a [`Trajectory`].
//!
//! Randomness comes from two streams. The environment stream draws rewards,
//! one [`sample_reward`] call per (round, group) in group order. The policy
//! stream feeds Col-UCB's allocation sampling, one uniform per group that
//! has a contention arm. [`run`] derives both from a single seed with
//! [`stream_rng`].

mod baselines;
mod colucb;
mod config;
mod trajectory;

use std::fmt;
use std::str::FromStr;

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

pub use baselines::{IndependentUcb, PooledUcb};
pub use colucb::{AllocationLp, ColUcbState};
pub use config::{AlgoConfig, DefaultArm};
pub use trajectory::{epoch_of, fmt_f64, RoundDiagnostics, Trajectory};

use crate::error::{Error, Result};
use crate::instance::Instance;
use crate::reward::sample_reward;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Policy {
    ColUcb,
    IndependentUcb,
    PooledUcb,
}

impl Policy {
    pub const ALL: [Policy; 3] = [Policy::ColUcb, Policy::IndependentUcb, Policy::PooledUcb];

    pub fn name(self) -> &'static str {
        match self {
            Policy::ColUcb => "col_ucb",
            Policy::IndependentUcb => "independent_ucb",
            Policy::PooledUcb => "pooled_ucb",
        }
    }

    /// Stable index used when deriving random streams.
    pub fn index(self) -> u64 {
        match self {
            Policy::ColUcb => 0,
            Policy::IndependentUcb => 1,
            Policy::PooledUcb => 2,
        }
    }
}

impl fmt::Display for Policy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Policy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().replace('-', "_").as_str() {
            "col_ucb" | "colucb" => Ok(Policy::ColUcb),
            "independent_ucb" | "independent" => Ok(Policy::IndependentUcb),
            "pooled_ucb" | "pooled" => Ok(Policy::PooledUcb),
            _ => Err(Error::UnknownPolicy(s.to_string())),
        }
    }
}

/// A grouped policy: one arm per group per round.
pub trait GroupPolicy {
    fn select(&mut self, rng: &mut dyn RngCore) -> Result<Vec<usize>>;
    fn observe(&mut self, actions: &[usize], rewards: &[f64]);
    /// Internals of the last selected round, if the policy has any.
    fn diagnostics(&self) -> Option<RoundDiagnostics>;
    fn burn_in_length(&self) -> u64 {
        0
    }
}

/// Builds the policy's initial state.
pub fn make_policy(policy: Policy, instance: &Instance, config: &AlgoConfig) -> Result<Box<dyn GroupPolicy + Send>> {
    let s = instance.structure();
    Ok(match policy {
        Policy::ColUcb => Box::new(ColUcbState::new(s, config.clone())?),
        Policy::IndependentUcb => Box::new(IndependentUcb::new(s, config.clone())?),
        Policy::PooledUcb => Box::new(PooledUcb::new(s, config.clone())?),
    })
}

/// Which of a trajectory's two random streams.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StreamKind {
    Environment,
    Policy,
}

/// The random stream for `(seed, trial, policy, kind)`.
///
/// The generator is ChaCha8 keyed by `seed`; the 64-bit stream number packs
/// `trial` in bits 8.., the policy index in bits 1..8 and the kind in bit
/// 0. Environment streams passed `policy = None` use index 127, which lets
/// policies share the rewards of a trial.
pub fn stream_rng(seed: u64, trial: u64, policy: Option<Policy>, kind: StreamKind) -> ChaCha8Rng {
    let p = policy.map_or(127, Policy::index);
    let k = match kind {
        StreamKind::Environment => 0,
        StreamKind::Policy => 1,
    };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream((trial << 8) | (p << 1) | k);
    rng
}

/// Runs `policy` for `config.horizon` rounds on streams derived from `seed`.
pub fn run(policy: Policy, instance: &Instance, config: &AlgoConfig, seed: u64) -> Result<Trajectory> {
    let mut env = stream_rng(seed, 0, None, StreamKind::Environment);
    let mut pol = stream_rng(seed, 0, Some(policy), StreamKind::Policy);
    run_with(policy, instance, config, &mut env, &mut pol, |_, _| {})
}

/// Runs `policy` with explicit streams, calling `observer` after each
/// round's selection (before its rewards are folded in) with the round
/// index and the policy's diagnostics.
pub fn run_with<F>(
    policy: Policy,
    instance: &Instance,
    config: &AlgoConfig,
    env_rng: &mut dyn RngCore,
    policy_rng: &mut dyn RngCore,
    mut observer: F,
) -> Result<Trajectory>
where
    F: FnMut(u64, Option<&RoundDiagnostics>),
{
    let mut state = make_policy(policy, instance, config)?;
    let ng = instance.num_groups();
    let mut traj = Trajectory::new(policy, ng, config.horizon, state.burn_in_length().min(config.horizon));
    let mut increments = vec![0.0; ng];
    for t in 0..config.horizon {
        let actions = state.select(policy_rng)?;
        let diag = state.diagnostics();
        observer(t, diag.as_ref());
        if let Some(d) = diag {
            traj.diagnostics.push(d);
        }
        let rewards: Vec<f64> = actions
            .iter()
            .map(|&a| sample_reward(&instance.rewards()[a], env_rng))
            .collect();
        for (g, &a) in actions.iter().enumerate() {
            increments[g] = instance.gap(g, a);
        }
        traj.push_round(&actions, &increments);
        state.observe(&actions, &rewards);
    }
    Ok(traj)
}

/// Runs Col-UCB with direct access to its state after each selection.
pub fn run_col_ucb_inspect<F>(
    instance: &Instance,
    config: &AlgoConfig,
    env_rng: &mut dyn RngCore,
    policy_rng: &mut dyn RngCore,
    mut inspect: F,
) -> Result<Trajectory>
where
    F: FnMut(&ColUcbState),
{
    let mut state = ColUcbState::new(instance.structure(), config.clone())?;
    let ng = instance.num_groups();
    let mut traj = Trajectory::new(Policy::ColUcb, ng, config.horizon, state.burnin().length.min(config.horizon));
    let mut increments = vec![0.0; ng];
    for _ in 0..config.horizon {
        let actions = state.select(policy_rng)?;
        inspect(&state);
        if let Some(d) = state.last_diagnostics() {
            traj.diagnostics.push(*d);
        }
        let rewards: Vec<f64> = actions
            .iter()
            .map(|&a| sample_reward(&instance.rewards()[a], env_rng))
            .collect();
        for (g, &a) in actions.iter().enumerate() {
            increments[g] = instance.gap(g, a);
        }
        traj.push_round(&actions, &increments);
        state.observe(&actions, &rewards);
    }
    Ok(traj)
}
