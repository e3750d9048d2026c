//! Grouped multi-armed bandits with coordinated exploration.
//!
//! A set of groups share a pool of arms; each group may only pull arms from
//! its own feasible subset, observations are pooled, and the objective is the
//! *collaborative regret*: the expected maximum cumulative pseudo-regret over
//! groups.
//!
//! The crate is organised bottom-up:
//!
//! - [`bitset`], [`structure`], [`reward`], [`instance`]: the domain types.
//! - [`lp`]: a dense two-phase simplex with certified primal/dual solutions.
//! - [`flow`]: integral max-flow, the burn-in rate `t0` and burn-in schedules.
//! - [`algo`]: the Col-UCB state machine and the two UCB baselines.
//! - [`analysis`]: set-system sharing quantities and the instance-dependent
//!   functionals `M`, `T`, `R` together with their derived thresholds.
//! - [`lowerbound`]: adversarial instance generators.
//! - [`sim`]: the seeded Monte Carlo harness and its report writers.
//! - [`oracle`]: brute-force reference implementations used for cross-checks.

pub mod algo;
pub mod analysis;
pub mod bitset;
pub mod error;
pub mod flow;
pub mod instance;
pub mod io;
pub mod lowerbound;
pub mod lp;
pub mod oracle;
pub mod reward;
pub mod sim;
pub mod structure;

pub use bitset::BitSet64;
pub use error::{Error, Result};
pub use instance::{build_instance, Instance};
pub use reward::{sample_reward, RewardModel};
pub use structure::GroupStructure;
