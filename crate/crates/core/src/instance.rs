//! Problem instances: a group structure plus per-arm reward models, with
//! the derived gap quantities every regret computation is measured against.

use crate::error::{Error, Result};
use crate::reward::RewardModel;
use crate::structure::GroupStructure;

#[derive(Debug, Clone)]
pub struct Instance {
    structure: GroupStructure,
    rewards: Vec<RewardModel>,
    mu: Vec<f64>,
    mu_star: Vec<f64>,
    best_arm: Vec<usize>,
    // gap[g][a]; NaN when a is not feasible for g.
    gap: Vec<Vec<f64>>,
    gap_min: Vec<f64>,
    gap_max: f64,
    sigma: f64,
}

// Everything else is derived from these two fields (and NaN placeholders
// would break a derived comparison).
impl PartialEq for Instance {
    fn eq(&self, other: &Self) -> bool {
        self.structure == other.structure && self.rewards == other.rewards
    }
}

/// Validates the reward models against the structure and derives means,
/// per-group optima, gaps and the common noise scale.
pub fn build_instance(structure: GroupStructure, rewards: Vec<RewardModel>) -> Result<Instance> {
    if rewards.len() != structure.num_arms() {
        return Err(Error::LengthMismatch {
            expected: structure.num_arms(),
            got: rewards.len(),
        });
    }
    for (arm, r) in rewards.iter().enumerate() {
        r.validate()
            .map_err(|reason| Error::InvalidRewardModel { arm, reason })?;
    }
    let mu: Vec<f64> = rewards.iter().map(RewardModel::mean).collect();
    let num_groups = structure.num_groups();
    let mut mu_star = Vec::with_capacity(num_groups);
    let mut best_arm = Vec::with_capacity(num_groups);
    let mut gap = Vec::with_capacity(num_groups);
    let mut gap_min = Vec::with_capacity(num_groups);
    let mut gap_max = 0.0f64;
    for g in 0..num_groups {
        let set = structure.arm_set(g);
        // Lowest index wins ties.
        let mut best = set.first().expect("groups are nonempty");
        for a in set.iter() {
            if mu[a] > mu[best] {
                best = a;
            }
        }
        let star = mu[best];
        let second = set
            .iter()
            .filter(|&a| a != best)
            .map(|a| mu[a])
            .fold(f64::NEG_INFINITY, f64::max);
        let mut row = vec![f64::NAN; structure.num_arms()];
        for a in set.iter() {
            row[a] = star - mu[a];
            gap_max = gap_max.max(row[a]);
        }
        mu_star.push(star);
        best_arm.push(best);
        gap.push(row);
        gap_min.push(star - second);
    }
    let sigma = rewards
        .iter()
        .map(RewardModel::sub_gaussian_parameter)
        .fold(0.0f64, f64::max)
        .sqrt();
    Ok(Instance {
        structure,
        rewards,
        mu,
        mu_star,
        best_arm,
        gap,
        gap_min,
        gap_max,
        sigma,
    })
}

impl Instance {
    pub fn structure(&self) -> &GroupStructure {
        &self.structure
    }

    pub fn rewards(&self) -> &[RewardModel] {
        &self.rewards
    }

    pub fn num_arms(&self) -> usize {
        self.structure.num_arms()
    }

    pub fn num_groups(&self) -> usize {
        self.structure.num_groups()
    }

    /// Mean reward of each arm.
    pub fn means(&self) -> &[f64] {
        &self.mu
    }

    pub fn mean(&self, a: usize) -> f64 {
        self.mu[a]
    }

    /// Best mean within group `g`.
    pub fn mu_star(&self, g: usize) -> f64 {
        self.mu_star[g]
    }

    /// Optimal arm of group `g` (lowest index among ties).
    pub fn best_arm(&self, g: usize) -> usize {
        self.best_arm[g]
    }

    /// Suboptimality gap of arm `a` for group `g`; `a` must be feasible for `g`.
    #[inline]
    pub fn gap(&self, g: usize, a: usize) -> f64 {
        let d = self.gap[g][a];
        debug_assert!(!d.is_nan(), "arm {a} is not feasible for group {g}");
        d
    }

    /// Best-vs-second gap of group `g`; zero when the optimum is tied.
    pub fn gap_min(&self, g: usize) -> f64 {
        self.gap_min[g]
    }

    pub fn gap_max(&self) -> f64 {
        self.gap_max
    }

    /// Common noise scale: square root of the largest subGaussian variance proxy.
    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    pub fn is_bernoulli(&self) -> bool {
        self.rewards.iter().all(RewardModel::is_bernoulli)
    }

    pub fn is_unit_gaussian(&self) -> bool {
        self.rewards
            .iter()
            .all(|r| matches!(r, RewardModel::Gaussian { variance, .. } if *variance == 1.0))
    }

    /// Sorted distinct gap values over all feasible (group, arm) pairs,
    /// including the per-group best-vs-second gaps.
    pub fn gap_values(&self) -> Vec<f64> {
        let mut v: Vec<f64> = Vec::new();
        for g in 0..self.num_groups() {
            for a in self.structure.arm_set(g).iter() {
                v.push(self.gap(g, a));
            }
            v.push(self.gap_min[g]);
        }
        v.sort_by(|a, b| a.total_cmp(b));
        v.dedup();
        v
    }

    /// Copy of this instance with arm `a`'s mean replaced.
    pub fn with_arm_mean(&self, a: usize, mean: f64) -> Result<Instance> {
        let mut rewards = self.rewards.clone();
        rewards[a] = rewards[a].with_mean(mean);
        build_instance(self.structure.clone(), rewards)
    }

    /// Rescales every Gaussian arm by `s`: means and standard deviations are
    /// multiplied by `s`. Bernoulli arms are rejected.
    pub fn rescaled(&self, s: f64) -> Result<Instance> {
        if !(s.is_finite() && s > 0.0) {
            return Err(Error::InvalidArgument(format!("scale must be positive, got {s}")));
        }
        let rewards = self
            .rewards
            .iter()
            .enumerate()
            .map(|(arm, r)| match *r {
                RewardModel::Gaussian { mean, variance } => Ok(RewardModel::Gaussian {
                    mean: mean * s,
                    variance: variance * s * s,
                }),
                RewardModel::Bernoulli { .. } => Err(Error::InvalidRewardModel {
                    arm,
                    reason: "Bernoulli arms cannot be rescaled".into(),
                }),
            })
            .collect::<Result<Vec<_>>>()?;
        build_instance(self.structure.clone(), rewards)
    }
}
