//! Per-arm reward distributions and reproducible sampling.

use rand::Rng;
use serde::{Deserialize, Serialize};

/// Reward distribution of a single arm.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum RewardModel {
    Gaussian { mean: f64, variance: f64 },
    Bernoulli { mean: f64 },
}

impl RewardModel {
    pub fn gaussian(mean: f64, variance: f64) -> Self {
        RewardModel::Gaussian { mean, variance }
    }

    /// Unit-variance Gaussian.
    pub fn unit_gaussian(mean: f64) -> Self {
        RewardModel::Gaussian { mean, variance: 1.0 }
    }

    pub fn bernoulli(mean: f64) -> Self {
        RewardModel::Bernoulli { mean }
    }

    pub fn mean(&self) -> f64 {
        match *self {
            RewardModel::Gaussian { mean, .. } | RewardModel::Bernoulli { mean } => mean,
        }
    }

    /// Same family and noise level with a different mean.
    pub fn with_mean(&self, mean: f64) -> Self {
        match *self {
            RewardModel::Gaussian { variance, .. } => RewardModel::Gaussian { mean, variance },
            RewardModel::Bernoulli { .. } => RewardModel::Bernoulli { mean },
        }
    }

    /// Variance proxy of the subGaussian tail bound: the variance for a
    /// Gaussian, 1 for a Bernoulli.
    pub fn sub_gaussian_parameter(&self) -> f64 {
        match *self {
            RewardModel::Gaussian { variance, .. } => variance,
            RewardModel::Bernoulli { .. } => 1.0,
        }
    }

    pub fn is_bernoulli(&self) -> bool {
        matches!(self, RewardModel::Bernoulli { .. })
    }

    pub fn validate(&self) -> Result<(), String> {
        match *self {
            RewardModel::Gaussian { mean, variance } => {
                if !mean.is_finite() {
                    return Err(format!("Gaussian mean must be finite, got {mean}"));
                }
                if !(variance.is_finite() && variance > 0.0) {
                    return Err(format!("Gaussian variance must be positive, got {variance}"));
                }
            }
            RewardModel::Bernoulli { mean } => {
                if !(0.0..=1.0).contains(&mean) {
                    return Err(format!("Bernoulli mean must lie in [0, 1], got {mean}"));
                }
            }
        }
        Ok(())
    }
}

/// Draws one reward.
///
/// Draw accounting, relied upon for reproducibility: a Bernoulli arm consumes
/// exactly one `f64` from `rng`; a Gaussian arm consumes exactly two (a
/// Box–Muller pair whose second normal is discarded).
pub fn sample_reward<R: Rng + ?Sized>(model: &RewardModel, rng: &mut R) -> f64 {
    match *model {
        RewardModel::Bernoulli { mean } => {
            let u: f64 = rng.gen();
            if u < mean {
                1.0
            } else {
                0.0
            }
        }
        RewardModel::Gaussian { mean, variance } => {
            // u1 in (0, 1] keeps the logarithm finite.
            let u1 = 1.0 - rng.gen::<f64>();
            let u2: f64 = rng.gen();
            let z = (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos();
            mean + variance.sqrt() * z
        }
    }
}
