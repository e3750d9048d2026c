use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::structure::GroupStructure;

/// What a group plays with the probability mass the allocation leaves over.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DefaultArm {
    /// `argmax mu_hat` over the group's arms.
    #[default]
    EmpiricalBest,
    /// `argmax UCB` over the group's arms.
    UcbBest,
}

/// Constants of Col-UCB and the confidence width shared by the baselines.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AlgoConfig {
    pub horizon: u64,
    /// `1 + ln max(|A|, |G|) / ln T`.
    pub c_g: f64,
    /// `C = 60 c_G const_scale`.
    pub conf_const: f64,
    /// `n0 = ceil(16 C ln T)`.
    pub burnin_pulls: u64,
    pub const_scale: f64,
    pub default_arm: DefaultArm,
}

impl AlgoConfig {
    /// Constants for `structure` at horizon `horizon`; `const_scale = 1`
    /// gives the unscaled values.
    pub fn new(structure: &GroupStructure, horizon: u64, const_scale: f64) -> Result<Self> {
        if horizon < 2 {
            return Err(Error::InvalidArgument(format!("horizon must be at least 2, got {horizon}")));
        }
        if !(const_scale > 0.0 && const_scale.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "const_scale must be positive and finite, got {const_scale}"
            )));
        }
        let log_t = (horizon as f64).ln();
        let size = structure.num_arms().max(structure.num_groups()) as f64;
        let c_g = 1.0 + size.ln() / log_t;
        let conf_const = 60.0 * c_g * const_scale;
        let burnin_pulls = ((16.0 * conf_const * log_t).ceil() as u64).max(1);
        Ok(AlgoConfig {
            horizon,
            c_g,
            conf_const,
            burnin_pulls,
            const_scale,
            default_arm: DefaultArm::EmpiricalBest,
        })
    }

    pub fn with_default_arm(mut self, default_arm: DefaultArm) -> Self {
        self.default_arm = default_arm;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.horizon < 2 {
            return Err(Error::InvalidArgument("horizon must be at least 2".into()));
        }
        if !(self.conf_const > 0.0 && self.conf_const.is_finite()) {
            return Err(Error::InvalidArgument("confidence constant must be positive".into()));
        }
        if self.burnin_pulls == 0 {
            return Err(Error::InvalidArgument("burn-in pulls must be at least 1".into()));
        }
        Ok(())
    }

    pub fn log_t(&self) -> f64 {
        (self.horizon as f64).ln()
    }

    /// `sqrt(C ln T / pulls)`; infinite for zero pulls.
    pub fn width(&self, pulls: u64) -> f64 {
        if pulls == 0 {
            f64::INFINITY
        } else {
            (self.conf_const * self.log_t() / pulls as f64).sqrt()
        }
    }
}
