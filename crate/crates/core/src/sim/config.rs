//! Experiment configuration files.
//!
//! ```toml
//! format = "groupband-experiment"
//! version = 1
//! policies = ["col_ucb", "independent_ucb"]
//! horizon = 20000
//! num_seeds = 50
//! base_seed = 0
//! const_scale = 0.01
//! coupled = true
//! instance_file = "shared.toml"   # relative to this file, or an inline [instance] table
//!
//! [output]
//! dir = "out"
//! ```

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::algo::{AlgoConfig, DefaultArm, Policy};
use crate::error::{Error, Result};
use crate::instance::Instance;
use crate::io::InstanceFile;

pub const EXPERIMENT_FORMAT: &str = "groupband-experiment";
pub const EXPERIMENT_VERSION: u32 = 1;
pub const DEFAULT_CURVE_POINTS: usize = 512;

fn default_format() -> String {
    EXPERIMENT_FORMAT.to_string()
}

fn default_version() -> u32 {
    EXPERIMENT_VERSION
}

fn default_const_scale() -> f64 {
    1.0
}

fn default_curve_points() -> usize {
    DEFAULT_CURVE_POINTS
}

fn default_true() -> bool {
    true
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dir: Option<PathBuf>,
    #[serde(default = "default_true")]
    pub svg: bool,
}

impl Default for OutputConfig {
    fn default() -> Self {
        OutputConfig { dir: None, svg: true }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default = "default_format")]
    pub format: String,
    #[serde(default = "default_version")]
    pub version: u32,
    pub policies: Vec<Policy>,
    pub horizon: u64,
    pub num_seeds: u64,
    #[serde(default)]
    pub base_seed: u64,
    #[serde(default = "default_const_scale")]
    pub const_scale: f64,
    /// Policies of one trial share the environment stream.
    #[serde(default)]
    pub coupled: bool,
    #[serde(default)]
    pub default_arm: DefaultArm,
    /// Upper bound on the number of points kept per regret curve.
    #[serde(default = "default_curve_points")]
    pub curve_points: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub instance_file: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub instance: Option<InstanceFile>,
    #[serde(default)]
    pub output: OutputConfig,
}

impl ExperimentConfig {
    /// A config with an inline instance and default settings elsewhere.
    pub fn inline(instance: &Instance, policies: Vec<Policy>, horizon: u64, num_seeds: u64) -> Self {
        ExperimentConfig {
            format: default_format(),
            version: EXPERIMENT_VERSION,
            policies,
            horizon,
            num_seeds,
            base_seed: 0,
            const_scale: 1.0,
            coupled: false,
            default_arm: DefaultArm::default(),
            curve_points: DEFAULT_CURVE_POINTS,
            instance_file: None,
            instance: Some(InstanceFile::from_instance(instance)),
            output: OutputConfig::default(),
        }
    }

    pub fn parse(text: &str) -> Result<Self> {
        let cfg: ExperimentConfig = toml::from_str(text).map_err(|e| Error::Format(e.to_string()))?;
        if cfg.format != EXPERIMENT_FORMAT {
            return Err(Error::Format(format!(
                "expected format = \"{EXPERIMENT_FORMAT}\", found \"{}\"",
                cfg.format
            )));
        }
        if cfg.version != EXPERIMENT_VERSION {
            return Err(Error::Format(format!(
                "unsupported experiment version {} (this build reads version {EXPERIMENT_VERSION})",
                cfg.version
            )));
        }
        Ok(cfg)
    }

    /// Reads a config file; a relative `instance_file` is resolved against
    /// the config's directory.
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut cfg = Self::parse(&text)?;
        if let Some(f) = &cfg.instance_file {
            if f.is_relative() {
                let base = path.parent().unwrap_or_else(|| Path::new(""));
                cfg.instance_file = Some(base.join(f));
            }
        }
        Ok(cfg)
    }

    pub fn to_text(&self) -> String {
        toml::to_string(self).expect("experiment configs always serialize")
    }

    pub fn validate(&self) -> Result<()> {
        if self.num_seeds < 1 {
            return Err(Error::InvalidArgument("num_seeds must be at least 1".into()));
        }
        if self.horizon < 2 {
            return Err(Error::InvalidArgument(format!("horizon must be at least 2, got {}", self.horizon)));
        }
        if self.policies.is_empty() {
            return Err(Error::InvalidArgument("no policies listed".into()));
        }
        let mut seen = self.policies.clone();
        seen.sort();
        seen.dedup();
        if seen.len() != self.policies.len() {
            return Err(Error::InvalidArgument("a policy is listed twice".into()));
        }
        if self.curve_points < 2 {
            return Err(Error::InvalidArgument("curve_points must be at least 2".into()));
        }
        match (&self.instance_file, &self.instance) {
            (Some(_), Some(_)) => Err(Error::InvalidArgument(
                "give either instance_file or an inline instance, not both".into(),
            )),
            (None, None) => Err(Error::InvalidArgument("no instance given".into())),
            _ => Ok(()),
        }
    }

    pub fn load_instance(&self) -> Result<Instance> {
        let file = match (&self.instance_file, &self.instance) {
            (Some(path), None) => InstanceFile::load(path)?,
            (None, Some(inline)) => inline.clone(),
            _ => {
                self.validate()?;
                unreachable!("validate rejects this combination")
            }
        };
        file.instance()?
            .ok_or_else(|| Error::Format("the experiment's instance has no [[arms]] reward models".into()))
    }

    pub fn algo_config(&self, instance: &Instance) -> Result<AlgoConfig> {
        Ok(AlgoConfig::new(instance.structure(), self.horizon, self.const_scale)?.with_default_arm(self.default_arm))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::build_instance;
    use crate::reward::RewardModel;
    use crate::structure::GroupStructure;

    #[test]
    fn round_trip_and_defaults() {
        let st = GroupStructure::all_shared(2, 2).unwrap();
        let inst = build_instance(st, vec![RewardModel::unit_gaussian(0.0); 2]).unwrap();
        let cfg = ExperimentConfig::inline(&inst, vec![Policy::ColUcb], 100, 3);
        let back = ExperimentConfig::parse(&cfg.to_text()).unwrap();
        assert_eq!(back, cfg);
        assert_eq!(back.load_instance().unwrap(), inst);

        let minimal = ExperimentConfig::parse(
            "policies = [\"pooled_ucb\"]\nhorizon = 10\nnum_seeds = 1\ninstance_file = \"x.toml\"\n",
        )
        .unwrap();
        assert_eq!(minimal.const_scale, 1.0);
        assert_eq!(minimal.curve_points, DEFAULT_CURVE_POINTS);
        assert!(minimal.validate().is_ok());
        assert!(ExperimentConfig::parse("policies = []\nhorizon = 10\nnum_seeds = 1\nbogus = 1\n").is_err());
    }

    #[test]
    fn validation() {
        let st = GroupStructure::all_shared(2, 2).unwrap();
        let inst = build_instance(st, vec![RewardModel::unit_gaussian(0.0); 2]).unwrap();
        let mut cfg = ExperimentConfig::inline(&inst, vec![Policy::ColUcb], 100, 0);
        assert!(cfg.validate().is_err());
        cfg.num_seeds = 2;
        cfg.policies.push(Policy::ColUcb);
        assert!(cfg.validate().is_err());
        cfg.policies.pop();
        cfg.instance_file = Some("a.toml".into());
        assert!(cfg.validate().is_err());
    }
}
