//! Versioned text file format for group structures and instances.
//!
//! ```toml
//! format = "groupband-instance"
//! version = 1
//! num_arms = 3
//! groups = [[0, 1], [1, 2]]      # feasible arm indices per group
//!
//! [[arms]]                       # optional; omit for a structure-only file
//! kind = "gaussian"              # or "bernoulli" (no variance field)
//! mean = 0.9
//! variance = 1.0
//! ```
//!
//! Floats are written in shortest round-trip form, so load/save is lossless.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::instance::{build_instance, Instance};
use crate::reward::RewardModel;
use crate::structure::GroupStructure;

pub const FORMAT_TAG: &str = "groupband-instance";
pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InstanceFile {
    pub format: String,
    pub version: u32,
    pub num_arms: usize,
    pub groups: Vec<Vec<usize>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub arms: Option<Vec<RewardModel>>,
}

impl InstanceFile {
    pub fn from_structure(structure: &GroupStructure) -> Self {
        InstanceFile {
            format: FORMAT_TAG.to_string(),
            version: FORMAT_VERSION,
            num_arms: structure.num_arms(),
            groups: structure.arm_sets().iter().map(|s| s.to_vec()).collect(),
            arms: None,
        }
    }

    pub fn from_instance(instance: &Instance) -> Self {
        InstanceFile {
            arms: Some(instance.rewards().to_vec()),
            ..Self::from_structure(instance.structure())
        }
    }

    pub fn parse(text: &str) -> Result<Self> {
        let file: InstanceFile =
            toml::from_str(text).map_err(|e| Error::Format(e.to_string()))?;
        if file.format != FORMAT_TAG {
            return Err(Error::Format(format!(
                "expected format = \"{FORMAT_TAG}\", found \"{}\"",
                file.format
            )));
        }
        if file.version != FORMAT_VERSION {
            return Err(Error::Format(format!(
                "unsupported version {} (this build reads version {FORMAT_VERSION})",
                file.version
            )));
        }
        Ok(file)
    }

    pub fn to_text(&self) -> String {
        toml::to_string(self).expect("instance files always serialize")
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text).map_err(|e| match e {
            Error::Format(msg) => Error::Format(format!("{}: {msg}", path.display())),
            other => other,
        })
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        std::fs::write(path, self.to_text()).map_err(|e| Error::io(path, e))
    }

    pub fn structure(&self) -> Result<GroupStructure> {
        GroupStructure::from_lists(self.num_arms, &self.groups)
    }

    /// The full instance, or `None` for a structure-only file.
    pub fn instance(&self) -> Result<Option<Instance>> {
        match &self.arms {
            None => Ok(None),
            Some(arms) => build_instance(self.structure()?, arms.clone()).map(Some),
        }
    }
}
