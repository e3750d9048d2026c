use rand::RngCore;

use crate::error::Result;
use crate::structure::GroupStructure;

use super::colucb::argmax_over;
use super::config::AlgoConfig;
use super::trajectory::RoundDiagnostics;
use super::GroupPolicy;

/// Per-arm pull counts and reward sums.
#[derive(Debug, Clone)]
struct Stats {
    pulls: Vec<u64>,
    sums: Vec<f64>,
}

impl Stats {
    fn new(num_arms: usize) -> Self {
        Stats {
            pulls: vec![0; num_arms],
            sums: vec![0.0; num_arms],
        }
    }

    /// Lowest unpulled arm of `g`, else the UCB argmax (ties to lowest).
    fn ucb_choice(&self, structure: &GroupStructure, g: usize, config: &AlgoConfig) -> usize {
        let set = structure.arm_set(g);
        if let Some(a) = set.iter().find(|&a| self.pulls[a] == 0) {
            return a;
        }
        let mut score = vec![f64::NEG_INFINITY; self.pulls.len()];
        for a in set.iter() {
            score[a] = self.sums[a] / self.pulls[a] as f64 + config.width(self.pulls[a]);
        }
        argmax_over(set, &score)
    }

    fn add(&mut self, a: usize, r: f64) {
        self.pulls[a] += 1;
        self.sums[a] += r;
    }
}

/// Each group runs UCB on its own observations only.
#[derive(Debug, Clone)]
pub struct IndependentUcb {
    structure: GroupStructure,
    config: AlgoConfig,
    per_group: Vec<Stats>,
}

impl IndependentUcb {
    pub fn new(structure: &GroupStructure, config: AlgoConfig) -> Result<Self> {
        config.validate()?;
        Ok(IndependentUcb {
            structure: structure.clone(),
            per_group: vec![Stats::new(structure.num_arms()); structure.num_groups()],
            config,
        })
    }
}

impl GroupPolicy for IndependentUcb {
    fn select(&mut self, _rng: &mut dyn RngCore) -> Result<Vec<usize>> {
        Ok((0..self.structure.num_groups())
            .map(|g| self.per_group[g].ucb_choice(&self.structure, g, &self.config))
            .collect())
    }

    fn observe(&mut self, actions: &[usize], rewards: &[f64]) {
        for (g, (&a, &r)) in actions.iter().zip(rewards).enumerate() {
            self.per_group[g].add(a, r);
        }
    }

    fn diagnostics(&self) -> Option<RoundDiagnostics> {
        None
    }
}

/// Every group sees every observation but picks its own UCB arm, with no
/// coordination of exploration.
#[derive(Debug, Clone)]
pub struct PooledUcb {
    structure: GroupStructure,
    config: AlgoConfig,
    pooled: Stats,
}

impl PooledUcb {
    pub fn new(structure: &GroupStructure, config: AlgoConfig) -> Result<Self> {
        config.validate()?;
        Ok(PooledUcb {
            structure: structure.clone(),
            pooled: Stats::new(structure.num_arms()),
            config,
        })
    }
}

impl GroupPolicy for PooledUcb {
    fn select(&mut self, _rng: &mut dyn RngCore) -> Result<Vec<usize>> {
        Ok((0..self.structure.num_groups())
            .map(|g| self.pooled.ucb_choice(&self.structure, g, &self.config))
            .collect())
    }

    fn observe(&mut self, actions: &[usize], rewards: &[f64]) {
        for (&a, &r) in actions.iter().zip(rewards) {
            self.pooled.add(a, r);
        }
    }

    fn diagnostics(&self) -> Option<RoundDiagnostics> {
        None
    }
}
