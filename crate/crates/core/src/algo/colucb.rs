use rand::{Rng, RngCore};

use crate::bitset::ArmSet;
use crate::error::{Error, Result};
use crate::flow::{burn_in_schedule, BurninSchedule};
use crate::instance::Instance;
use crate::lp::{solve_lp, LpProblem, LpStatus, Sense};
use crate::reward::sample_reward;
use crate::structure::GroupStructure;

use super::config::{AlgoConfig, DefaultArm};
use super::trajectory::{epoch_of, RoundDiagnostics};
use super::GroupPolicy;

/// The allocation LP for one round, with the `(group, arm)` owning each
/// variable. The last variable is `q`.
#[derive(Debug, Clone)]
pub struct AllocationLp {
    pub problem: LpProblem,
    pub vars: Vec<(usize, usize)>,
}

/// Full per-round state of Col-UCB.
#[derive(Debug, Clone)]
pub struct ColUcbState {
    structure: GroupStructure,
    config: AlgoConfig,
    burnin: BurninSchedule,
    round: u64,
    pull_count: Vec<u64>,
    reward_sum: Vec<f64>,
    mean_est: Vec<f64>,
    // [g * num_arms + a]; NaN outside A_g.
    gap_est: Vec<f64>,
    ucb: Vec<f64>,
    lcb: Vec<f64>,
    candidate_sets: Vec<ArmSet>,
    cumulative_contention: Vec<ArmSet>,
    contention: ArmSet,
    p_min: Option<u64>,
    eps_t: f64,
    // x[g * num_arms + a] for the current round; zero outside C(t) ∩ A_g.
    allocation: Vec<f64>,
    q_value: Option<f64>,
    last: Option<RoundDiagnostics>,
}

impl ColUcbState {
    /// Round 0: statistics zeroed, `C(0) = A`, burn-in precomputed.
    pub fn new(structure: &GroupStructure, config: AlgoConfig) -> Result<Self> {
        config.validate()?;
        let burnin = burn_in_schedule(structure, config.burnin_pulls)?;
        let (na, ng) = (structure.num_arms(), structure.num_groups());
        Ok(ColUcbState {
            structure: structure.clone(),
            config,
            burnin,
            round: 0,
            pull_count: vec![0; na],
            reward_sum: vec![0.0; na],
            mean_est: vec![0.0; na],
            gap_est: vec![f64::NAN; ng * na],
            ucb: vec![f64::INFINITY; na],
            lcb: vec![f64::NEG_INFINITY; na],
            candidate_sets: structure.arm_sets().to_vec(),
            cumulative_contention: structure.arm_sets().to_vec(),
            contention: structure.all_arms(),
            p_min: Some(0),
            eps_t: f64::INFINITY,
            allocation: vec![0.0; ng * na],
            q_value: None,
            last: None,
        })
    }

    pub fn structure(&self) -> &GroupStructure {
        &self.structure
    }
    pub fn config(&self) -> &AlgoConfig {
        &self.config
    }
    pub fn burnin(&self) -> &BurninSchedule {
        &self.burnin
    }
    /// Rounds completed so far.
    pub fn round(&self) -> u64 {
        self.round
    }
    pub fn in_burnin(&self) -> bool {
        self.round < self.burnin.length
    }
    pub fn pull_count(&self) -> &[u64] {
        &self.pull_count
    }
    pub fn reward_sum(&self) -> &[f64] {
        &self.reward_sum
    }
    pub fn mean_est(&self) -> &[f64] {
        &self.mean_est
    }
    pub fn gap_est(&self, g: usize, a: usize) -> f64 {
        self.gap_est[g * self.structure.num_arms() + a]
    }
    pub fn ucb(&self) -> &[f64] {
        &self.ucb
    }
    pub fn lcb(&self) -> &[f64] {
        &self.lcb
    }
    pub fn candidate_sets(&self) -> &[ArmSet] {
        &self.candidate_sets
    }
    pub fn cumulative_contention(&self) -> &[ArmSet] {
        &self.cumulative_contention
    }
    pub fn contention(&self) -> ArmSet {
        self.contention
    }
    /// `P(t)`; `None` when `C(t)` is empty.
    pub fn p_min(&self) -> Option<u64> {
        self.p_min
    }
    pub fn eps_t(&self) -> f64 {
        self.eps_t
    }
    pub fn allocation(&self, g: usize, a: usize) -> f64 {
        self.allocation[g * self.structure.num_arms() + a]
    }
    pub fn q_value(&self) -> Option<f64> {
        self.q_value
    }
    pub fn last_diagnostics(&self) -> Option<&RoundDiagnostics> {
        self.last.as_ref()
    }

    /// Recomputes means, confidence bounds and gap estimates from the
    /// pooled counts.
    pub fn refresh_statistics(&mut self) {
        let na = self.structure.num_arms();
        for a in 0..na {
            let p = self.pull_count[a];
            let w = self.config.width(p);
            if p > 0 {
                self.mean_est[a] = self.reward_sum[a] / p as f64;
                self.ucb[a] = self.mean_est[a] + w;
                self.lcb[a] = self.mean_est[a] - w;
            } else {
                self.mean_est[a] = 0.0;
                self.ucb[a] = f64::INFINITY;
                self.lcb[a] = f64::NEG_INFINITY;
            }
        }
        for g in 0..self.structure.num_groups() {
            let set = self.structure.arm_set(g);
            let best = set.iter().map(|a| self.mean_est[a]).fold(f64::NEG_INFINITY, f64::max);
            for a in set.iter() {
                self.gap_est[g * na + a] = best - self.mean_est[a];
            }
        }
    }

    /// `{a in A_g : UCB_a >= max_{a' in A_g} LCB_a'}`.
    pub fn candidate_set(&self, g: usize) -> ArmSet {
        let set = self.structure.arm_set(g);
        let max_lcb = set.iter().map(|a| self.lcb[a]).fold(f64::NEG_INFINITY, f64::max);
        set.iter().filter(|&a| self.ucb[a] >= max_lcb).collect()
    }

    /// Intersects each group's running contention with this round's
    /// `C_g(t)` and rebuilds `C(t)`, `P(t)` and `eps(t)`.
    pub fn update_contention(&mut self) {
        let mut union = ArmSet::EMPTY;
        for g in 0..self.structure.num_groups() {
            let cand = self.candidate_set(g);
            self.candidate_sets[g] = cand;
            let c_g = if cand.len() == 1 { ArmSet::EMPTY } else { cand };
            self.cumulative_contention[g] = self.cumulative_contention[g].intersection(c_g);
            union = union.union(self.cumulative_contention[g]);
        }
        self.contention = union;
        self.recompute_radius();
    }

    fn recompute_radius(&mut self) {
        self.p_min = self.contention.iter().map(|a| self.pull_count[a]).min();
        self.eps_t = match self.p_min {
            Some(p) => self.config.width(p),
            None => f64::INFINITY,
        };
    }

    /// The allocation LP over the current contention set.
    pub fn build_q(&self) -> Result<AllocationLp> {
        if self.contention.is_empty() {
            return Err(Error::InvalidArgument("allocation LP needs a nonempty contention set".into()));
        }
        let ng = self.structure.num_groups();
        let mut vars = Vec::new();
        for g in 0..ng {
            for a in self.contention.intersection(self.structure.arm_set(g)).iter() {
                vars.push((g, a));
            }
        }
        let nv = vars.len() + 1;
        let q = vars.len();
        let mut objective = vec![0.0; nv];
        objective[q] = 1.0;
        let mut lp = LpProblem::maximize(objective);
        let p = self.p_min.unwrap_or(0);
        if p > 0 {
            for g in 0..ng {
                let mut row = vec![0.0; nv];
                for (k, &(h, a)) in vars.iter().enumerate() {
                    if h == g {
                        row[k] = self.gap_est(g, a);
                    }
                }
                lp.add_constraint(row, Sense::Le, self.eps_t);
            }
        }
        for g in 0..ng {
            let mut row = vec![0.0; nv];
            for (k, &(h, _)) in vars.iter().enumerate() {
                if h == g {
                    row[k] = 1.0;
                }
            }
            lp.add_constraint(row, Sense::Le, 1.0);
        }
        for a in self.contention.iter() {
            let mut row = vec![0.0; nv];
            for (k, &(_, b)) in vars.iter().enumerate() {
                if b == a {
                    row[k] = 1.0;
                }
            }
            row[q] = -1.0;
            lp.add_constraint(row, Sense::Ge, 0.0);
        }
        Ok(AllocationLp { problem: lp, vars })
    }

    /// Largest violation of the allocation constraints by the stored
    /// `x(t), q(t)`, recomputed from scratch.
    fn allocation_violation(&self, q: f64) -> f64 {
        let (ng, na) = (self.structure.num_groups(), self.structure.num_arms());
        let mut worst = (-q).max(0.0);
        for g in 0..ng {
            let arms = self.contention.intersection(self.structure.arm_set(g));
            let mass: f64 = arms.iter().map(|a| self.allocation[g * na + a]).sum();
            worst = worst.max(mass - 1.0);
            if self.p_min.unwrap_or(0) > 0 {
                let cost: f64 = arms.iter().map(|a| self.gap_est(g, a) * self.allocation[g * na + a]).sum();
                worst = worst.max(cost - self.eps_t);
            }
            for a in arms.iter() {
                worst = worst.max(-self.allocation[g * na + a]);
            }
        }
        for a in self.contention.iter() {
            let cover: f64 = self.structure.groups_of(a).iter().map(|g| self.allocation[g * na + a]).sum();
            worst = worst.max(q - cover);
        }
        worst
    }

    fn default_arm(&self, g: usize) -> usize {
        let score = match self.config.default_arm {
            DefaultArm::EmpiricalBest => &self.mean_est,
            DefaultArm::UcbBest => &self.ucb,
        };
        argmax_over(self.structure.arm_set(g), score)
    }

    /// Chooses every group's arm for the current round.
    pub fn select(&mut self, rng: &mut dyn RngCore) -> Result<Vec<usize>> {
        if self.round >= self.config.horizon {
            return Err(Error::InvalidArgument(format!(
                "round {} is past the horizon {}",
                self.round + 1,
                self.config.horizon
            )));
        }
        let ng = self.structure.num_groups();
        let na = self.structure.num_arms();
        self.allocation.iter_mut().for_each(|x| *x = 0.0);
        self.q_value = None;
        if self.in_burnin() {
            // C(t) stays at A until the burn-in is over.
            self.recompute_radius();
            self.last = Some(RoundDiagnostics {
                burn_in: true,
                contention: self.contention,
                q: None,
                eps: self.eps_t,
                epoch: epoch_of(self.eps_t),
                lp_gap: None,
                lp_violation: None,
            });
            return Ok(self.burnin.round(self.round));
        }

        self.refresh_statistics();
        self.update_contention();
        let mut lp_gap = None;
        let mut lp_violation = None;
        if !self.contention.is_empty() {
            let q_lp = self.build_q()?;
            let sol = solve_lp(&q_lp.problem)?;
            if sol.status != LpStatus::Optimal {
                return Err(Error::Internal(format!("allocation LP returned {:?}", sol.status)));
            }
            for (k, &(g, a)) in q_lp.vars.iter().enumerate() {
                self.allocation[g * na + a] = sol.primal[k];
            }
            let q = sol.primal[q_lp.vars.len()];
            self.q_value = Some(q);
            lp_gap = Some(sol.duality_gap());
            lp_violation = Some(self.allocation_violation(q));
        }
        let mut actions = Vec::with_capacity(ng);
        for g in 0..ng {
            let arms = self.contention.intersection(self.structure.arm_set(g));
            let mut chosen = None;
            if !arms.is_empty() {
                // One uniform per group; walk the cumulative mass in
                // ascending arm order, the remainder goes to the default arm.
                let u: f64 = rng.gen();
                let mut acc = 0.0;
                for a in arms.iter() {
                    acc += self.allocation[g * na + a];
                    if u < acc {
                        chosen = Some(a);
                        break;
                    }
                }
            }
            actions.push(chosen.unwrap_or_else(|| self.default_arm(g)));
        }
        self.last = Some(RoundDiagnostics {
            burn_in: false,
            contention: self.contention,
            q: self.q_value,
            eps: self.eps_t,
            epoch: epoch_of(self.eps_t),
            lp_gap,
            lp_violation,
        });
        Ok(actions)
    }

    /// Adds the round's observations to the pooled statistics.
    pub fn observe(&mut self, actions: &[usize], rewards: &[f64]) {
        for (&a, &r) in actions.iter().zip(rewards) {
            self.pull_count[a] += 1;
            self.reward_sum[a] += r;
        }
        self.round += 1;
    }

    /// One full round: select, draw one reward per group, observe.
    pub fn step(
        &mut self,
        instance: &Instance,
        env_rng: &mut dyn RngCore,
        policy_rng: &mut dyn RngCore,
    ) -> Result<(Vec<usize>, Vec<f64>)> {
        let actions = self.select(policy_rng)?;
        let rewards: Vec<f64> = actions
            .iter()
            .map(|&a| sample_reward(&instance.rewards()[a], env_rng))
            .collect();
        self.observe(&actions, &rewards);
        Ok((actions, rewards))
    }
}

/// Highest score over `set`, ties to the lowest arm.
pub(crate) fn argmax_over(set: ArmSet, score: &[f64]) -> usize {
    let mut best = set.first().expect("nonempty arm set");
    for a in set.iter() {
        if score[a] > score[best] {
            best = a;
        }
    }
    best
}

impl GroupPolicy for ColUcbState {
    fn select(&mut self, rng: &mut dyn RngCore) -> Result<Vec<usize>> {
        ColUcbState::select(self, rng)
    }
    fn observe(&mut self, actions: &[usize], rewards: &[f64]) {
        ColUcbState::observe(self, actions, rewards)
    }
    fn diagnostics(&self) -> Option<RoundDiagnostics> {
        self.last
    }
    fn burn_in_length(&self) -> u64 {
        self.burnin.length
    }
}
