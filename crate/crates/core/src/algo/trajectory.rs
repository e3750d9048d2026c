use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::bitset::ArmSet;
use crate::error::{Error, Result};

use super::Policy;

/// Per-round Col-UCB internals, recorded for auditing.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RoundDiagnostics {
    pub burn_in: bool,
    /// `C(t)`.
    pub contention: ArmSet,
    /// `q(t)`; `None` when no LP was solved this round.
    pub q: Option<f64>,
    /// `eps(t)`; infinite while some contention arm is unpulled.
    pub eps: f64,
    /// `k` with `eps(t)` in `(2^-(k+2), 2^-(k+1)]`, and `0` for `eps > 1/4`.
    pub epoch: u32,
    /// Duality gap of the solved LP.
    pub lp_gap: Option<f64>,
    /// Largest violation of the LP's constraints by the stored `x(t), q(t)`.
    pub lp_violation: Option<f64>,
}

/// Epoch index of a confidence radius.
pub fn epoch_of(eps: f64) -> u32 {
    if !(eps <= 0.25) {
        return 0;
    }
    // eps in (2^-(k+2), 2^-(k+1)]; powers of two are exact.
    let mut k = 1u32;
    let mut upper = 0.25f64;
    while eps <= upper / 2.0 && k < 1000 {
        upper /= 2.0;
        k += 1;
    }
    k
}

/// A full run: actions and pseudo-regret increments for every (round, group).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub policy: Policy,
    pub num_groups: usize,
    pub horizon: u64,
    /// Burn-in length (0 for the baselines).
    pub burn_in: u64,
    // Row-major [round][group].
    actions: Vec<u8>,
    regret: Vec<f64>,
    /// One entry per round for Col-UCB, empty for the baselines.
    pub diagnostics: Vec<RoundDiagnostics>,
}

impl Trajectory {
    pub fn new(policy: Policy, num_groups: usize, horizon: u64, burn_in: u64) -> Self {
        let cells = num_groups * horizon as usize;
        Trajectory {
            policy,
            num_groups,
            horizon,
            burn_in,
            actions: Vec::with_capacity(cells),
            regret: Vec::with_capacity(cells),
            diagnostics: Vec::new(),
        }
    }

    pub fn push_round(&mut self, actions: &[usize], increments: &[f64]) {
        debug_assert_eq!(actions.len(), self.num_groups);
        self.actions.extend(actions.iter().map(|&a| a as u8));
        self.regret.extend_from_slice(increments);
    }

    pub fn rounds(&self) -> usize {
        self.actions.len() / self.num_groups.max(1)
    }

    pub fn action(&self, t: usize, g: usize) -> usize {
        self.actions[t * self.num_groups + g] as usize
    }

    pub fn regret_increment(&self, t: usize, g: usize) -> f64 {
        self.regret[t * self.num_groups + g]
    }

    /// Cumulative pseudo-regret of each group after every round.
    pub fn cumulative(&self) -> Vec<Vec<f64>> {
        let mut out = vec![Vec::with_capacity(self.rounds()); self.num_groups];
        let mut acc = vec![0.0; self.num_groups];
        for t in 0..self.rounds() {
            for g in 0..self.num_groups {
                acc[g] += self.regret_increment(t, g);
                out[g].push(acc[g]);
            }
        }
        out
    }

    /// Final cumulative pseudo-regret per group.
    pub fn group_regret(&self) -> Vec<f64> {
        let mut acc = vec![0.0; self.num_groups];
        for t in 0..self.rounds() {
            for (g, a) in acc.iter_mut().enumerate() {
                *a += self.regret_increment(t, g);
            }
        }
        acc
    }

    /// `max_g Reg_g` after the last round.
    pub fn collaborative_regret(&self) -> f64 {
        self.group_regret().into_iter().fold(0.0, f64::max)
    }

    /// `max_g Reg_g(t)` after each round `t = 1..=T`.
    pub fn collaborative_curve(&self) -> Vec<f64> {
        let mut acc = vec![0.0; self.num_groups];
        (0..self.rounds())
            .map(|t| {
                for (g, a) in acc.iter_mut().enumerate() {
                    *a += self.regret_increment(t, g);
                }
                acc.iter().copied().fold(0.0, f64::max)
            })
            .collect()
    }

    /// CSV with columns `t, group, action, regret_increment,
    /// contention_size, q_value, eps_t`; `t` is 1-based and missing
    /// diagnostics are written as `NA`.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let fmt_err = |e: csv::Error| Error::Format(e.to_string());
        w.write_record(["t", "group", "action", "regret_increment", "contention_size", "q_value", "eps_t"])
            .map_err(fmt_err)?;
        for t in 0..self.rounds() {
            let d = self.diagnostics.get(t);
            let size = d.map_or("NA".to_string(), |d| d.contention.len().to_string());
            let q = d.and_then(|d| d.q).map_or("NA".to_string(), fmt_f64);
            let eps = d.map_or("NA".to_string(), |d| fmt_f64(d.eps));
            for g in 0..self.num_groups {
                w.write_record([
                    (t + 1).to_string(),
                    g.to_string(),
                    self.action(t, g).to_string(),
                    fmt_f64(self.regret_increment(t, g)),
                    size.clone(),
                    q.clone(),
                    eps.clone(),
                ])
                .map_err(fmt_err)?;
            }
        }
        w.flush().map_err(|e| Error::Format(e.to_string()))
    }
}

/// Floats in CSV and text reports: 17 significant digits.
pub fn fmt_f64(v: f64) -> String {
    if v.is_finite() {
        format!("{v:.16e}")
    } else if v.is_nan() {
        "NaN".into()
    } else if v > 0.0 {
        "inf".into()
    } else {
        "-inf".into()
    }
}
