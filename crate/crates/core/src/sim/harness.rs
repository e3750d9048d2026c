//! Seeded Monte Carlo runs and their aggregation.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::algo::{run_with, stream_rng, AlgoConfig, Policy, StreamKind, Trajectory};
use crate::error::{Error, Result};
use crate::instance::Instance;

use super::config::ExperimentConfig;

/// Compensated (Neumaier) running sum.
#[derive(Debug, Clone, Copy, Default)]
pub struct NeumaierSum {
    sum: f64,
    comp: f64,
}

impl NeumaierSum {
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

fn sum(xs: impl IntoIterator<Item = f64>) -> f64 {
    let mut s = NeumaierSum::default();
    for x in xs {
        s.add(x);
    }
    s.value()
}

/// Sample mean and standard error (`None` for a single sample).
pub fn mean_stderr(xs: &[f64]) -> (f64, Option<f64>) {
    let n = xs.len() as f64;
    let mean = sum(xs.iter().copied()) / n;
    if xs.len() < 2 {
        return (mean, None);
    }
    let var = sum(xs.iter().map(|x| (x - mean) * (x - mean))) / (n - 1.0);
    (mean, Some((var / n).sqrt()))
}

/// At most `points` distinct rounds in `1..=horizon`, spaced geometrically
/// and always ending at `horizon`.
pub fn curve_times(horizon: u64, points: usize) -> Vec<u64> {
    let points = points.max(2);
    if horizon as usize <= points {
        return (1..=horizon).collect();
    }
    let ratio = (horizon as f64).ln() / (points - 1) as f64;
    let mut out: Vec<u64> = (0..points)
        .map(|i| ((ratio * i as f64).exp().round() as u64).clamp(1, horizon))
        .collect();
    out.push(horizon);
    out.sort_unstable();
    out.dedup();
    out
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct EpochStat {
    pub epoch: u32,
    /// Rounds summed over seeds.
    pub rounds: u64,
    pub mean_contention: f64,
    /// Mean of the allocation value over rounds where it was computed.
    pub mean_q: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PolicyDiagnostics {
    pub mean_contention: f64,
    pub epochs: Vec<EpochStat>,
}

/// What one trajectory reduces to.
#[derive(Debug, Clone)]
struct TrialSummary {
    collaborative: f64,
    groups: Vec<f64>,
    curve: Vec<f64>,
    audit_error: f64,
    /// epoch -> (rounds, contention size sum, q sum, q count)
    epochs: BTreeMap<u32, (u64, f64, f64, u64)>,
    has_diagnostics: bool,
}

fn summarize(traj: &Trajectory, instance: &Instance, times: &[u64]) -> TrialSummary {
    let curve_all = traj.collaborative_curve();
    let curve = times.iter().map(|&t| curve_all[t as usize - 1]).collect();
    // Recompute the worst group's regret straight from the action log.
    let ng = instance.num_groups();
    let mut per_group = vec![NeumaierSum::default(); ng];
    for t in 0..traj.rounds() {
        for (g, acc) in per_group.iter_mut().enumerate() {
            acc.add(instance.gap(g, traj.action(t, g)));
        }
    }
    let recomputed = per_group.iter().map(NeumaierSum::value).fold(0.0, f64::max);
    let collaborative = traj.collaborative_regret();
    let mut epochs: BTreeMap<u32, (u64, f64, f64, u64)> = BTreeMap::new();
    for d in &traj.diagnostics {
        let e = epochs.entry(d.epoch).or_default();
        e.0 += 1;
        e.1 += d.contention.len() as f64;
        if let Some(q) = d.q {
            e.2 += q;
            e.3 += 1;
        }
    }
    TrialSummary {
        collaborative,
        groups: traj.group_regret(),
        curve,
        audit_error: (recomputed - collaborative).abs(),
        epochs,
        has_diagnostics: !traj.diagnostics.is_empty(),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PolicyReport {
    pub policy: Policy,
    pub burn_in: u64,
    pub mean_regret: f64,
    pub stderr: Option<f64>,
    /// Collaborative regret of each trial, in trial order.
    pub per_seed: Vec<f64>,
    pub group_mean_regret: Vec<f64>,
    pub curve_mean: Vec<f64>,
    pub curve_stderr: Vec<Option<f64>>,
    pub diagnostics: Option<PolicyDiagnostics>,
    /// Largest gap between the stored and recomputed worst-group regret.
    pub max_audit_error: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub horizon: u64,
    pub num_seeds: u64,
    pub base_seed: u64,
    pub const_scale: f64,
    pub coupled: bool,
    pub curve_times: Vec<u64>,
    pub policies: Vec<PolicyReport>,
}

impl ExperimentReport {
    pub fn policy(&self, policy: Policy) -> Option<&PolicyReport> {
        self.policies.iter().find(|p| p.policy == policy)
    }

    /// Plain-text summary table.
    pub fn summary(&self) -> String {
        let mut s = format!(
            "horizon {}  seeds {}  base_seed {}  const_scale {}  coupled {}\n",
            self.horizon, self.num_seeds, self.base_seed, self.const_scale, self.coupled
        );
        s.push_str(&format!("{:<18}{:>10}{:>16}{:>14}\n", "policy", "burn_in", "mean_regret", "stderr"));
        for p in &self.policies {
            let se = p.stderr.map_or_else(|| "NA".to_string(), |v| format!("{v:.4}"));
            s.push_str(&format!(
                "{:<18}{:>10}{:>16.4}{:>14}\n",
                p.policy.name(),
                p.burn_in,
                p.mean_regret,
                se
            ));
        }
        s
    }
}

/// One trajectory of `policy` on trial `trial`.
pub fn run_trial(
    policy: Policy,
    instance: &Instance,
    config: &AlgoConfig,
    base_seed: u64,
    trial: u64,
    coupled: bool,
) -> Result<Trajectory> {
    let env_owner = if coupled { None } else { Some(policy) };
    let mut env = stream_rng(base_seed, trial, env_owner, StreamKind::Environment);
    let mut pol = stream_rng(base_seed, trial, Some(policy), StreamKind::Policy);
    run_with(policy, instance, config, &mut env, &mut pol, |_, _| {})
}

/// Runs the configured experiment on its own instance.
pub fn run_experiment(config: &ExperimentConfig) -> Result<ExperimentReport> {
    config.validate()?;
    let instance = config.load_instance()?;
    run_experiment_on(config, &instance)
}

/// Runs the configured policies and seeds on `instance` (the config's own
/// instance source is ignored).
pub fn run_experiment_on(config: &ExperimentConfig, instance: &Instance) -> Result<ExperimentReport> {
    if config.num_seeds < 1 || config.horizon < 2 || config.policies.is_empty() {
        return Err(Error::InvalidArgument(
            "need at least one seed, one policy and a horizon of at least 2".into(),
        ));
    }
    let algo = config.algo_config(instance)?;
    let times = curve_times(config.horizon, config.curve_points);
    let mut policies = Vec::new();
    for &policy in &config.policies {
        let trials: Vec<TrialSummary> = (0..config.num_seeds)
            .into_par_iter()
            .map(|trial| {
                let traj = run_trial(policy, instance, &algo, config.base_seed, trial, config.coupled)?;
                Ok(summarize(&traj, instance, &times))
            })
            .collect::<Result<_>>()?;
        let burn_in = crate::algo::make_policy(policy, instance, &algo)?.burn_in_length().min(config.horizon);
        policies.push(aggregate(policy, burn_in, &trials, instance.num_groups(), times.len()));
    }
    Ok(ExperimentReport {
        horizon: config.horizon,
        num_seeds: config.num_seeds,
        base_seed: config.base_seed,
        const_scale: config.const_scale,
        coupled: config.coupled,
        curve_times: times,
        policies,
    })
}

fn aggregate(policy: Policy, burn_in: u64, trials: &[TrialSummary], ng: usize, npoints: usize) -> PolicyReport {
    let per_seed: Vec<f64> = trials.iter().map(|t| t.collaborative).collect();
    let (mean_regret, stderr) = mean_stderr(&per_seed);
    let n = trials.len() as f64;
    let group_mean_regret = (0..ng).map(|g| sum(trials.iter().map(|t| t.groups[g])) / n).collect();
    let (curve_mean, curve_stderr) = (0..npoints)
        .map(|i| mean_stderr(&trials.iter().map(|t| t.curve[i]).collect::<Vec<_>>()))
        .unzip();
    let diagnostics = trials.iter().any(|t| t.has_diagnostics).then(|| {
        let mut merged: BTreeMap<u32, (u64, NeumaierSum, NeumaierSum, u64)> = BTreeMap::new();
        for t in trials {
            for (&e, &(rounds, c, q, qn)) in &t.epochs {
                let m = merged.entry(e).or_default();
                m.0 += rounds;
                m.1.add(c);
                m.2.add(q);
                m.3 += qn;
            }
        }
        let total_rounds: u64 = merged.values().map(|m| m.0).sum();
        let total_c = sum(merged.values().map(|m| m.1.value()));
        PolicyDiagnostics {
            mean_contention: total_c / total_rounds.max(1) as f64,
            epochs: merged
                .into_iter()
                .map(|(epoch, (rounds, c, q, qn))| EpochStat {
                    epoch,
                    rounds,
                    mean_contention: c.value() / rounds as f64,
                    mean_q: (qn > 0).then(|| q.value() / qn as f64),
                })
                .collect(),
        }
    });
    PolicyReport {
        policy,
        burn_in,
        mean_regret,
        stderr,
        per_seed,
        group_mean_regret,
        curve_mean,
        curve_stderr,
        diagnostics,
        max_audit_error: trials.iter().map(|t| t.audit_error).fold(0.0, f64::max),
    }
}

/// Paired difference `a - b` of collaborative regret over matched trials.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Comparison {
    pub delta: f64,
    pub z_score: f64,
    pub stderr: f64,
    pub n: usize,
}

pub fn compare(report: &ExperimentReport, a: Policy, b: Policy) -> Result<Comparison> {
    let get = |p: Policy| {
        report
            .policy(p)
            .ok_or_else(|| Error::InvalidArgument(format!("policy {p} is not in the report")))
    };
    let (ra, rb) = (get(a)?, get(b)?);
    compare_paired(&ra.per_seed, &rb.per_seed)
}

/// Paired comparison of two per-trial samples.
pub fn compare_paired(a: &[f64], b: &[f64]) -> Result<Comparison> {
    if a.len() != b.len() {
        return Err(Error::LengthMismatch {
            expected: a.len(),
            got: b.len(),
        });
    }
    if a.len() < 2 {
        return Err(Error::InvalidArgument("a paired comparison needs at least 2 trials".into()));
    }
    let d: Vec<f64> = a.iter().zip(b).map(|(x, y)| x - y).collect();
    let (delta, se) = mean_stderr(&d);
    let se = se.expect("n >= 2");
    let z_score = if se > 0.0 {
        delta / se
    } else if delta == 0.0 {
        0.0
    } else {
        delta.signum() * f64::INFINITY
    };
    Ok(Comparison {
        delta,
        z_score,
        stderr: se,
        n: d.len(),
    })
}
