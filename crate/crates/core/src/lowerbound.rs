//! Adversarial instance generators: the shared-exploration scale `z_T`,
//! single-arm perturbations around a group's runner-up, and the
//! three-level minimax family built from a cover.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::algo::{run_with, stream_rng, AlgoConfig, Policy, StreamKind};
use crate::analysis::functionals::{contention_star, gap_within, m_eps, t_r_functionals, Z_FLOOR};
use crate::bitset::{ArmSet, GroupSet};
use crate::error::{Error, Result};
use crate::instance::{build_instance, Instance};
use crate::reward::RewardModel;
use crate::structure::GroupStructure;

/// Number of evenly spaced points in the `z_T` search grid.
pub const Z_T_GRID: usize = 256;
/// Default number of pilot runs used to pick the perturbed arm.
pub const PILOT_SEEDS: usize = 20;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PerturbSign {
    Plus,
    Minus,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelClass {
    /// Unit-variance Gaussian rewards.
    #[default]
    Gaussian,
    Bernoulli,
}

/// Record of one single-arm perturbation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PerturbationSpec {
    pub target_arm: usize,
    pub anchor_group: usize,
    /// Magnitude actually applied (after clamping, if any).
    pub magnitude: f64,
    pub sign: PerturbSign,
    /// Best mean in the anchor group other than the target arm.
    pub anchor: f64,
}

/// The `z_T` search result together with the value it attains.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ZT {
    pub z: f64,
    /// `M(z) z^2` at `z`.
    pub value: f64,
    pub eps_t: f64,
}

/// `argmin M(z) z^2` over `z in [eps_T, (1 + eps_T) / 2]`, where `eps_T`
/// solves `T(eps) = horizon` at the instance's noise scale.
///
/// The minimum is taken over an even grid of [`Z_T_GRID`] points plus the
/// gap values in the interval (ties to the smallest point), then refined by
/// golden-section search next to the best grid point; the refinement is
/// kept only if strictly better.
pub fn z_t(instance: &Instance, horizon: u64) -> Result<ZT> {
    if horizon < 2 {
        return Err(Error::InvalidArgument(format!("horizon must be at least 2, got {horizon}")));
    }
    let f = t_r_functionals(instance, instance.sigma())?;
    let eps_t = f.eps_t(horizon as f64)?;
    let lo = eps_t.max(Z_FLOOR);
    let hi = 0.5 * (1.0 + eps_t);
    let objective = |z: f64| -> Result<f64> { Ok(m_eps(instance, z)? * z * z) };

    let mut zs: Vec<f64> = (0..Z_T_GRID)
        .map(|i| lo + (hi - lo) * i as f64 / (Z_T_GRID - 1) as f64)
        .collect();
    zs.extend(instance.gap_values().into_iter().filter(|&d| d > lo && d < hi));
    zs.sort_by(|a, b| a.total_cmp(b));
    zs.dedup();
    let vals = zs.iter().map(|&z| objective(z)).collect::<Result<Vec<_>>>()?;
    let mut best = None;
    for (i, &v) in vals.iter().enumerate() {
        if v.is_finite() && best.is_none_or(|b: usize| v < vals[b]) {
            best = Some(i);
        }
    }
    let Some(i) = best else {
        return Err(Error::InvalidArgument(
            "contention set is empty on the whole z_T interval".into(),
        ));
    };
    let (mut z, mut value) = (zs[i], vals[i]);
    let (a, b) = (zs[i.saturating_sub(1)], zs[(i + 1).min(zs.len() - 1)]);
    if let Some((rz, rv)) = golden_section(&objective, a, b)? {
        if rv < value * (1.0 - 1e-12) {
            z = rz;
            value = rv;
        }
    }
    Ok(ZT { z, value, eps_t })
}

fn golden_section<F: Fn(f64) -> Result<f64>>(f: &F, mut a: f64, mut b: f64) -> Result<Option<(f64, f64)>> {
    if b <= a {
        return Ok(None);
    }
    let r = 0.5 * (5f64.sqrt() - 1.0);
    let mut c = b - r * (b - a);
    let mut d = a + r * (b - a);
    let (mut fc, mut fd) = (f(c)?, f(d)?);
    for _ in 0..80 {
        if fc <= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - r * (b - a);
            fc = f(c)?;
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + r * (b - a);
            fd = f(d)?;
        }
    }
    let (z, v) = if fc <= fd { (c, fc) } else { (d, fd) };
    Ok(v.is_finite().then_some((z, v)))
}

/// Best mean over `A_{g0}` without `a0`.
fn runner_up(base: &Instance, a0: usize, g0: usize) -> Result<f64> {
    let st = base.structure();
    if g0 >= st.num_groups() || !st.arm_set(g0).contains(a0) {
        return Err(Error::InvalidArgument(format!("arm {a0} is not in group {g0}")));
    }
    let mut others = st.arm_set(g0);
    others.remove(a0);
    others
        .iter()
        .map(|a| base.mean(a))
        .reduce(f64::max)
        .ok_or_else(|| Error::InvalidArgument(format!("group {g0} has no arm besides {a0}")))
}

/// Sets `mu_{a0} = nu_{g0} ± eps`. Bernoulli results outside `[0, 1]` are
/// rejected.
pub fn perturb_second_best(
    base: &Instance,
    a0: usize,
    g0: usize,
    eps: f64,
    sign: PerturbSign,
) -> Result<(Instance, PerturbationSpec)> {
    if !(eps > 0.0 && eps.is_finite()) {
        return Err(Error::InvalidArgument(format!("eps must be positive, got {eps}")));
    }
    let nu = runner_up(base, a0, g0)?;
    let mean = match sign {
        PerturbSign::Plus => nu + eps,
        PerturbSign::Minus => nu - eps,
    };
    if base.rewards()[a0].is_bernoulli() && !(0.0..=1.0).contains(&mean) {
        return Err(Error::InvalidRewardModel {
            arm: a0,
            reason: format!("perturbed Bernoulli mean {mean} leaves [0, 1]"),
        });
    }
    let inst = base.with_arm_mean(a0, mean)?;
    Ok((
        inst,
        PerturbationSpec {
            target_arm: a0,
            anchor_group: g0,
            magnitude: eps,
            sign,
            anchor: nu,
        },
    ))
}

/// Variant for bases whose means all lie in `[1/4, 3/4]`: the magnitude is
/// capped at 1/4, so the perturbed mean stays in `[0, 1]`.
pub fn perturb_second_best_clamped(
    base: &Instance,
    a0: usize,
    g0: usize,
    eps: f64,
    sign: PerturbSign,
) -> Result<(Instance, PerturbationSpec)> {
    if let Some(a) = base.means().iter().position(|&m| !(0.25..=0.75).contains(&m)) {
        return Err(Error::InvalidRewardModel {
            arm: a,
            reason: format!("clamped perturbation needs means in [1/4, 3/4], got {}", base.mean(a)),
        });
    }
    perturb_second_best(base, a0, g0, eps.min(0.25), sign)
}

/// Means 1 outside `S_c = Cov(cover_groups)`, 0 on `S_c \ S` and 1/2 on `S`.
pub fn minimax_family(
    structure: &GroupStructure,
    s: ArmSet,
    cover_groups: GroupSet,
    class: ModelClass,
) -> Result<Instance> {
    if s.is_empty() {
        return Err(Error::InvalidArgument("S must be nonempty".into()));
    }
    let span = structure.cover(cover_groups);
    if !s.is_subset(span) {
        return Err(Error::InvalidArgument(format!(
            "S = {s} is not covered by groups {cover_groups} (span {span})"
        )));
    }
    let rewards = (0..structure.num_arms())
        .map(|a| {
            let m = if s.contains(a) {
                0.5
            } else if span.contains(a) {
                0.0
            } else {
                1.0
            };
            match class {
                ModelClass::Gaussian => RewardModel::unit_gaussian(m),
                ModelClass::Bernoulli => RewardModel::bernoulli(m),
            }
        })
        .collect();
    build_instance(structure.clone(), rewards)
}

/// Output of [`theorem4_adversary`].
#[derive(Debug, Clone, PartialEq)]
pub struct Adversary {
    pub z_t: ZT,
    /// Contention set at `z_T`.
    pub contention: ArmSet,
    /// Mean pulls per arm (summed over groups) in the pilot runs.
    pub pilot_pulls: Vec<f64>,
    pub plus: Instance,
    pub minus: Instance,
    pub spec_plus: PerturbationSpec,
    pub spec_minus: PerturbationSpec,
}

/// Builds the pair `(J+, J-)` around a unit-Gaussian base: the target is
/// the contention arm at `z_T` least pulled by `policy` on average over
/// `pilot_seeds` pilot runs (ties to the lowest index), anchored at the
/// lowest contention group holding it with another arm.
pub fn theorem4_adversary(
    base: &Instance,
    policy: Policy,
    config: &AlgoConfig,
    pilot_seeds: usize,
    seed: u64,
) -> Result<Adversary> {
    if !base.is_unit_gaussian() {
        return Err(Error::InvalidArgument("base instance must be unit-variance Gaussian".into()));
    }
    if pilot_seeds == 0 {
        return Err(Error::InvalidArgument("need at least one pilot run".into()));
    }
    let zt = z_t(base, config.horizon)?;
    let contention = contention_star(base, zt.z);
    if contention.is_empty() {
        return Err(Error::InvalidArgument(format!("contention set at z_T = {} is empty", zt.z)));
    }
    let na = base.num_arms();
    let counts = (0..pilot_seeds as u64)
        .into_par_iter()
        .map(|trial| -> Result<Vec<u64>> {
            let mut env = stream_rng(seed, trial, None, StreamKind::Environment);
            let mut pol = stream_rng(seed, trial, Some(policy), StreamKind::Policy);
            let traj = run_with(policy, base, config, &mut env, &mut pol, |_, _| {})?;
            let mut c = vec![0u64; na];
            for t in 0..traj.rounds() {
                for g in 0..base.num_groups() {
                    c[traj.action(t, g)] += 1;
                }
            }
            Ok(c)
        })
        .collect::<Result<Vec<_>>>()?;
    let pilot_pulls: Vec<f64> = (0..na)
        .map(|a| counts.iter().map(|c| c[a] as f64).sum::<f64>() / pilot_seeds as f64)
        .collect();

    let st = base.structure();
    let anchor_of = |a: usize| {
        st.groups_of(a).iter().find(|&g| {
            st.arm_set(g).len() >= 2
                && gap_within(base.gap_min(g), zt.z)
                && gap_within(base.gap(g, a), zt.z)
        })
    };
    let mut best: Option<(usize, usize)> = None;
    for a in contention.iter() {
        if let Some(g) = anchor_of(a) {
            if best.is_none_or(|(b, _)| pilot_pulls[a] < pilot_pulls[b]) {
                best = Some((a, g));
            }
        }
    }
    let (a0, g0) = best.ok_or_else(|| {
        Error::InvalidArgument("no contention arm shares a qualifying group with another arm".into())
    })?;
    let (plus, spec_plus) = perturb_second_best(base, a0, g0, zt.z, PerturbSign::Plus)?;
    let (minus, spec_minus) = perturb_second_best(base, a0, g0, zt.z, PerturbSign::Minus)?;
    Ok(Adversary {
        z_t: zt,
        contention,
        pilot_pulls,
        plus,
        minus,
        spec_plus,
        spec_minus,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::all_shared as closed;

    fn gaussian(st: GroupStructure, means: &[f64]) -> Instance {
        build_instance(st, means.iter().map(|&m| RewardModel::unit_gaussian(m)).collect()).unwrap()
    }

    #[test]
    fn z_t_closed_form() {
        let st = GroupStructure::all_shared(3, 4).unwrap();
        let inst = gaussian(st, &[0.5; 4]);
        let r = z_t(&inst, 500).unwrap();
        assert!((r.z / closed::eps_t(3, 4, 500.0) - 1.0).abs() < 1e-7);
        assert_eq!(r.z, r.eps_t);
    }

    #[test]
    fn perturb_examples() {
        let st = GroupStructure::all_shared(1, 2).unwrap();
        let inst = gaussian(st.clone(), &[0.5, 0.5]);
        let (p, spec) = perturb_second_best(&inst, 0, 0, 0.1, PerturbSign::Plus).unwrap();
        assert!((p.mean(0) - 0.6).abs() < 1e-15);
        assert_eq!(spec.anchor, 0.5);
        let (m, _) = perturb_second_best(&inst, 0, 0, 0.1, PerturbSign::Minus).unwrap();
        assert!((m.mean(0) - 0.4).abs() < 1e-15);
        assert_eq!(p.mean(1), 0.5);

        let bern = build_instance(st, vec![RewardModel::bernoulli(0.7), RewardModel::bernoulli(0.75)]).unwrap();
        assert!(perturb_second_best(&bern, 0, 0, 0.5, PerturbSign::Plus).is_err());
        let (c, spec) = perturb_second_best_clamped(&bern, 0, 0, 0.5, PerturbSign::Plus).unwrap();
        assert_eq!(spec.magnitude, 0.25);
        assert_eq!(c.mean(0), 1.0);
    }

    #[test]
    fn minimax_examples() {
        let st = GroupStructure::all_shared(2, 3).unwrap();
        let inst = minimax_family(&st, st.all_arms(), st.all_groups(), ModelClass::Gaussian).unwrap();
        assert!(inst.means().iter().all(|&m| m == 0.5));
        let d = GroupStructure::disjoint(&[2, 3]).unwrap();
        let s = d.arm_set(1);
        let inst = minimax_family(&d, s, GroupSet::singleton(1), ModelClass::Bernoulli).unwrap();
        assert_eq!(inst.means(), &[1.0, 1.0, 0.5, 0.5, 0.5]);
        assert!(minimax_family(&d, s, GroupSet::singleton(0), ModelClass::Gaussian).is_err());
    }

    #[test]
    fn adversary_pair_differs_at_one_arm() {
        let st = GroupStructure::from_lists(3, &[vec![0, 1], vec![1, 2]]).unwrap();
        let base = gaussian(st, &[0.5, 0.45, 0.0]);
        let cfg = AlgoConfig::new(base.structure(), 200, 0.001).unwrap();
        let adv = theorem4_adversary(&base, Policy::PooledUcb, &cfg, 3, 9).unwrap();
        let a0 = adv.spec_plus.target_arm;
        assert!(adv.contention.contains(a0));
        for a in 0..3 {
            if a != a0 {
                assert_eq!(adv.plus.mean(a), base.mean(a));
                assert_eq!(adv.minus.mean(a), base.mean(a));
            }
        }
        let mid = 0.5 * (adv.plus.mean(a0) + adv.minus.mean(a0));
        assert!((mid - adv.spec_plus.anchor).abs() < 1e-12);
    }
}
