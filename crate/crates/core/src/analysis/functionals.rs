//! Instance-dependent functionals: the contention set, the shared
//! exploration rate `M(eps)`, the horizon integrals `T` and `R`, and the
//! scales derived from them.

use std::collections::HashMap;
use std::sync::Mutex;

use serde::{Deserialize, Serialize};

use crate::bitset::ArmSet;
use crate::error::{Error, Result};
use crate::instance::Instance;
use crate::lp::{solve_lp, LpProblem, LpStatus, Sense};

use super::quadrature::{integrate_pair, QuadTolerance};

/// Slack used when comparing a gap against `eps`, so that gaps computed as
/// differences of decimal means land on the intended side.
pub const GAP_TOL: f64 = 1e-12;

/// Smallest argument on the integration and scan grids.
pub const Z_FLOOR: f64 = 1e-12;

const GRID_PER_DECADE: usize = 8;

/// `gap <= eps` up to [`GAP_TOL`].
pub fn gap_within(gap: f64, eps: f64) -> bool {
    gap <= eps + GAP_TOL * eps.max(1.0)
}

/// Arms in `eps`-contention: the near-optimal arms of every group whose
/// best-vs-second gap is at most `eps`.
pub fn contention_star(instance: &Instance, eps: f64) -> ArmSet {
    let st = instance.structure();
    let mut out = ArmSet::EMPTY;
    for g in 0..st.num_groups() {
        if gap_within(instance.gap_min(g), eps) {
            for a in st.arm_set(g).iter() {
                if gap_within(instance.gap(g, a), eps) {
                    out.insert(a);
                }
            }
        }
    }
    out
}

/// The linear program for `M(eps)` restricted to the arms in `cstar`, with
/// the variable layout `(group, arm)` pairs followed by `M`.
///
/// Variables are scaled by `eps` (`y = eps x`, `M' = eps M`) so that the
/// optimum is at most `|G|` whatever `eps` is; the program's value is
/// `eps M(eps)`.
pub fn m_lp(instance: &Instance, eps: f64, cstar: ArmSet) -> (LpProblem, Vec<(usize, usize)>) {
    let st = instance.structure();
    let mut vars = Vec::new();
    for g in 0..st.num_groups() {
        for a in st.arm_set(g).intersection(cstar).iter() {
            vars.push((g, a));
        }
    }
    let n = vars.len() + 1;
    let mut obj = vec![0.0; n];
    obj[n - 1] = 1.0;
    let mut p = LpProblem::maximize(obj);
    for g in 0..st.num_groups() {
        let mut row = vec![0.0; n];
        let mut any = false;
        for (j, &(h, a)) in vars.iter().enumerate() {
            if h == g {
                row[j] = instance.gap(g, a).max(eps) / eps;
                any = true;
            }
        }
        if any {
            p.add_constraint(row, Sense::Le, 1.0);
        }
    }
    for a in cstar.iter() {
        let mut row = vec![0.0; n];
        for (j, &(_, b)) in vars.iter().enumerate() {
            if b == a {
                row[j] = 1.0;
            }
        }
        row[n - 1] = -1.0;
        p.add_constraint(row, Sense::Ge, 0.0);
    }
    (p, vars)
}

/// `M(eps)` with the contention set supplied by the caller; `+inf` when it
/// is empty.
pub fn m_eps_with(instance: &Instance, eps: f64, cstar: ArmSet) -> Result<f64> {
    if !(eps > 0.0 && eps.is_finite()) {
        return Err(Error::InvalidArgument(format!("eps must be positive, got {eps}")));
    }
    if cstar.is_empty() {
        return Ok(f64::INFINITY);
    }
    let (p, _) = m_lp(instance, eps, cstar);
    let sol = solve_lp(&p)?;
    match sol.status {
        LpStatus::Optimal => Ok(sol.value / eps),
        LpStatus::Unbounded => Ok(f64::INFINITY),
        LpStatus::Infeasible => Err(Error::Internal("M program reported infeasible".into())),
    }
}

pub fn m_eps(instance: &Instance, eps: f64) -> Result<f64> {
    m_eps_with(instance, eps, contention_star(instance, eps))
}

/// Positive gaps of the instance, sorted and deduplicated.
fn positive_gaps(instance: &Instance) -> Vec<f64> {
    instance.gap_values().into_iter().filter(|&d| d > 0.0).collect()
}

/// Result of a Condition 1 style check.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConditionReport {
    pub holds: bool,
    /// First violating pair `(z1, z2, M(z1), M(z2))`, if any.
    pub violation: Option<(f64, f64, f64, f64)>,
}

/// Evaluators for `M`, `T` and `R` of one instance at one noise scale.
pub struct Functionals {
    instance: Instance,
    sigma: f64,
    tol: QuadTolerance,
    /// Kinks of `z -> M(sigma z)` inside `(0, 1)`, ascending.
    breakpoints: Vec<f64>,
    /// Descending from 1 to `Z_FLOOR`; pieces are `[anchors[i+1], anchors[i]]`.
    anchors: Vec<f64>,
    pieces: Mutex<HashMap<usize, (f64, f64)>>,
}

impl std::fmt::Debug for Functionals {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Functionals")
            .field("sigma", &self.sigma)
            .field("breakpoints", &self.breakpoints)
            .finish_non_exhaustive()
    }
}

pub fn t_r_functionals(instance: &Instance, sigma: f64) -> Result<Functionals> {
    Functionals::new(instance, sigma, QuadTolerance::default())
}

impl Functionals {
    pub fn new(instance: &Instance, sigma: f64, tol: QuadTolerance) -> Result<Self> {
        if !(sigma > 0.0 && sigma.is_finite()) {
            return Err(Error::InvalidArgument(format!("sigma must be positive, got {sigma}")));
        }
        let breakpoints: Vec<f64> = positive_gaps(instance)
            .into_iter()
            .map(|d| d / sigma)
            .filter(|&z| z > Z_FLOOR && z < 1.0)
            .collect();
        let mut anchors = vec![1.0, Z_FLOOR];
        anchors.extend(breakpoints.iter().copied());
        let decades = (-Z_FLOOR.log10()).round() as i32;
        for k in 1..(decades * GRID_PER_DECADE as i32) {
            anchors.push(10f64.powf(-(k as f64) / GRID_PER_DECADE as f64));
        }
        anchors.sort_by(|a, b| b.total_cmp(a));
        anchors.dedup_by(|a, b| (*a - *b).abs() <= 1e-14 * b.abs());
        Ok(Functionals {
            instance: instance.clone(),
            sigma,
            tol,
            breakpoints,
            anchors,
            pieces: Mutex::new(HashMap::new()),
        })
    }

    pub fn instance(&self) -> &Instance {
        &self.instance
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    /// Sorted kinks of `z -> M(sigma z)` in `(0, 1)`.
    pub fn breakpoints(&self) -> &[f64] {
        &self.breakpoints
    }

    /// `M(eps)` of the underlying instance.
    pub fn m(&self, eps: f64) -> Result<f64> {
        m_eps(&self.instance, eps)
    }

    /// Integrals of `sigma / (M z^4)` and `sigma^2 / (M z^3)` over `[lo, hi]`,
    /// which must not straddle a breakpoint.
    fn piece(&self, lo: f64, hi: f64) -> Result<(f64, f64)> {
        let s = self.sigma;
        let cstar = contention_star(&self.instance, s * 0.5 * (lo + hi));
        if cstar.is_empty() {
            return Ok((0.0, 0.0));
        }
        let f = |z: f64| -> Result<(f64, f64)> {
            let m = m_eps_with(&self.instance, s * z, cstar)?;
            if m.is_infinite() {
                return Ok((0.0, 0.0));
            }
            let z3 = z * z * z;
            Ok((s / (m * z3 * z), s * s / (m * z3)))
        };
        integrate_pair(&f, lo, hi, &self.tol)
    }

    fn cached_piece(&self, i: usize) -> Result<(f64, f64)> {
        if let Some(&v) = self.pieces.lock().expect("piece cache poisoned").get(&i) {
            return Ok(v);
        }
        let v = self.piece(self.anchors[i + 1], self.anchors[i])?;
        self.pieces.lock().expect("piece cache poisoned").insert(i, v);
        Ok(v)
    }

    /// `(T(eps), R(eps))`.
    pub fn t_and_r(&self, eps: f64) -> Result<(f64, f64)> {
        if !(eps > 0.0 && eps <= 1.0) {
            return Err(Error::InvalidArgument(format!("eps must lie in (0, 1], got {eps}")));
        }
        let (mut t, mut r) = (0.0, 0.0);
        let mut i = 0;
        while i + 1 < self.anchors.len() && self.anchors[i + 1] >= eps {
            let (a, b) = self.cached_piece(i)?;
            t += a;
            r += b;
            i += 1;
        }
        if self.anchors[i] > eps {
            let (a, b) = self.piece(eps, self.anchors[i])?;
            t += a;
            r += b;
        }
        Ok((t, r))
    }

    pub fn t(&self, eps: f64) -> Result<f64> {
        Ok(self.t_and_r(eps)?.0)
    }

    pub fn r(&self, eps: f64) -> Result<f64> {
        Ok(self.t_and_r(eps)?.1)
    }

    /// `(eps, M, T, R)` rows on a geometric grid of `n >= 2` points from
    /// `lo` to 1.
    pub fn on_grid(&self, lo: f64, n: usize) -> Result<Vec<(f64, f64, f64, f64)>> {
        geometric_grid(lo, n)?
            .into_iter()
            .map(|z| {
                let (t, r) = self.t_and_r(z)?;
                Ok((z, self.m(self.sigma * z)?, t, r))
            })
            .collect()
    }

    /// Smallest `eps` with `T(eps) <= target`, to relative width 1e-8.
    ///
    /// When `T` stays below `target` all the way down to [`Z_FLOOR`] (the
    /// contention set is empty for small `eps`, so `T` saturates) the
    /// result is 0.
    pub fn eps_t(&self, target: f64) -> Result<f64> {
        if !(target > 0.0 && target.is_finite()) {
            return Err(Error::InvalidArgument(format!("target must be positive, got {target}")));
        }
        if self.t(Z_FLOOR)? <= target {
            return Ok(0.0);
        }
        // T(lo) > target >= T(hi)
        let (mut lo, mut hi) = (Z_FLOOR, 1.0f64);
        for _ in 0..200 {
            if hi / lo - 1.0 <= 1e-8 {
                return Ok(hi);
            }
            let mid = (lo * hi).sqrt();
            if self.t(mid)? > target {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        Err(Error::NonConvergence("eps_T bisection".into()))
    }

    /// `min { z in (0,1] : M(z) z^3 T >= 1 }`, or 1 if no such `z`.
    ///
    /// Pieces of `(0, 1]` on which the contention set is empty (`M = inf`)
    /// are skipped; the scan starts from the first piece where `M` is finite.
    pub fn eps_star(&self, horizon: f64) -> Result<f64> {
        eps_star(&self.instance, horizon)
    }

    pub fn condition_check(&self, c1: f64, alpha: f64, grid: usize) -> Result<ConditionReport> {
        condition_check(&self.instance, c1, alpha, grid)
    }
}

fn geometric_grid(lo: f64, n: usize) -> Result<Vec<f64>> {
    if n < 2 || !(lo > 0.0 && lo < 1.0) {
        return Err(Error::InvalidArgument(format!("grid needs n >= 2 and lo in (0,1), got n = {n}, lo = {lo}")));
    }
    let step = lo.ln() / (n - 1) as f64;
    Ok((0..n)
        .map(|i| if i + 1 == n { 1.0 } else { (step * (n - 1 - i) as f64).exp() })
        .collect())
}

/// See [`Functionals::eps_star`].
pub fn eps_star(instance: &Instance, horizon: f64) -> Result<f64> {
    if !(horizon >= 1.0 && horizon.is_finite()) {
        return Err(Error::InvalidArgument(format!("horizon must be at least 1, got {horizon}")));
    }
    let mut edges = vec![Z_FLOOR];
    edges.extend(positive_gaps(instance).into_iter().filter(|&z| z > Z_FLOOR && z < 1.0));
    edges.push(1.0);
    for w in edges.windows(2) {
        let (lo, hi) = (w[0], w[1]);
        // The left edge belongs to this piece: C* is closed at a gap value.
        let cstar = contention_star(instance, lo);
        if cstar.is_empty() {
            continue;
        }
        let f = |z: f64| -> Result<f64> { Ok(m_eps_with(instance, z, cstar)? * z * z * z * horizon - 1.0) };
        const SAMPLES: usize = 64;
        let mut prev = lo;
        for k in 0..=SAMPLES {
            let z = if k == SAMPLES { hi } else { lo * (hi / lo).powf(k as f64 / SAMPLES as f64) };
            // hi itself belongs to the next piece unless it is 1.
            if k == SAMPLES && hi < 1.0 {
                let z_in = hi * (1.0 - 1e-12);
                if f(z_in)? >= 0.0 {
                    return bisect(&f, prev, z_in);
                }
                break;
            }
            if f(z)? >= 0.0 {
                return if k == 0 { Ok(z) } else { bisect(&f, prev, z) };
            }
            prev = z;
        }
    }
    Ok(1.0)
}

/// Smallest point with `f >= 0` in `(lo, hi]`, given `f(lo) < 0 <= f(hi)`.
fn bisect<F: Fn(f64) -> Result<f64>>(f: &F, mut lo: f64, mut hi: f64) -> Result<f64> {
    while hi / lo - 1.0 > 1e-13 {
        let mid = (lo * hi).sqrt();
        if mid <= lo || mid >= hi {
            break;
        }
        if f(mid)? >= 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(hi)
}

/// Checks `M(z1) <= c1 (z2/z1)^(2-alpha) M(z2)` for all `z1 <= z2` on a
/// geometric grid of `grid` points over `[1e-4, 1]`, every gap value in
/// `(0, 1)` and a point just left of each.
pub fn condition_check(instance: &Instance, c1: f64, alpha: f64, grid: usize) -> Result<ConditionReport> {
    if !(c1 >= 1.0) || !(alpha > 0.0 && alpha <= 2.0) || grid < 2 {
        return Err(Error::InvalidArgument(format!(
            "need c1 >= 1, alpha in (0, 2], grid >= 2; got {c1}, {alpha}, {grid}"
        )));
    }
    let mut zs = geometric_grid(1e-4, grid)?;
    for b in positive_gaps(instance).into_iter().filter(|&b| b < 1.0) {
        zs.push(b);
        zs.push(b * (1.0 - 1e-6));
    }
    zs.sort_by(|a, b| a.total_cmp(b));
    zs.dedup();
    let ms = zs.iter().map(|&z| m_eps(instance, z)).collect::<Result<Vec<_>>>()?;
    for i in 0..zs.len() {
        for j in i..zs.len() {
            let (m1, m2) = (ms[i], ms[j]);
            let ok = match (m1.is_infinite(), m2.is_infinite()) {
                (true, false) => false,
                (_, true) => true,
                (false, false) => {
                    let rhs = c1 * (zs[j] / zs[i]).powf(2.0 - alpha) * m2;
                    m1 <= rhs * (1.0 + 1e-9)
                }
            };
            if !ok {
                return Ok(ConditionReport {
                    holds: false,
                    violation: Some((zs[i], zs[j], m1, m2)),
                });
            }
        }
    }
    Ok(ConditionReport {
        holds: true,
        violation: None,
    })
}

/// Largest `R(eps_T(I); I)` over a supplied family, with the index of the
/// maximiser. The true supremum ranges over all instances, so this is only
/// a lower estimate of it.
pub fn r_t_max_lower_estimate(family: &[Instance], sigma: f64, horizon: f64) -> Result<(f64, usize)> {
    if family.is_empty() {
        return Err(Error::InvalidArgument("instance family is empty".into()));
    }
    let mut best = (f64::NEG_INFINITY, 0);
    for (i, inst) in family.iter().enumerate() {
        let f = t_r_functionals(inst, sigma)?;
        let e = f.eps_t(horizon)?;
        let r = if e > 0.0 { f.r(e)? } else { f.r(Z_FLOOR)? };
        if r > best.0 {
            best = (r, i);
        }
    }
    Ok(best)
}
