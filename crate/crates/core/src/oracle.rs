//! Brute-force reference implementations.
//!
//! Each function here recomputes something the main modules compute
//! cleverly, by the most direct method available. They are exponential and
//! intended for small inputs only: tests, the acceptance gate and the
//! `selftest` command compare the fast paths against them.

use crate::bitset::{ArmSet, GroupSet};
use crate::flow::Ratio;
use crate::lp::{LpProblem, Sense};
use crate::structure::GroupStructure;

/// Best objective over all basic feasible solutions, or `None` if no vertex
/// is feasible. Assumes the problem is bounded.
pub fn lp_by_vertex_enumeration(problem: &LpProblem) -> Option<f64> {
    let n = problem.num_vars();
    let m = problem.num_rows();
    // Hyperplanes: rows 0..m, then x_j = 0 for j in 0..n.
    let hyper = |k: usize| -> (Vec<f64>, f64) {
        if k < m {
            let (row, _, b) = problem.row(k);
            (row.to_vec(), b)
        } else {
            let mut e = vec![0.0; n];
            e[k - m] = 1.0;
            (e, 0.0)
        }
    };
    let equalities: Vec<usize> = (0..m).filter(|&i| problem.row(i).1 == Sense::Eq).collect();
    let optional: Vec<usize> = (0..m + n).filter(|k| !equalities.contains(k)).collect();
    if equalities.len() > n {
        return None;
    }
    let need = n - equalities.len();
    let mut best: Option<f64> = None;
    let mut chosen = Vec::with_capacity(need);
    combinations(&optional, need, 0, &mut chosen, &mut |pick| {
        let mut rows = Vec::with_capacity(n);
        let mut rhs = Vec::with_capacity(n);
        for &k in equalities.iter().chain(pick.iter()) {
            let (r, b) = hyper(k);
            rows.push(r);
            rhs.push(b);
        }
        if let Some(x) = solve_square(rows, rhs) {
            let scale = x.iter().fold(1.0f64, |s, v| s.max(v.abs()));
            if problem.primal_residual(&x) <= 1e-9 * scale {
                let v = problem.objective_value(&x);
                best = Some(best.map_or(v, |b: f64| b.max(v)));
            }
        }
    });
    best
}

fn combinations(
    pool: &[usize],
    k: usize,
    start: usize,
    chosen: &mut Vec<usize>,
    visit: &mut dyn FnMut(&[usize]),
) {
    if chosen.len() == k {
        visit(chosen);
        return;
    }
    for i in start..pool.len() {
        if pool.len() - i < k - chosen.len() {
            break;
        }
        chosen.push(pool[i]);
        combinations(pool, k, i + 1, chosen, visit);
        chosen.pop();
    }
}

/// Gaussian elimination with partial pivoting; `None` when singular.
fn solve_square(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Option<Vec<f64>> {
    let n = b.len();
    for col in 0..n {
        let piv = (col..n).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))?;
        if a[piv][col].abs() < 1e-12 {
            return None;
        }
        a.swap(col, piv);
        b.swap(col, piv);
        for r in col + 1..n {
            let f = a[r][col] / a[col][col];
            if f != 0.0 {
                for c in col..n {
                    a[r][c] -= f * a[col][c];
                }
                b[r] -= f * b[col];
            }
        }
    }
    let mut x = vec![0.0; n];
    for r in (0..n).rev() {
        let s: f64 = (r + 1..n).map(|c| a[r][c] * x[c]).sum();
        x[r] = (b[r] - s) / a[r][r];
    }
    Some(x)
}

/// Every nonempty group subset as a [`GroupSet`]; `2^|G|` of them.
fn group_subsets(structure: &GroupStructure) -> impl Iterator<Item = GroupSet> {
    structure.all_groups().nonempty_subsets()
}

/// `max over nonempty G' of |{a : groups_of(a) ⊆ G'}| / |G'|`.
pub fn t0_by_enumeration(structure: &GroupStructure) -> Ratio {
    let mut best = (0u64, 1u64);
    for sub in group_subsets(structure) {
        let trapped = (0..structure.num_arms())
            .filter(|&a| structure.groups_of(a).is_subset(sub))
            .count() as u64;
        let size = sub.len() as u64;
        if trapped * best.1 > best.0 * size {
            best = (trapped, size);
        }
    }
    Ratio::new(best.0, best.1)
}

/// Minimum number of groups whose arms cover `s`, by trying all group
/// subsets.
pub fn min_cover_exhaustive(structure: &GroupStructure, s: ArmSet) -> usize {
    group_subsets(structure)
        .filter(|sub| s.is_subset(structure.cover(*sub)))
        .map(|sub| sub.len())
        .min()
        .unwrap_or(0)
}

/// Numerator of `H2+(S)`: over all covers `G'` of `S`, the fewest groups
/// that touch `S` and sit entirely inside `Cov(G')`.
pub fn h2_plus_count_exhaustive(structure: &GroupStructure, s: ArmSet) -> usize {
    let touching = structure.touching(s);
    group_subsets(structure)
        .filter_map(|sub| {
            let cov = structure.cover(sub);
            s.is_subset(cov).then(|| {
                touching
                    .iter()
                    .filter(|&g| structure.arm_set(g).is_subset(cov))
                    .count()
            })
        })
        .min()
        .unwrap_or(0)
}

/// Minimum `s`-`t` cut capacity over all vertex bipartitions.
pub fn min_cut_enumeration(num_nodes: usize, edges: &[(usize, usize, i64)], s: usize, t: usize) -> i64 {
    let others: Vec<usize> = (0..num_nodes).filter(|&v| v != s && v != t).collect();
    assert!(others.len() < 31, "cut enumeration is exponential");
    let mut best = i64::MAX;
    for mask in 0u32..(1u32 << others.len()) {
        let mut side = vec![false; num_nodes];
        side[s] = true;
        for (k, &v) in others.iter().enumerate() {
            side[v] = mask >> k & 1 == 1;
        }
        let cut: i64 = edges
            .iter()
            .filter(|&&(u, v, _)| side[u] && !side[v])
            .map(|&(_, _, c)| c)
            .sum();
        best = best.min(cut);
    }
    best
}

/// Closed forms for `|G|` groups sharing all `|A|` arms with equal means
/// (every gap zero) and unit noise.
pub mod all_shared {
    /// `M(eps) = |G| / (eps |A|)`.
    pub fn m(groups: usize, arms: usize, eps: f64) -> f64 {
        groups as f64 / (eps * arms as f64)
    }

    /// `T(eps) = (|A| / 2|G|) (eps^-2 - 1)`.
    pub fn t(groups: usize, arms: usize, eps: f64) -> f64 {
        arms as f64 / (2.0 * groups as f64) * (eps.powi(-2) - 1.0)
    }

    /// `R(eps) = (|A| / |G|) (1/eps - 1)`.
    pub fn r(groups: usize, arms: usize, eps: f64) -> f64 {
        arms as f64 / groups as f64 * (1.0 / eps - 1.0)
    }

    /// Solution of `T(eps) = horizon`.
    pub fn eps_t(groups: usize, arms: usize, horizon: f64) -> f64 {
        (1.0 + 2.0 * groups as f64 * horizon / arms as f64).powf(-0.5)
    }

    /// Smallest `z` with `M(z) z^3 T >= 1`, capped at 1.
    pub fn eps_star(groups: usize, arms: usize, horizon: f64) -> f64 {
        (arms as f64 / (groups as f64 * horizon)).sqrt().min(1.0)
    }
}
