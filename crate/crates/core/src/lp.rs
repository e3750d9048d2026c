//! Dense two-phase simplex with Bland's anti-cycling rule.
//!
//! Problems are `max c·x` subject to rows `a_i·x {<=, >=, =} b_i` and
//! `x >= 0`. Every `Optimal` answer is certified before it is returned:
//! the primal point is re-checked against the original rows and the dual
//! recovered from the final tableau must close the duality gap. A failed
//! certificate surfaces as [`Error::LpBreakdown`] instead of a wrong answer.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Sense {
    Le,
    Ge,
    Eq,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LpProblem {
    objective: Vec<f64>,
    rows: Vec<Vec<f64>>,
    senses: Vec<Sense>,
    rhs: Vec<f64>,
}

impl LpProblem {
    /// A maximisation problem over `objective.len()` nonnegative variables.
    pub fn maximize(objective: Vec<f64>) -> Self {
        LpProblem {
            objective,
            rows: Vec::new(),
            senses: Vec::new(),
            rhs: Vec::new(),
        }
    }

    pub fn add_constraint(&mut self, coeffs: Vec<f64>, sense: Sense, rhs: f64) -> &mut Self {
        self.rows.push(coeffs);
        self.senses.push(sense);
        self.rhs.push(rhs);
        self
    }

    pub fn num_vars(&self) -> usize {
        self.objective.len()
    }

    pub fn num_rows(&self) -> usize {
        self.rows.len()
    }

    pub fn objective(&self) -> &[f64] {
        &self.objective
    }

    pub fn row(&self, i: usize) -> (&[f64], Sense, f64) {
        (&self.rows[i], self.senses[i], self.rhs[i])
    }

    fn validate(&self) -> Result<()> {
        let n = self.objective.len();
        if self.objective.iter().any(|v| !v.is_finite()) {
            return Err(Error::LpDimension("objective has non-finite entries".into()));
        }
        for (i, row) in self.rows.iter().enumerate() {
            if row.len() != n {
                return Err(Error::LpDimension(format!(
                    "row {i} has {} coefficients, expected {n}",
                    row.len()
                )));
            }
            if row.iter().any(|v| !v.is_finite()) || !self.rhs[i].is_finite() {
                return Err(Error::LpDimension(format!("row {i} has non-finite entries")));
            }
        }
        Ok(())
    }

    /// Largest violation of the rows and of `x >= 0` at `x`.
    pub fn primal_residual(&self, x: &[f64]) -> f64 {
        let mut worst = x.iter().fold(0.0f64, |w, &v| w.max(-v));
        for (i, row) in self.rows.iter().enumerate() {
            let lhs: f64 = row.iter().zip(x).map(|(a, v)| a * v).sum();
            let viol = match self.senses[i] {
                Sense::Le => lhs - self.rhs[i],
                Sense::Ge => self.rhs[i] - lhs,
                Sense::Eq => (lhs - self.rhs[i]).abs(),
            };
            worst = worst.max(viol);
        }
        worst
    }

    pub fn objective_value(&self, x: &[f64]) -> f64 {
        self.objective.iter().zip(x).map(|(c, v)| c * v).sum()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum LpStatus {
    Optimal,
    Unbounded,
    Infeasible,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LpSolution {
    pub status: LpStatus,
    /// Primal point; the last visited vertex when unbounded, empty when infeasible.
    pub primal: Vec<f64>,
    /// One multiplier per row (`>= 0` for `<=`, `<= 0` for `>=`, free for `=`);
    /// empty unless optimal.
    pub dual: Vec<f64>,
    /// `c·x`; `+inf` when unbounded, `-inf` when infeasible.
    pub value: f64,
    /// `b·y` for the certified dual; equals `value` within tolerance.
    pub dual_value: f64,
    pub pivots: usize,
}

impl LpSolution {
    pub fn duality_gap(&self) -> f64 {
        (self.value - self.dual_value).abs()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerances {
    /// Absolute primal feasibility slack.
    pub feas: f64,
    /// Relative duality gap, scaled by `max(1, |c·x|)`.
    pub gap: f64,
    /// Smallest admissible pivot magnitude.
    pub pivot: f64,
    pub max_pivots: usize,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            feas: 1e-9,
            gap: 1e-8,
            pivot: 1e-10,
            max_pivots: 200_000,
        }
    }
}

pub fn solve_lp(problem: &LpProblem) -> Result<LpSolution> {
    solve_lp_with(problem, &Tolerances::default())
}

pub fn solve_lp_with(problem: &LpProblem, tol: &Tolerances) -> Result<LpSolution> {
    problem.validate()?;
    let mut tab = Tableau::build(problem);

    if tab.num_artificial > 0 {
        let mut cost = vec![0.0; tab.ncols];
        for c in cost.iter_mut().skip(tab.first_artificial) {
            *c = -1.0;
        }
        tab.set_objective(&cost);
        match tab.run(tol, true)? {
            Phase::Optimal => {}
            Phase::Unbounded => {
                return Err(Error::LpBreakdown("phase one reported unbounded".into()));
            }
        }
        let scale = problem.rhs.iter().fold(1.0f64, |m, b| m.max(b.abs()));
        if tab.current_value() < -tol.feas * scale {
            return Ok(LpSolution {
                status: LpStatus::Infeasible,
                primal: Vec::new(),
                dual: Vec::new(),
                value: f64::NEG_INFINITY,
                dual_value: f64::NEG_INFINITY,
                pivots: tab.pivots,
            });
        }
        tab.drive_out_artificials(tol);
    }

    let mut cost = vec![0.0; tab.ncols];
    cost[..tab.n].copy_from_slice(&problem.objective);
    tab.set_objective(&cost);
    let phase = tab.run(tol, false)?;
    let primal = tab.primal();
    if phase == Phase::Unbounded {
        return Ok(LpSolution {
            status: LpStatus::Unbounded,
            primal,
            dual: Vec::new(),
            value: f64::INFINITY,
            dual_value: f64::INFINITY,
            pivots: tab.pivots,
        });
    }

    let dual = tab.dual(&cost);
    let value = problem.objective_value(&primal);
    let dual_value: f64 = problem.rhs.iter().zip(&dual).map(|(b, y)| b * y).sum();
    certify(problem, &primal, &dual, value, dual_value, tol)?;
    Ok(LpSolution {
        status: LpStatus::Optimal,
        primal,
        dual,
        value,
        dual_value,
        pivots: tab.pivots,
    })
}

fn certify(
    problem: &LpProblem,
    x: &[f64],
    y: &[f64],
    value: f64,
    dual_value: f64,
    tol: &Tolerances,
) -> Result<()> {
    let residual = problem.primal_residual(x);
    if residual > tol.feas {
        return Err(Error::LpBreakdown(format!(
            "primal residual {residual:e} exceeds {:e}",
            tol.feas
        )));
    }
    let scale = value.abs().max(1.0);
    let gap = (value - dual_value).abs();
    if gap > tol.gap * scale {
        return Err(Error::LpBreakdown(format!(
            "duality gap {gap:e} exceeds {:e}",
            tol.gap * scale
        )));
    }
    // Dual feasibility: sign conditions and A^T y >= c.
    let dual_tol = 1e-7 * scale;
    for (i, &yi) in y.iter().enumerate() {
        let bad = match problem.senses[i] {
            Sense::Le => yi < -dual_tol,
            Sense::Ge => yi > dual_tol,
            Sense::Eq => false,
        };
        if bad {
            return Err(Error::LpBreakdown(format!("dual multiplier {i} has the wrong sign ({yi:e})")));
        }
    }
    for j in 0..problem.num_vars() {
        let aty: f64 = problem.rows.iter().zip(y).map(|(r, yi)| r[j] * yi).sum();
        if aty < problem.objective[j] - dual_tol {
            return Err(Error::LpBreakdown(format!(
                "dual infeasible in column {j}: {aty:e} < {:e}",
                problem.objective[j]
            )));
        }
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Phase {
    Optimal,
    Unbounded,
}

struct Tableau {
    m: usize,
    n: usize,
    ncols: usize,
    first_artificial: usize,
    num_artificial: usize,
    // m rows of width ncols + 1; the last entry of each row is the rhs.
    a: Vec<f64>,
    // Reduced costs followed by minus the current objective value.
    d: Vec<f64>,
    basis: Vec<usize>,
    // Column holding e_i in the starting basis; B^{-1} e_i lives there.
    identity_col: Vec<usize>,
    flipped: Vec<bool>,
    pivots: usize,
}

impl Tableau {
    fn build(p: &LpProblem) -> Self {
        let m = p.rows.len();
        let n = p.objective.len();
        // Normalise to b >= 0. A `>= 0` row is flipped to `<= 0` so it gets a
        // slack instead of an artificial.
        let mut flipped = vec![false; m];
        let mut senses = p.senses.clone();
        for i in 0..m {
            let b = p.rhs[i];
            let flip = b < 0.0 || (b == 0.0 && senses[i] == Sense::Ge);
            if flip {
                flipped[i] = true;
                senses[i] = match senses[i] {
                    Sense::Le => Sense::Ge,
                    Sense::Ge => Sense::Le,
                    Sense::Eq => Sense::Eq,
                };
            }
        }
        let num_slack = senses.iter().filter(|s| **s != Sense::Eq).count();
        let num_artificial = senses.iter().filter(|s| **s != Sense::Le).count();
        let first_slack = n;
        let first_artificial = n + num_slack;
        let ncols = first_artificial + num_artificial;
        let width = ncols + 1;
        let mut a = vec![0.0; m * width];
        let mut basis = vec![0; m];
        let mut identity_col = vec![0; m];
        let (mut next_slack, mut next_art) = (first_slack, first_artificial);
        for i in 0..m {
            let sign = if flipped[i] { -1.0 } else { 1.0 };
            let row = &mut a[i * width..(i + 1) * width];
            for j in 0..n {
                row[j] = sign * p.rows[i][j];
            }
            row[ncols] = sign * p.rhs[i];
            if row[ncols] == 0.0 {
                row[ncols] = 0.0; // normalise -0.0
            }
            match senses[i] {
                Sense::Le => {
                    row[next_slack] = 1.0;
                    basis[i] = next_slack;
                    identity_col[i] = next_slack;
                    next_slack += 1;
                }
                Sense::Ge => {
                    row[next_slack] = -1.0;
                    next_slack += 1;
                    row[next_art] = 1.0;
                    basis[i] = next_art;
                    identity_col[i] = next_art;
                    next_art += 1;
                }
                Sense::Eq => {
                    row[next_art] = 1.0;
                    basis[i] = next_art;
                    identity_col[i] = next_art;
                    next_art += 1;
                }
            }
        }
        Tableau {
            m,
            n,
            ncols,
            first_artificial,
            num_artificial,
            a,
            d: vec![0.0; width],
            basis,
            identity_col,
            flipped,
            pivots: 0,
        }
    }

    #[inline]
    fn width(&self) -> usize {
        self.ncols + 1
    }

    #[inline]
    fn at(&self, i: usize, j: usize) -> f64 {
        self.a[i * self.width() + j]
    }

    fn set_objective(&mut self, cost: &[f64]) {
        let w = self.width();
        self.d[..self.ncols].copy_from_slice(cost);
        self.d[self.ncols] = 0.0;
        for i in 0..self.m {
            let cb = cost[self.basis[i]];
            if cb != 0.0 {
                let row = &self.a[i * w..(i + 1) * w];
                for (dj, aij) in self.d.iter_mut().zip(row) {
                    *dj -= cb * aij;
                }
            }
        }
    }

    fn current_value(&self) -> f64 {
        -self.d[self.ncols]
    }

    fn run(&mut self, tol: &Tolerances, phase_one: bool) -> Result<Phase> {
        let limit_col = if phase_one { self.ncols } else { self.first_artificial };
        loop {
            // Bland: lowest-index improving column.
            let entering = (0..limit_col).find(|&j| self.d[j] > tol.pivot);
            let Some(s) = entering else {
                return Ok(Phase::Optimal);
            };
            // Ratio test; ties go to the lowest basic variable index.
            let mut leave: Option<(usize, f64)> = None;
            for i in 0..self.m {
                let ais = self.at(i, s);
                if ais > tol.pivot {
                    let ratio = self.at(i, self.ncols) / ais;
                    leave = match leave {
                        None => Some((i, ratio)),
                        Some((bi, br)) => {
                            let slack = 1e-12 * (1.0 + br.abs());
                            if ratio < br - slack
                                || ((ratio - br).abs() <= slack && self.basis[i] < self.basis[bi])
                            {
                                Some((i, ratio))
                            } else {
                                Some((bi, br))
                            }
                        }
                    };
                }
            }
            let Some((r, _)) = leave else {
                return Ok(Phase::Unbounded);
            };
            self.pivot(r, s);
            if self.pivots > tol.max_pivots {
                return Err(Error::LpBreakdown(format!(
                    "pivot limit {} reached",
                    tol.max_pivots
                )));
            }
        }
    }

    fn pivot(&mut self, r: usize, s: usize) {
        let w = self.width();
        let piv = self.a[r * w + s];
        {
            let row = &mut self.a[r * w..(r + 1) * w];
            for v in row.iter_mut() {
                *v /= piv;
            }
            row[s] = 1.0;
        }
        let pivot_row: Vec<f64> = self.a[r * w..(r + 1) * w].to_vec();
        for i in 0..self.m {
            if i == r {
                continue;
            }
            let f = self.a[i * w + s];
            if f != 0.0 {
                let row = &mut self.a[i * w..(i + 1) * w];
                for (v, p) in row.iter_mut().zip(&pivot_row) {
                    *v -= f * p;
                }
                row[s] = 0.0;
            }
        }
        let f = self.d[s];
        if f != 0.0 {
            for (v, p) in self.d.iter_mut().zip(&pivot_row) {
                *v -= f * p;
            }
            self.d[s] = 0.0;
        }
        self.basis[r] = s;
        self.pivots += 1;
    }

    /// After phase one, swap zero-level artificials out of the basis where a
    /// structural or slack column can take their place. Rows where none can
    /// are redundant and keep their artificial at zero.
    fn drive_out_artificials(&mut self, tol: &Tolerances) {
        for i in 0..self.m {
            if self.basis[i] >= self.first_artificial {
                if let Some(j) = (0..self.first_artificial).find(|&j| self.at(i, j).abs() > tol.pivot) {
                    self.pivot(i, j);
                }
            }
        }
    }

    fn primal(&self) -> Vec<f64> {
        let mut x = vec![0.0; self.n];
        for i in 0..self.m {
            let j = self.basis[i];
            if j < self.n {
                // Clear round-off below zero.
                x[j] = self.at(i, self.ncols).max(0.0);
            }
        }
        x
    }

    fn dual(&self, cost: &[f64]) -> Vec<f64> {
        (0..self.m)
            .map(|i| {
                let col = self.identity_col[i];
                let y: f64 = (0..self.m).map(|k| cost[self.basis[k]] * self.at(k, col)).sum();
                if self.flipped[i] {
                    -y
                } else {
                    y
                }
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_bound() {
        let mut p = LpProblem::maximize(vec![1.0]);
        p.add_constraint(vec![1.0], Sense::Le, 3.0);
        let s = solve_lp(&p).unwrap();
        assert_eq!(s.status, LpStatus::Optimal);
        assert!((s.value - 3.0).abs() < 1e-12);
        assert!((s.dual[0] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn two_boxes() {
        let mut p = LpProblem::maximize(vec![1.0, 1.0]);
        p.add_constraint(vec![1.0, 0.0], Sense::Le, 1.0);
        p.add_constraint(vec![0.0, 1.0], Sense::Le, 2.0);
        let s = solve_lp(&p).unwrap();
        assert!((s.value - 3.0).abs() < 1e-12);
        assert!((s.primal[0] - 1.0).abs() < 1e-12 && (s.primal[1] - 2.0).abs() < 1e-12);
    }

    #[test]
    fn unbounded_when_no_constraint_binds() {
        let p = LpProblem::maximize(vec![1.0]);
        assert_eq!(solve_lp(&p).unwrap().status, LpStatus::Unbounded);
    }

    #[test]
    fn infeasible_detected() {
        let mut p = LpProblem::maximize(vec![1.0, 0.0]);
        p.add_constraint(vec![1.0, 1.0], Sense::Le, 1.0);
        p.add_constraint(vec![1.0, 1.0], Sense::Ge, 2.0);
        assert_eq!(solve_lp(&p).unwrap().status, LpStatus::Infeasible);
    }

    #[test]
    fn equality_and_ge_rows() {
        // max x + 2y  s.t. x + y = 4, x >= 1, y <= 2.5
        let mut p = LpProblem::maximize(vec![1.0, 2.0]);
        p.add_constraint(vec![1.0, 1.0], Sense::Eq, 4.0);
        p.add_constraint(vec![1.0, 0.0], Sense::Ge, 1.0);
        p.add_constraint(vec![0.0, 1.0], Sense::Le, 2.5);
        let s = solve_lp(&p).unwrap();
        assert!((s.value - 6.5).abs() < 1e-10, "{}", s.value);
        assert!(s.duality_gap() < 1e-10);
    }

    #[test]
    fn negative_rhs_and_redundant_equalities() {
        // -x <= -1 (x >= 1), x + y = 3 twice (redundant), max -x - y
        let mut p = LpProblem::maximize(vec![-1.0, -1.0]);
        p.add_constraint(vec![-1.0, 0.0], Sense::Le, -1.0);
        p.add_constraint(vec![1.0, 1.0], Sense::Eq, 3.0);
        p.add_constraint(vec![2.0, 2.0], Sense::Eq, 6.0);
        let s = solve_lp(&p).unwrap();
        assert_eq!(s.status, LpStatus::Optimal);
        assert!((s.value + 3.0).abs() < 1e-10);
    }

    #[test]
    fn dimension_mismatch_rejected() {
        let mut p = LpProblem::maximize(vec![1.0, 1.0]);
        p.add_constraint(vec![1.0], Sense::Le, 1.0);
        assert!(matches!(solve_lp(&p), Err(Error::LpDimension(_))));
        let mut p = LpProblem::maximize(vec![1.0]);
        p.add_constraint(vec![f64::NAN], Sense::Le, 1.0);
        assert!(matches!(solve_lp(&p), Err(Error::LpDimension(_))));
    }

    #[test]
    fn degenerate_cycling_example() {
        // Beale's classic cycling example (cycles under the textbook rule).
        let mut p = LpProblem::maximize(vec![0.75, -150.0, 0.02, -6.0]);
        p.add_constraint(vec![0.25, -60.0, -0.04, 9.0], Sense::Le, 0.0);
        p.add_constraint(vec![0.5, -90.0, -0.02, 3.0], Sense::Le, 0.0);
        p.add_constraint(vec![0.0, 0.0, 1.0, 0.0], Sense::Le, 1.0);
        let s = solve_lp(&p).unwrap();
        assert!((s.value - 0.05).abs() < 1e-10, "{}", s.value);
    }

    #[test]
    fn deterministic() {
        let mut p = LpProblem::maximize(vec![1.0, 1.0, 1.0]);
        p.add_constraint(vec![1.0, 1.0, 0.0], Sense::Le, 1.0);
        p.add_constraint(vec![0.0, 1.0, 1.0], Sense::Le, 1.0);
        p.add_constraint(vec![1.0, 0.0, 1.0], Sense::Le, 1.0);
        let a = solve_lp(&p).unwrap();
        let b = solve_lp(&p).unwrap();
        assert_eq!(a, b);
        assert!((a.value - 1.5).abs() < 1e-12);
    }
}
