//! Adaptive Simpson quadrature for a pair of integrands sharing evaluations.

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadTolerance {
    pub rel: f64,
    pub abs: f64,
    pub max_depth: u32,
}

impl Default for QuadTolerance {
    fn default() -> Self {
        QuadTolerance {
            rel: 1e-8,
            abs: 1e-12,
            max_depth: 50,
        }
    }
}

type Pair = (f64, f64);

fn simpson(h: f64, fa: Pair, fm: Pair, fb: Pair) -> Pair {
    (h / 6.0 * (fa.0 + 4.0 * fm.0 + fb.0), h / 6.0 * (fa.1 + 4.0 * fm.1 + fb.1))
}

fn close(coarse: f64, fine: f64, tol: &QuadTolerance) -> bool {
    (fine - coarse).abs() <= 15.0 * (tol.rel * fine.abs()).max(tol.abs)
}

/// Integrates both components of `f` over `[a, b]`.
///
/// The refined Simpson sum is returned without the Richardson correction,
/// so every node keeps a positive weight and pointwise inequalities between
/// the two integrands carry over to the integrals.
pub fn integrate_pair<F>(f: &F, a: f64, b: f64, tol: &QuadTolerance) -> Result<Pair>
where
    F: Fn(f64) -> Result<Pair>,
{
    if a == b {
        return Ok((0.0, 0.0));
    }
    let (fa, fb) = (f(a)?, f(b)?);
    let m = 0.5 * (a + b);
    let fm = f(m)?;
    let whole = simpson(b - a, fa, fm, fb);
    recurse(f, a, b, fa, fm, fb, whole, tol, 0)
}

#[allow(clippy::too_many_arguments)]
fn recurse<F>(f: &F, a: f64, b: f64, fa: Pair, fm: Pair, fb: Pair, whole: Pair, tol: &QuadTolerance, depth: u32) -> Result<Pair>
where
    F: Fn(f64) -> Result<Pair>,
{
    let m = 0.5 * (a + b);
    let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
    let (flm, frm) = (f(lm)?, f(rm)?);
    let left = simpson(m - a, fa, flm, fm);
    let right = simpson(b - m, fm, frm, fb);
    let fine = (left.0 + right.0, left.1 + right.1);
    if close(whole.0, fine.0, tol) && close(whole.1, fine.1, tol) {
        return Ok(fine);
    }
    if depth >= tol.max_depth {
        return Err(Error::NonConvergence(format!(
            "adaptive quadrature did not converge on [{a:e}, {b:e}]"
        )));
    }
    let l = recurse(f, a, m, fa, flm, fm, left, tol, depth + 1)?;
    let r = recurse(f, m, b, fm, frm, fb, right, tol, depth + 1)?;
    Ok((l.0 + r.0, l.1 + r.1))
}
