//! Bracketed scalar root finding.

use crate::error::{Error, Result};

/// Finds a root of `f` in `[lo, hi]` by bisection followed by secant polish.
///
/// Requires a sign change over the bracket. Stops when the bracket is
/// narrower than `x_tol` or `|f| ≤ f_tol`.
pub fn bisect_secant<F: FnMut(f64) -> f64>(
    mut f: F,
    mut lo: f64,
    mut hi: f64,
    x_tol: f64,
    f_tol: f64,
    max_iter: usize,
) -> Result<f64> {
    let mut f_lo = f(lo);
    let f_hi = f(hi);
    if f_lo == 0.0 {
        return Ok(lo);
    }
    if f_hi == 0.0 {
        return Ok(hi);
    }
    if f_lo.signum() == f_hi.signum() {
        return Err(Error::NoConvergence { iterations: 0, lo, hi });
    }
    let mut f_hi = f_hi;
    for iter in 0..max_iter {
        // After a bisection warm-up, secant steps alternate with bisection so
        // the bracket keeps shrinking even when one end is stuck.
        let width = hi - lo;
        let mut x = 0.5 * (lo + hi);
        if iter >= 8 && iter % 2 == 0 {
            let s = hi - f_hi * width / (f_hi - f_lo);
            if s > lo && s < hi {
                x = s;
            }
        }
        let fx = f(x);
        if fx.abs() <= f_tol || width.abs() <= x_tol {
            return Ok(x);
        }
        if fx.signum() == f_lo.signum() {
            lo = x;
            f_lo = fx;
        } else {
            hi = x;
            f_hi = fx;
        }
    }
    Err(Error::NoConvergence { iterations: max_iter, lo, hi })
}
