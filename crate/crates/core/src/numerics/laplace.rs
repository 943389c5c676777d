//! Numerical inversion of Laplace transforms.
//!
//! The primary method is the fixed Talbot contour; an Euler-summed Bromwich
//! (Fourier series) scheme is provided as an independent cross-check. Both
//! shift the transform by its abscissa so the factor `e^{σt}` is applied
//! exactly.

use super::quad::QuadSpec;
use crate::error::{Error, Result};
use num_complex::Complex64;
use std::f64::consts::PI;

/// A Laplace-space function `f̂(s)`, analytic for `Re s > abscissa`.
pub struct LaplaceFn<F> {
    pub handle: F,
    pub abscissa: f64,
}

impl<F> LaplaceFn<F>
where
    F: Fn(Complex64) -> Result<Complex64>,
{
    pub fn new(handle: F, abscissa: f64) -> Self {
        LaplaceFn { handle, abscissa }
    }

    fn shifted(&self, s: Complex64) -> Result<Complex64> {
        (self.handle)(s + self.abscissa)
    }
}

/// Number of Talbot nodes used by [`laplace_invert`].
pub const TALBOT_NODES: usize = 24;
/// Node count of the coarser companion rule used for the error estimate.
pub const TALBOT_CHECK_NODES: usize = 20;

/// Fixed-Talbot inversion with `nodes` contour points.
pub fn talbot<F>(f: &LaplaceFn<F>, t: f64, nodes: usize) -> Result<f64>
where
    F: Fn(Complex64) -> Result<Complex64>,
{
    if !(t > 0.0 && t.is_finite()) {
        return Err(Error::InvalidParameter(format!("inversion time must be positive, got {t}")));
    }
    let m = nodes as f64;
    let r = 2.0 * m / (5.0 * t);
    let mut sum = 0.5 * f.shifted(Complex64::new(r, 0.0))?.re * (r * t).exp();
    for k in 1..nodes {
        let theta = k as f64 * PI / m;
        let cot = theta.cos() / theta.sin();
        let s = Complex64::new(r * theta * cot, r * theta);
        let sigma = theta + (theta * cot - 1.0) * cot;
        let term = (s * t).exp() * f.shifted(s)? * Complex64::new(1.0, sigma);
        sum += term.re;
    }
    Ok(sum * r / m * (f.abscissa * t).exp())
}

/// Euler-summed Bromwich inversion (Abate–Whitt), discretisation error ≈ e^{-A}.
pub fn euler<F>(f: &LaplaceFn<F>, t: f64) -> Result<f64>
where
    F: Fn(Complex64) -> Result<Complex64>,
{
    if !(t > 0.0 && t.is_finite()) {
        return Err(Error::InvalidParameter(format!("inversion time must be positive, got {t}")));
    }
    const A: f64 = 20.0;
    const N: usize = 40;
    const M: usize = 12;
    let scale = (0.5 * A).exp() / t;
    let mut partial = 0.5 * scale * f.shifted(Complex64::new(A / (2.0 * t), 0.0))?.re;
    let mut sums = Vec::with_capacity(M + 1);
    for k in 1..=(N + M) {
        let s = Complex64::new(A / (2.0 * t), k as f64 * PI / t);
        let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
        partial += sign * scale * f.shifted(s)?.re;
        if k >= N {
            sums.push(partial);
        }
    }
    // Binomial averaging of the last M+1 partial sums.
    let mut binom = 1.0;
    let mut acc = 0.0;
    for (j, s) in sums.iter().enumerate() {
        if j > 0 {
            binom *= (M - j + 1) as f64 / j as f64;
        }
        acc += binom * s;
    }
    Ok(acc / 2f64.powi(M as i32) * (f.abscissa * t).exp())
}

/// Inverts `f` at time `t` by the fixed Talbot rule.
///
/// The error is estimated from a coarser Talbot rule; if it exceeds
/// `max(rel_tol·|f(t)|, abs_tol)` an [`Error::AccuracyNotReached`] carrying
/// the best estimate is returned.
pub fn laplace_invert<F>(f: &LaplaceFn<F>, t: f64, spec: &QuadSpec) -> Result<f64>
where
    F: Fn(Complex64) -> Result<Complex64>,
{
    let fine = talbot(f, t, TALBOT_NODES)?;
    let coarse = talbot(f, t, TALBOT_CHECK_NODES)?;
    let error_bound = (fine - coarse).abs();
    if !fine.is_finite() || error_bound > spec.abs_tol.max(spec.rel_tol * fine.abs()) {
        return Err(Error::AccuracyNotReached { estimate: fine, error_bound });
    }
    Ok(fine)
}
