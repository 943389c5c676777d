//! American binary puts, perpetual puts and early-exercise levels under the
//! two-sided exponential density.

use crate::error::{Error, Result};
use crate::european::{bessel_window, beta_pm, DEModel, Method, PayoffKind};
use crate::numerics::laplace::{laplace_invert, LaplaceFn};
use crate::numerics::quad::{integrate_interval, QuadSpec};
use crate::numerics::roots::bisect_secant;
use crate::numerics::special::{bessel_i1_scaled, ln_normal_cdf};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

/// Early-exercise levels in log-price: `z0` as `t̄ → 0`, `z_star` as `t̄ → ∞`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExerciseBoundary {
    pub z0: f64,
    pub z_star: f64,
    pub kind: PayoffKind,
}

/// Boundaries for the binary put (flat at `k`) and the vanilla put.
pub fn exercise_boundary(m: &DEModel, strike: f64, kind: PayoffKind) -> Result<ExerciseBoundary> {
    match kind {
        PayoffKind::BinaryPut => {
            let k = strike.ln();
            Ok(ExerciseBoundary { z0: k, z_star: k, kind })
        }
        PayoffKind::VanillaPut => Ok(ExerciseBoundary {
            z0: vanilla_z0(m, strike).ln(),
            z_star: perpetual_vanilla_put(m, strike, strike.ln())?.1,
            kind,
        }),
        _ => Err(Error::InvalidParameter("exercise boundaries exist for puts only".into())),
    }
}

/// Laplace transform in `t̄` of the American binary put.
pub fn binary_put_laplace(m: &DEModel, k: f64, x: f64, s: Complex64) -> Result<Complex64> {
    if x <= k {
        return Ok(1.0 / s);
    }
    let (_, b_minus) = beta_pm(m, s)?;
    Ok((m.gamma + b_minus) / m.gamma * (b_minus * (x - k)).exp() / s)
}

/// American binary put paying 1 the first time the log-price is at or below
/// `k`. Worth 1 when `x ≤ k`.
pub fn binary_put_price(
    m: &DEModel,
    k: f64,
    x: f64,
    t_bar: f64,
    method: Method,
    spec: &QuadSpec,
) -> Result<f64> {
    if !(x.is_finite() && k.is_finite()) {
        return Err(Error::InvalidParameter("log-price and log-strike must be finite".into()));
    }
    if !(t_bar >= 0.0 && t_bar.is_finite()) {
        return Err(Error::InvalidParameter(format!("maturity must be nonnegative, got {t_bar}")));
    }
    if x <= k {
        return Ok(1.0);
    }
    if t_bar == 0.0 {
        return Ok(0.0);
    }
    match method {
        Method::LaplaceInversion => {
            let f = LaplaceFn::new(|s| binary_put_laplace(m, k, x, s), 0.0);
            laplace_invert(&f, t_bar, spec)
        }
        Method::ClosedForm => binary_put_closed_form(m, k, x, t_bar, spec),
    }
}

fn binary_put_closed_form(m: &DEModel, k: f64, x: f64, t_bar: f64, spec: &QuadSpec) -> Result<f64> {
    let DEModel { rho, gamma, r, lambda } = *m;
    let c = lambda * t_bar;
    let c_total = (lambda + r) * t_bar;
    let q = (0.5 * gamma * rho * c).sqrt();
    let y = k - x;
    let wide = gamma - rho + 2.0;
    let (ln_rho1, ln_gamma1, ln_sum) = ((rho - 1.0).ln(), (gamma + 1.0).ln(), (gamma + rho).ln());
    let integrand = |u: f64| {
        if u == 0.0 {
            return 0.0;
        }
        let xi = u / q;
        let ln_bessel = (2.0 * bessel_i1_scaled(2.0 * u)).ln();
        let d = u - c_total;
        let ln_gauss = -d * d / c_total;
        let t1 = ln_rho1 + (gamma + 1.0 - rho) * y + ln_normal_cdf(0.5 * wide * xi + y / xi);
        let t2 = ln_gamma1 - y + ln_normal_cdf(-0.5 * wide * xi + y / xi);
        let t3 = ln_sum - rho * y + 2.0 * u - c_total
            + ln_normal_cdf(-0.5 * (gamma + rho) * xi + y / xi);
        (ln_bessel + ln_gauss + t1).exp() + (ln_bessel + ln_gauss + t2).exp() - (ln_bessel + t3).exp()
    };
    let (lo, hi) = bessel_window(c_total);
    let spec = QuadSpec { abs_tol: spec.abs_tol * gamma, ..*spec };
    let integral = integrate_interval(integrand, lo, hi, 16, &spec)?.value;
    Ok(integral / gamma)
}

/// Perpetual American binary put.
pub fn perpetual_binary_put(m: &DEModel, k: f64, x: f64) -> f64 {
    if x <= k {
        return 1.0;
    }
    (m.rho - 1.0) / m.gamma * (-(m.epsilon()) * (x - k)).exp()
}

/// Exercise level `Z₀ = e^{z₀}` of the American vanilla put as `t̄ → 0`.
pub fn vanilla_z0(m: &DEModel, strike: f64) -> f64 {
    let DEModel { rho, gamma, .. } = *m;
    strike * ((gamma + rho) * (gamma - rho + 1.0) / (gamma * (gamma + 1.0))).powf(1.0 / rho)
}

/// `z₀` as the root of `Φ(z₀) = λ/(λ+r)·∫h(y−z₀)Φ(y)dy`, with the jump
/// integral of `Φ(y) = (K − e^y)⁺` done in closed form.
pub fn vanilla_z0_by_root(m: &DEModel, strike: f64) -> Result<f64> {
    let DEModel { rho, gamma, r, lambda } = *m;
    let weight = lambda / (lambda + r);
    // Everything divided by K, as a function of w = k − z₀ ≥ 0.
    let f = |w: f64| {
        let jump = 1.0 - (-w).exp() * gamma * rho / ((gamma + 1.0) * (rho - 1.0))
            + gamma * (-rho * w).exp() / ((gamma + rho) * (rho - 1.0));
        -(-w).exp_m1() - weight * jump
    };
    let mut hi = 1.0;
    while f(hi) < 0.0 {
        hi *= 2.0;
        if hi > 1e6 {
            return Err(Error::NoConvergence { iterations: 0, lo: 0.0, hi });
        }
    }
    let w = bisect_secant(f, 0.0, hi, 1e-15, 0.0, 500)?;
    Ok(strike * (-w).exp())
}

/// Perpetual American vanilla put: `(price, z*)` with `z*` in log-price.
pub fn perpetual_vanilla_put(m: &DEModel, strike: f64, x: f64) -> Result<(f64, f64)> {
    if !(strike > 0.0 && x.is_finite()) {
        return Err(Error::InvalidParameter("strike must be positive and x finite".into()));
    }
    let DEModel { rho, gamma, .. } = *m;
    let eps = m.epsilon();
    let z_star_level = strike * (gamma + 1.0) * eps / (gamma * (eps + 1.0));
    let z_star = z_star_level.ln();
    let price = if x <= z_star {
        strike - x.exp()
    } else {
        (rho - 1.0) / gamma * (strike - gamma * z_star_level / (gamma + 1.0)) * (eps * (z_star - x)).exp()
    };
    Ok((price, z_star))
}

/// Continuation value at `z` from the general perpetual solution,
/// `(ρ−1)∫_{-∞}^0 (K − e^{y+z})⁺ e^{γy} dy`, by quadrature.
pub fn perpetual_continuation_at(m: &DEModel, strike: f64, z: f64, spec: &QuadSpec) -> Result<f64> {
    let gamma = m.gamma;
    let lo = -60.0 / gamma;
    let f = |y: f64| (strike - (y + z).exp()).max(0.0) * (gamma * y).exp();
    let kink = strike.ln() - z;
    let est = if kink < 0.0 && kink > lo {
        integrate_interval(f, lo, kink, 8, spec)?.value
    } else {
        integrate_interval(f, lo, 0.0, 8, spec)?.value
    };
    Ok((m.rho - 1.0) * est)
}

/// `Z*` from value matching `P∞(z*) = K − e^{z*}` with the continuation
/// value integrated numerically.
pub fn vanilla_z_star_by_root(m: &DEModel, strike: f64) -> Result<f64> {
    let spec = QuadSpec { rel_tol: 1e-14, abs_tol: 1e-16, max_evals: 200_000 };
    let k = strike.ln();
    let mut err = None;
    let f = |z: f64| match perpetual_continuation_at(m, strike, z, &spec) {
        Ok(v) => v - (strike - z.exp()),
        Err(e) => {
            err.get_or_insert(e);
            f64::NAN
        }
    };
    let z = bisect_secant(f, k - 20.0, k, 1e-15, 0.0, 500);
    if let Some(e) = err {
        return Err(e);
    }
    Ok(z?.exp())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::quad::integrate_panels;
    use approx::assert_relative_eq;

    fn model() -> DEModel {
        DEModel::new(2.0, 9.0, 0.04).unwrap()
    }

    #[test]
    fn laplace_branches() {
        let m = model();
        let s = Complex64::new(0.4, 1.3);
        assert_eq!(binary_put_laplace(&m, 0.0, -0.2, s).unwrap(), 1.0 / s);
        assert!(binary_put_laplace(&m, 0.0, 50.0, s).unwrap().norm() < 1e-100);
    }

    #[test]
    fn perpetual_limit_of_laplace() {
        let m = model();
        let s = Complex64::new(1e-9, 0.0);
        for d in [0.01, 0.1, 0.5] {
            let v = (s * binary_put_laplace(&m, 0.0, d, s).unwrap()).re;
            assert!((v - perpetual_binary_put(&m, 0.0, d)).abs() < 1e-6);
        }
        assert_relative_eq!(perpetual_binary_put(&m, 0.0, 1e-300), 1.0 / 9.0, max_relative = 1e-12);
        assert_relative_eq!(perpetual_binary_put(&m, 0.0, 0.1), (-0.8f64).exp() / 9.0, max_relative = 1e-14);
    }

    #[test]
    fn laplace_solves_renewal_equation() {
        // P̂ = λ/(λ+r+s)·[1/s·P(J lands ≤ k) + ∫_k^∞ h(y−x)P̂(y)dy] for x > k.
        let m = model();
        let DEModel { rho, gamma, r, lambda } = m;
        let (k, s) = (0.0, 0.6);
        let p_hat = |y: f64| binary_put_laplace(&m, k, y, Complex64::new(s, 0.0)).unwrap().re;
        let norm = rho * gamma / (rho + gamma);
        for x in [0.01, 0.2, 0.7] {
            let below = norm / gamma * (-gamma * (x - k)).exp();
            let spec = QuadSpec { rel_tol: 1e-13, abs_tol: 1e-15, max_evals: 1_000_000 };
            let above = integrate_panels(
                |y: f64| {
                    let z = y - x;
                    let h = if z >= 0.0 { (-rho * z).exp() } else { (gamma * z).exp() };
                    norm * h * p_hat(y)
                },
                &[k, x, x + 40.0],
                &spec,
            )
            .unwrap()
            .value;
            let rhs = lambda / (lambda + r + s) * (below / s + above);
            assert!((p_hat(x) - rhs).abs() < 1e-11, "x = {x}");
        }
    }

    #[test]
    fn closed_form_matches_inversion() {
        let spec = QuadSpec::default();
        for m in [model(), DEModel::from_sigma(20.0, 0.1, 0.04).unwrap()] {
            for t in [0.05, 0.25, 1.0, 5.0, 20.0] {
                for d in [1e-4, 0.01, 0.1, 0.3] {
                    let a = binary_put_price(&m, 0.0, d, t, Method::ClosedForm, &spec).unwrap();
                    let b = binary_put_price(&m, 0.0, d, t, Method::LaplaceInversion, &spec).unwrap();
                    assert!((a - b).abs() < 1e-8, "ρ={} t={t} d={d}: {a} vs {b}", m.rho);
                }
            }
        }
    }

    #[test]
    fn binary_put_edges() {
        let m = model();
        let spec = QuadSpec::default();
        assert_eq!(binary_put_price(&m, 0.0, -0.1, 1.0, Method::ClosedForm, &spec).unwrap(), 1.0);
        assert_eq!(binary_put_price(&m, 0.0, 0.1, 0.0, Method::ClosedForm, &spec).unwrap(), 0.0);
        let long = binary_put_price(&m, 0.0, 0.1, 2000.0, Method::LaplaceInversion, &spec).unwrap();
        assert!((long - (-0.8f64).exp() / 9.0).abs() < 1e-6);
    }

    #[test]
    fn z0_values() {
        let m = model();
        assert_relative_eq!(vanilla_z0(&m, 1.0), (88.0f64 / 90.0).sqrt(), max_relative = 1e-14);
        let root = vanilla_z0_by_root(&m, 1.0).unwrap();
        assert!((root - vanilla_z0(&m, 1.0)).abs() < 1e-12);
        let near = DEModel::new(1.0 + 1e-9, 9.0, 0.04).unwrap();
        assert!((vanilla_z0(&near, 1.0) - 1.0).abs() < 1e-7);
        // Continuous-trading limit: the gap closes like ln(ρ)/ρ.
        let gap = |rho: f64| 1.0 - vanilla_z0(&DEModel::from_sigma(rho, 0.1, 0.04).unwrap(), 1.0);
        assert!((gap(2000.0) - 2.41e-3).abs() < 1e-5);
        assert!(gap(2e5) < 1e-4 && gap(2e5) > 0.0);
    }

    #[test]
    fn z0_inner_integral_by_quadrature() {
        // The closed-form jump integral inside vanilla_z0_by_root, checked directly.
        let m = DEModel::new(3.0, 7.0, 0.04).unwrap();
        let (rho, gamma) = (m.rho, m.gamma);
        let z0: f64 = -0.07;
        let norm = rho * gamma / (rho + gamma);
        let spec = QuadSpec { rel_tol: 1e-13, abs_tol: 1e-15, max_evals: 1_000_000 };
        let quad = integrate_panels(
            |y: f64| {
                let t = y - z0;
                let h = if t >= 0.0 { (-rho * t).exp() } else { (gamma * t).exp() };
                norm * h * (1.0 - y.exp()).max(0.0)
            },
            &[z0 - 20.0, z0, 0.0],
            &spec,
        )
        .unwrap()
        .value;
        let w = -z0;
        let closed = 1.0 - (-w).exp() * gamma * rho / ((gamma + 1.0) * (rho - 1.0))
            + gamma * (-rho * w).exp() / ((gamma + rho) * (rho - 1.0));
        assert_relative_eq!(quad, closed, max_relative = 1e-11);
    }

    #[test]
    fn perpetual_vanilla_values() {
        let m = model();
        let (p, z) = perpetual_vanilla_put(&m, 1.0, (80.0f64 / 81.0).ln()).unwrap();
        assert_relative_eq!(z.exp(), 80.0 / 81.0, max_relative = 1e-14);
        assert_relative_eq!(p, 1.0 / 81.0, max_relative = 1e-12);
        let root = vanilla_z_star_by_root(&m, 1.0).unwrap();
        assert!((root - 80.0 / 81.0).abs() < 1e-10);
        let (far, _) = perpetual_vanilla_put(&m, 1.0, 10.0).unwrap();
        assert!(far < 1e-30);
    }

    #[test]
    fn boundary_ordering() {
        for (rho, gamma) in [(2.0, 9.0), (1.5, 0.8), (5.0, 4.5), (30.0, 37.0)] {
            let m = DEModel::new(rho, gamma, 0.04).unwrap();
            let b = exercise_boundary(&m, 1.0, PayoffKind::VanillaPut).unwrap();
            assert!(b.z_star <= b.z0 && b.z0 <= 0.0, "{b:?}");
        }
    }
}
