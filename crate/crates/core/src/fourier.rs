//! European prices of Fourier-integrable payoffs under any jump density:
//!
//! `C(x, t̄) = (1/2π) ∫ Φ̃(ω) e^{-iωx} e^{-rt̄} e^{-λt̄(1 − h̃(−ω))} dω`.
//!
//! The Poisson expansion of the last factor is used to peel off the first
//! few jump counts exactly (no jump, one jump, or all relevant counts for the
//! discrete walk). Only the remainder goes through the ω-integral, where its
//! decay is bounded analytically so truncation is rigorous.

use crate::densities::{Family, JumpDensity};
use crate::error::{Error, Result};
use crate::numerics::quad::{integrate_panels, integrate_real_line, QuadSpec, TailBound};
use crate::risk_neutral::MarketParams;
use num_complex::Complex64;
use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

/// Caller-supplied payoff transform with `|Φ̃(ω)| ≤ constant·|ω|^{-order}`.
#[derive(Clone)]
pub struct CustomPayoff {
    pub transform: Arc<dyn Fn(f64) -> Complex64 + Send + Sync>,
    pub bound_constant: f64,
    pub bound_order: f64,
}

impl fmt::Debug for CustomPayoff {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("CustomPayoff")
            .field("bound_constant", &self.bound_constant)
            .field("bound_order", &self.bound_order)
            .finish()
    }
}

#[derive(Debug, Clone)]
pub enum Payoff {
    /// Long two calls at `K + L/2`, short one each at `K` and `K + L`.
    Butterfly { strike: f64, width: f64 },
    Custom(CustomPayoff),
}

impl Payoff {
    pub fn butterfly(strike: f64, width: f64) -> Result<Self> {
        if !(strike > 0.0 && width > 0.0 && strike.is_finite() && width.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "butterfly needs K > 0 and L > 0 (K = {strike}, L = {width})"
            )));
        }
        Ok(Payoff::Butterfly { strike, width })
    }

    /// Log-strikes `(k₁, k₂, k₃)` of the butterfly.
    pub fn log_strikes(&self) -> Option<(f64, f64, f64)> {
        match *self {
            Payoff::Butterfly { strike, width } => {
                Some((strike.ln(), (strike + 0.5 * width).ln(), (strike + width).ln()))
            }
            Payoff::Custom(_) => None,
        }
    }

    /// `Φ(x)` for the butterfly.
    pub fn value(&self, x: f64) -> Option<f64> {
        match *self {
            Payoff::Butterfly { strike, width } => {
                let s = x.exp();
                let v = if s <= strike || s >= strike + width {
                    0.0
                } else if s <= strike + 0.5 * width {
                    s - strike
                } else {
                    strike + width - s
                };
                Some(v)
            }
            Payoff::Custom(_) => None,
        }
    }

    /// `sup Φ`, used for the discounted price bound.
    pub fn peak(&self) -> Option<f64> {
        match *self {
            Payoff::Butterfly { width, .. } => Some(0.5 * width),
            Payoff::Custom(_) => None,
        }
    }

    /// Constant `M` and order `p` with `|Φ̃(ω)| ≤ M|ω|^{-p}`.
    fn transform_bound(&self) -> (f64, f64) {
        match self {
            Payoff::Butterfly { strike, width } => (2.0 * (2.0 * strike + width), 2.0),
            Payoff::Custom(c) => (c.bound_constant, c.bound_order),
        }
    }
}

/// `(e^{iωd} − 1)/ω`, continuous through `ω = 0`.
fn phase_ratio(omega: f64, d: f64) -> Complex64 {
    let theta = omega * d;
    if theta.abs() < 1e-3 {
        let t2 = theta * theta;
        d * Complex64::new(-0.5 * theta + theta * t2 / 24.0, 1.0 - t2 / 6.0 + t2 * t2 / 120.0)
    } else {
        Complex64::new(theta.cos() - 1.0, theta.sin()) / omega
    }
}

/// `Φ̃(ω) = ∫ e^{iωx} Φ(x) dx` at real `ω`.
pub fn payoff_transform(p: &Payoff, omega: f64) -> Complex64 {
    match p {
        Payoff::Butterfly { strike, width } => {
            let mid = strike + 0.5 * width;
            let k2 = mid.ln();
            // 2 − e^{d₁} − e^{d₃} = 0 exactly, so only the phase differences remain.
            let (e1, e3) = (strike / mid, (strike + width) / mid);
            let (d1, d3) = ((-0.5 * width / mid).ln_1p(), (0.5 * width / mid).ln_1p());
            let sum = e1 * phase_ratio(omega, d1) + e3 * phase_ratio(omega, d3);
            let lead = Complex64::new(k2, omega * k2).exp();
            -lead * sum / Complex64::new(omega, -1.0)
        }
        Payoff::Custom(c) => (c.transform)(omega),
    }
}

/// Price with diagnostics.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FourierPrice {
    pub price: f64,
    /// Imaginary part left over by the ω-integral; zero in exact arithmetic.
    pub imag_residue: f64,
    /// Quadrature plus truncation error bound of the ω-integral.
    pub error_bound: f64,
    /// Number of Poisson terms evaluated exactly.
    pub exact_terms: usize,
}

/// `e^z − Σ_{n<N} zⁿ/n!`.
fn exp_remainder(z: Complex64, n_terms: usize) -> Complex64 {
    if z.norm() < 0.5 {
        let mut term = Complex64::new(1.0, 0.0);
        for n in 1..=n_terms {
            term = term * z / n as f64;
        }
        let mut sum = Complex64::new(0.0, 0.0);
        let mut n = n_terms;
        loop {
            sum += term;
            n += 1;
            term = term * z / n as f64;
            if term.norm() <= 1e-17 * sum.norm() || term.norm() == 0.0 {
                return sum;
            }
        }
    }
    let mut partial = Complex64::new(0.0, 0.0);
    let mut term = Complex64::new(1.0, 0.0);
    for n in 0..n_terms {
        partial += term;
        term = term * z / (n + 1) as f64;
    }
    z.exp() - partial
}

/// `P(N ≥ n)` for `N ~ Poisson(mean)`.
fn poisson_tail(mean: f64, n: usize) -> f64 {
    let mut pmf = (-mean).exp();
    let mut cdf = 0.0;
    for j in 0..n {
        cdf += pmf;
        pmf *= mean / (j + 1) as f64;
    }
    (1.0 - cdf).max(0.0)
}

/// `E[Φ(x + J)]` for one jump, by quadrature over the payoff support.
fn one_jump_expectation(p: &Payoff, d: &JumpDensity, x: f64, spec: &QuadSpec) -> Result<f64> {
    let (k1, k2, k3) = p.log_strikes().expect("butterfly");
    let (lo, hi) = (k1 - x, k3 - x);
    let mut edges = vec![lo, k2 - x, hi];
    let kinks: &[f64] = match d.family() {
        Family::Exponential => &[0.0],
        Family::Constant => &[d.a(), d.b()],
        _ => &[],
    };
    for &e in kinks {
        if e > lo && e < hi {
            edges.push(e);
        }
    }
    edges.sort_by(|a, b| a.partial_cmp(b).expect("finite edges"));
    let tight = QuadSpec { rel_tol: 1e-13, abs_tol: spec.abs_tol * 1e-2, ..*spec };
    let f = |y: f64| p.value(x + y).expect("butterfly") * d.pdf(y);
    Ok(integrate_panels(f, &edges, &tight)?.value)
}

/// `E[Φ(x + S_n)]` for the two-point walk after `n` jumps.
fn discrete_expectation(p: &Payoff, d: &JumpDensity, x: f64, n: usize) -> f64 {
    let (a, b) = (d.a(), d.b());
    // Binomial weights built in log space to survive large n.
    let (ln_a, ln_q) = (a.ln(), (1.0 - a).ln());
    let mut ln_binom = 0.0;
    let mut acc = 0.0;
    for up in 0..=n {
        if up > 0 {
            ln_binom += ((n - up + 1) as f64).ln() - (up as f64).ln();
        }
        let w = ln_binom + up as f64 * ln_a + (n - up) as f64 * ln_q;
        let weight = if w.is_nan() { 0.0 } else { w.exp() };
        if weight > 0.0 {
            let shift = (2.0 * up as f64 - n as f64) * b;
            acc += weight * p.value(x + shift).expect("butterfly");
        }
    }
    acc
}

pub fn price_fourier(p: &Payoff, mp: &MarketParams, x: f64, t_bar: f64, spec: &QuadSpec) -> Result<f64> {
    Ok(price_fourier_detailed(p, mp, x, t_bar, spec)?.price)
}

pub fn price_fourier_detailed(
    p: &Payoff,
    mp: &MarketParams,
    x: f64,
    t_bar: f64,
    spec: &QuadSpec,
) -> Result<FourierPrice> {
    spec.validate()?;
    if !x.is_finite() {
        return Err(Error::InvalidParameter(format!("log-price must be finite, got {x}")));
    }
    if !(t_bar >= 0.0 && t_bar.is_finite()) {
        return Err(Error::InvalidParameter(format!("maturity must be nonnegative, got {t_bar}")));
    }
    if !(mp.lambda > 0.0 && mp.lambda.is_finite()) {
        return Err(Error::InadmissibleDensity(format!("intensity must be positive, got {}", mp.lambda)));
    }
    let d = mp.density;
    let r = mp.r;
    let mean = mp.lambda * t_bar;
    let no_jump = (-(mp.lambda + r) * t_bar).exp();
    let (m_bound, p_order) = p.transform_bound();
    let is_butterfly = matches!(p, Payoff::Butterfly { .. });

    if is_butterfly && t_bar == 0.0 {
        let v = p.value(x).expect("butterfly");
        return Ok(FourierPrice { price: v, imag_residue: 0.0, error_bound: 0.0, exact_terms: 1 });
    }

    // Exact Poisson terms and the analytic bound on the remainder integrand.
    let mut exact = 0.0;
    let (n_terms, tail) = match (is_butterfly, d.family(), d.char_fn_decay()) {
        (true, Family::Discrete, _) => {
            let target = spec.abs_tol * 1e-2 / m_bound;
            let mut n = 1;
            while poisson_tail(mean, n) > target {
                n += 1;
            }
            let mut weight = no_jump;
            for j in 0..n {
                exact += weight * discrete_expectation(p, &d, x, j);
                weight *= mean / (j + 1) as f64;
            }
            let constant = m_bound * (-r * t_bar).exp() * poisson_tail(mean, n) / (2.0 * PI);
            (n, TailBound::Power { constant, order: p_order, from: 0.0 })
        }
        (_, Family::ParetoHalf, _) => {
            // Re(1 − h̃(−ω)) ≥ 2√π(√(b|ω|/2) − 1).
            let c = 2.0 * PI.sqrt() * mean;
            let ln_constant = (m_bound / (2.0 * PI)).ln() - r * t_bar + c;
            let rate = c * (0.5 * d.b()).sqrt();
            if p_order < 2.0 || !(rate > 0.0) {
                return Err(Error::UnsupportedFamily("pareto needs a payoff transform decaying like ω⁻²"));
            }
            (0, TailBound::StretchedExp { ln_constant, rate, from: 1e-9 })
        }
        (_, _, Some((dc, q))) => {
            let n = if is_butterfly { 2 } else { 0 };
            if is_butterfly {
                exact += no_jump * p.value(x).expect("butterfly");
                if mean > 0.0 {
                    exact += no_jump * mean * one_jump_expectation(p, &d, x, spec)?;
                }
            }
            // For |ω| ≥ Ω₀: λt̄|h̃| ≤ min(λt̄, 1), so e^{λt̄|h̃|} ≤ e.
            let from = (dc * mean.max(1.0)).powf(1.0 / q);
            let eta = dc * from.powf(-q);
            let mut coef = 1.0;
            for j in 0..n {
                coef *= mean * dc / (j + 1) as f64;
            }
            let constant =
                m_bound * (-r * t_bar).exp() * (-mean * (1.0 - eta)).exp() * coef / (2.0 * PI);
            let order = p_order + q * n as f64;
            (n, TailBound::Power { constant, order, from })
        }
        (_, family, None) => {
            if p_order <= 1.0 {
                return Err(Error::UnsupportedFamily(match family {
                    Family::Discrete => "discrete jumps need a payoff transform with order > 1",
                    _ => "payoff transform must decay faster than 1/ω",
                }));
            }
            let constant = m_bound * (-r * t_bar).exp() / (2.0 * PI);
            (0, TailBound::Power { constant, order: p_order, from: 0.0 })
        }
    };

    let mut failure = None;
    let integrand = |omega: f64| {
        let h = match d.char_fn(Complex64::new(-omega, 0.0)) {
            Ok(h) => h,
            Err(e) => {
                failure.get_or_insert(e);
                return Complex64::new(0.0, 0.0);
            }
        };
        let weight = no_jump * exp_remainder(mean * h, n_terms);
        payoff_transform(p, omega) * Complex64::new(0.0, -omega * x).exp() * weight / (2.0 * PI)
    };
    // Interior panels resolve the payoff scale 1/(k₃ − k₁) and the jump scale 1/b.
    let scale = match (p.log_strikes(), d.family()) {
        (Some((k1, _, k3)), _) => (50.0 / (k3 - k1)).max(20.0 / d.b().abs().max(1e-12)),
        (None, _) => 200.0,
    };
    let integral_spec = QuadSpec { abs_tol: spec.abs_tol, ..*spec };
    let est = integrate_real_line(integrand, tail, scale, &integral_spec)?;
    if let Some(e) = failure {
        return Err(e);
    }
    let imag_residue = est.value.im;
    if imag_residue.abs() > 10.0 * spec.abs_tol {
        return Err(Error::AccuracyNotReached { estimate: exact + est.value.re, error_bound: imag_residue.abs() });
    }
    Ok(FourierPrice {
        price: exact + est.value.re,
        imag_residue,
        error_bound: est.error,
        exact_terms: n_terms,
    })
}

/// Bound `|h̃(ω)| ≤ D|ω|^{-q}` used above, exposed for tests.
#[doc(hidden)]
pub fn decay_bound(d: &JumpDensity) -> Option<(f64, f64)> {
    d.char_fn_decay()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::densities::Moments;
    use crate::numerics::quad::integrate_interval;
    use approx::assert_relative_eq;

    fn fly() -> Payoff {
        Payoff::butterfly(100.0, 10.0).unwrap()
    }

    #[test]
    fn transform_at_zero() {
        let v = payoff_transform(&fly(), 0.0);
        let want = 110.0 * (110.0f64 / 105.0).ln() - 100.0 * (105.0f64 / 100.0).ln();
        assert_relative_eq!(v.re, want, max_relative = 1e-12);
        assert!(v.im.abs() < 1e-14);
        assert!((want - 0.23818).abs() < 1e-5);
    }

    #[test]
    fn transform_matches_quadrature() {
        let p = fly();
        let (k1, k2, k3) = p.log_strikes().unwrap();
        let spec = QuadSpec { rel_tol: 1e-13, abs_tol: 1e-14, max_evals: 1_000_000 };
        for omega in [-7.0, -0.3, 1e-5, 0.8, 3.0, 25.0] {
            let re = integrate_panels(|x: f64| (omega * x).cos() * p.value(x).unwrap(), &[k1, k2, k3], &spec)
                .unwrap()
                .value;
            let im = integrate_panels(|x: f64| (omega * x).sin() * p.value(x).unwrap(), &[k1, k2, k3], &spec)
                .unwrap()
                .value;
            let v = payoff_transform(&p, omega);
            assert!((v - Complex64::new(re, im)).norm() < 1e-11, "ω={omega}: {v} vs {re}+{im}i");
            let c = payoff_transform(&p, -omega);
            assert!((c - v.conj()).norm() < 1e-14);
        }
    }

    #[test]
    fn transform_bound_holds() {
        let p = fly();
        let (m, order) = p.transform_bound();
        for omega in [0.5, 1.0, 3.0, 10.0, 100.0, 1e4] {
            assert!(payoff_transform(&p, omega).norm() <= m * omega.powf(-order));
        }
    }

    #[test]
    fn remainder_series() {
        for z in [Complex64::new(0.1, 0.2), Complex64::new(-3.0, 1.0), Complex64::new(9.0, -2.0)] {
            let direct = z.exp() - 1.0 - z;
            assert!((exp_remainder(z, 2) - direct).norm() < 1e-13 * direct.norm().max(1.0));
        }
        let z = Complex64::new(1e-6, 0.0);
        assert_relative_eq!(exp_remainder(z, 2).re, 0.5e-12, max_relative = 1e-6);
    }

    #[test]
    fn pure_inversion_of_the_payoff() {
        // Custom wrapper: the ω-integral alone must return Φ(x) at t̄ = 0.
        let inner = fly();
        let custom = Payoff::Custom(CustomPayoff {
            transform: Arc::new(move |w| payoff_transform(&inner, w)),
            bound_constant: 420.0,
            bound_order: 2.0,
        });
        let mp = MarketParams::risk_neutral(0.04, JumpDensity::exponential(0.5, 1.0 / 9.0).unwrap()).unwrap();
        // An ω⁻² bound makes the rigorous cutoff scale like 1/abs_tol.
        let spec = QuadSpec::default().with_abs_tol(1e-4);
        for (s, want) in [(105.0f64, 5.0), (102.0, 2.0), (108.0, 2.0), (99.0, 0.0)] {
            let v = price_fourier_detailed(&custom, &mp, s.ln(), 0.0, &spec).unwrap();
            assert!((v.price - want).abs() < 1e-4, "S={s}: {v:?}");
        }
    }

    #[test]
    fn expiry_value() {
        let mp = MarketParams::risk_neutral(0.04, JumpDensity::gaussian(0.0, 0.01).unwrap()).unwrap();
        let v = price_fourier(&fly(), &mp, 105f64.ln(), 0.0, &QuadSpec::default()).unwrap();
        assert!((v - 5.0).abs() < 1e-12);
    }

    #[test]
    fn gaussian_matches_direct_convolution() {
        // Gaussian jumps: S_n ~ N(na, nb²), so the price is a Poisson mixture
        // of one-dimensional Gaussian integrals.
        let d = JumpDensity::fit_from_moments(Family::Gaussian, Moments { mu1: 1e-3, mu2: 1e-4 }).unwrap();
        let mp = MarketParams::risk_neutral(0.04, d).unwrap();
        let p = fly();
        let t: f64 = 0.25;
        let spec = QuadSpec::default();
        let (k1, k2, k3) = p.log_strikes().unwrap();
        for s in [92.0f64, 100.0, 104.0] {
            let x = s.ln();
            let mean = mp.lambda * t;
            let mut want = 0.0;
            let mut weight = (-(mp.lambda + 0.04) * t).exp();
            for n in 0..200 {
                let term = if n == 0 {
                    p.value(x).unwrap()
                } else {
                    let (mu, sd) = (n as f64 * d.a(), (n as f64).sqrt() * d.b());
                    let f = |y: f64| {
                        let z = (y - x - mu) / sd;
                        p.value(y).unwrap() * (-0.5 * z * z).exp() / (sd * (2.0 * PI).sqrt())
                    };
                    integrate_panels(f, &[k1, k2, k3], &QuadSpec { rel_tol: 1e-13, abs_tol: 1e-15, max_evals: 1_000_000 })
                        .unwrap()
                        .value
                };
                want += weight * term;
                weight *= mean / (n + 1) as f64;
            }
            let got = price_fourier_detailed(&p, &mp, x, t, &spec).unwrap();
            assert!((got.price - want).abs() < 1e-9, "S={s}: {} vs {want}", got.price);
            assert!(got.imag_residue.abs() < 1e-9);
        }
    }

    #[test]
    fn discrete_sum_matches_enumeration() {
        let d = JumpDensity::fit_from_moments(Family::Discrete, Moments { mu1: 1e-3, mu2: 1e-4 }).unwrap();
        let p = fly();
        let x = 100f64.ln();
        // Enumerate all 2^n paths for small n.
        for n in 0..8usize {
            let mut brute = 0.0;
            for mask in 0..(1u32 << n) {
                let ups = mask.count_ones() as usize;
                let w = d.a().powi(ups as i32) * (1.0 - d.a()).powi((n - ups) as i32);
                brute += w * p.value(x + (2.0 * ups as f64 - n as f64) * d.b()).unwrap();
            }
            assert_relative_eq!(discrete_expectation(&p, &d, x, n), brute, max_relative = 1e-12, epsilon = 1e-15);
        }
    }

    #[test]
    fn one_jump_term_matches_wide_quadrature() {
        let d = JumpDensity::gumbel(0.001, 0.0078).unwrap();
        let p = fly();
        let x = 103f64.ln();
        let spec = QuadSpec::default();
        let got = one_jump_expectation(&p, &d, x, &spec).unwrap();
        let fine = QuadSpec { rel_tol: 1e-13, abs_tol: 1e-14, max_evals: 2_000_000 };
        let wide = integrate_interval(|y: f64| p.value(x + y).unwrap() * d.pdf(y), -1.0, 1.0, 2000, &fine)
            .unwrap()
            .value;
        assert!((got - wide).abs() < 1e-9, "{got} vs {wide}");
    }

    #[test]
    fn replicates_exact_double_exponential() {
        use crate::european::{european_price, Contract, DEModel, Method};
        let m = DEModel::new(2.0, 9.0, 0.04).unwrap();
        let mp = m.market_params();
        let p = fly();
        let spec = QuadSpec::default();
        for t in [0.05, 1.0, 20.0] {
            let c = Contract::butterfly(100.0, 10.0, t).unwrap();
            for s in [90.0f64, 100.0, 105.0, 112.0] {
                let x = s.ln();
                let exact = european_price(&m, &c, x, Method::ClosedForm, &spec).unwrap();
                let v = price_fourier(&p, &mp, x, t, &spec).unwrap();
                assert!((v - exact).abs() < 1e-7, "t={t} S={s}: {v} vs {exact}");
            }
        }
    }

    #[test]
    fn pareto_bound_survives_large_intensity() {
        // λt̄ ≈ 150: the bound is e^{531}·e^{−rate√ω}, whose second factor
        // alone underflows at the cutoff.
        let d = JumpDensity::fit_from_moments(Family::ParetoHalf, Moments { mu1: 4.18e-5, mu2: 5e-5 }).unwrap();
        let mp = MarketParams::risk_neutral(0.04, d).unwrap();
        assert!(mp.lambda * 0.25 > 100.0);
        for s in [80.0f64, 100.0, 104.0] {
            let v = price_fourier(&fly(), &mp, s.ln(), 0.25, &QuadSpec::default()).unwrap();
            assert!((0.0..=5.0).contains(&v), "S={s}: {v}");
        }
    }
}
