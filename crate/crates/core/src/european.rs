//! European options under the two-sided exponential jump density.
//!
//! Prices are available by numerical Laplace inversion of the exact
//! Laplace-space solution and by the time-domain Bessel quadratures. The
//! time-domain kernels are rewritten with `e^{-u}I₁(u)` so nothing overflows
//! for large `λt̄`.

use crate::densities::JumpDensity;
use crate::error::{Error, Result};
use crate::numerics::laplace::{laplace_invert, LaplaceFn};
use crate::numerics::quad::{integrate_interval, QuadSpec};
use crate::numerics::special::{bessel_i1_scaled, normal_cdf};
use crate::risk_neutral::MarketParams;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Style {
    European,
    American,
    Perpetual,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PayoffKind {
    BinaryCall,
    VanillaCall,
    BinaryPut,
    VanillaPut,
    Portfolio,
}

/// An option contract. `l` is the butterfly width and is only read for
/// [`PayoffKind::Portfolio`]; `t_bar` is ignored for perpetual options.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Contract {
    pub style: Style,
    pub payoff: PayoffKind,
    pub strike: f64,
    #[serde(default)]
    pub l: f64,
    pub t_bar: f64,
}

impl Contract {
    pub fn new(style: Style, payoff: PayoffKind, strike: f64, t_bar: f64) -> Result<Self> {
        let c = Contract { style, payoff, strike, l: 0.0, t_bar };
        c.validate()?;
        Ok(c)
    }

    pub fn european(payoff: PayoffKind, strike: f64, t_bar: f64) -> Result<Self> {
        Self::new(Style::European, payoff, strike, t_bar)
    }

    pub fn butterfly(strike: f64, l: f64, t_bar: f64) -> Result<Self> {
        let c = Contract { style: Style::European, payoff: PayoffKind::Portfolio, strike, l, t_bar };
        c.validate()?;
        Ok(c)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.strike > 0.0 && self.strike.is_finite()) {
            return Err(Error::InvalidParameter(format!("strike must be positive, got {}", self.strike)));
        }
        if self.payoff == PayoffKind::Portfolio && !(self.l > 0.0 && self.l.is_finite()) {
            return Err(Error::InvalidParameter(format!("butterfly width L must be positive, got {}", self.l)));
        }
        if self.style != Style::Perpetual && !(self.t_bar >= 0.0 && self.t_bar.is_finite()) {
            return Err(Error::InvalidParameter(format!("maturity must be nonnegative, got {}", self.t_bar)));
        }
        Ok(())
    }

    pub fn log_strike(&self) -> f64 {
        self.strike.ln()
    }

    /// Payoff at exercise as a function of the log-price.
    pub fn payoff_at(&self, x: f64) -> f64 {
        let k = self.strike;
        let s = x.exp();
        match self.payoff {
            PayoffKind::BinaryCall => f64::from(x >= self.log_strike()),
            PayoffKind::BinaryPut => f64::from(x < self.log_strike()),
            PayoffKind::VanillaCall => (s - k).max(0.0),
            PayoffKind::VanillaPut => (k - s).max(0.0),
            PayoffKind::Portfolio => {
                let l = self.l;
                (s - k).max(0.0) - 2.0 * (s - k - 0.5 * l).max(0.0) + (s - k - l).max(0.0)
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    LaplaceInversion,
    ClosedForm,
}

/// Risk-neutral market with two-sided exponential jumps in rate form.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DEModel {
    pub rho: f64,
    pub gamma: f64,
    pub r: f64,
    pub lambda: f64,
}

impl DEModel {
    pub fn new(rho: f64, gamma: f64, r: f64) -> Result<Self> {
        if !(rho.is_finite() && gamma.is_finite()) {
            return Err(Error::InvalidParameter("ρ and γ must be finite".into()));
        }
        if !(rho - 1.0 > 0.0 && rho - 1.0 < gamma) {
            return Err(Error::InvalidParameter(format!("0<ρ−1<γ violated (ρ = {rho}, γ = {gamma})")));
        }
        if !(r > 0.0 && r.is_finite()) {
            return Err(Error::InvalidParameter(format!("rate must be positive, got {r}")));
        }
        let lambda = r * (rho - 1.0) * (gamma + 1.0) / (gamma - rho + 1.0);
        Ok(DEModel { rho, gamma, r, lambda })
    }

    /// Continuous-trading parameterisation `γ = ρ − 1 + 2r/σ²`.
    pub fn from_sigma(rho: f64, sigma: f64, r: f64) -> Result<Self> {
        if !(sigma > 0.0 && sigma.is_finite()) {
            return Err(Error::InvalidParameter(format!("σ must be positive, got {sigma}")));
        }
        Self::new(rho, rho - 1.0 + 2.0 * r / (sigma * sigma), r)
    }

    pub fn from_density(d: &JumpDensity, r: f64) -> Result<Self> {
        let (rho, gamma) = d
            .rates()
            .ok_or(Error::UnsupportedFamily("exact pricing needs the exponential density"))?;
        Self::new(rho, gamma, r)
    }

    pub fn density(&self) -> JumpDensity {
        JumpDensity::from_rates(self.rho, self.gamma).expect("validated rates")
    }

    pub fn market_params(&self) -> MarketParams {
        MarketParams { r: self.r, density: self.density(), lambda: self.lambda, risk_neutral: true }
    }

    /// `ε = γ − ρ + 1`.
    pub fn epsilon(&self) -> f64 {
        self.gamma - self.rho + 1.0
    }

    /// Continuous-trading volatility `σ = √(2r/ε)`.
    pub fn sigma(&self) -> f64 {
        (2.0 * self.r / self.epsilon()).sqrt()
    }
}

/// Roots `β±(s)` of `β² + (γ−ρ)β − γρ(r+s)/(λ+r+s) = 0` with `Re β₊ > Re β₋`.
pub fn beta_pm(m: &DEModel, s: Complex64) -> Result<(Complex64, Complex64)> {
    let (b_plus, b_minus, _) = beta_with_gap(m, s)?;
    Ok((b_plus, b_minus))
}

/// `(β₊, β₋, β₊ − β₋)`, the gap taken straight from the radical.
fn beta_with_gap(m: &DEModel, s: Complex64) -> Result<(Complex64, Complex64, Complex64)> {
    let DEModel { rho, gamma, r, lambda } = *m;
    let denom = lambda + r + s;
    let disc = (gamma + rho) * (gamma + rho) - 4.0 * lambda * gamma * rho / denom;
    let root = disc.sqrt();
    let branch_error = Err(Error::BranchInconsistency { re: s.re, im: s.im });
    if !(root.re >= 0.0) {
        return branch_error;
    }
    let half = -0.5 * (gamma - rho);
    let product = -gamma * rho * (r + s) / denom;
    let plus = half + 0.5 * root;
    let minus = half - 0.5 * root;
    // The larger root is free of cancellation; recover the other from Vieta.
    let (b_plus, b_minus) = if plus.norm() >= minus.norm() {
        (plus, product / plus)
    } else {
        (product / minus, minus)
    };
    let scale = (gamma + rho).max(root.norm()).max(1.0);
    let sum_err = (b_plus + b_minus + (gamma - rho)).norm();
    let prod_err = (b_plus * b_minus - product).norm();
    if !(sum_err <= 1e-12 * scale && prod_err <= 1e-12 * scale * scale && b_plus.re > b_minus.re) {
        return branch_error;
    }
    Ok((b_plus, b_minus, root))
}

/// Laplace transform of the binary call price in `t̄`.
pub fn binary_call_laplace(m: &DEModel, k: f64, x: f64, s: Complex64) -> Result<Complex64> {
    let (b_plus, b_minus, gap) = beta_with_gap(m, s)?;
    let lam = m.lambda;
    let rs = m.r + s;
    let p = lam / ((lam + rs) * rs);
    let y = x - k;
    if y < 0.0 {
        Ok(-b_minus / gap * p * (b_plus * y).exp())
    } else {
        Ok(-b_plus / gap * p * (b_minus * y).exp() + 1.0 / rs)
    }
}

/// Laplace transform of the vanilla call price in `t̄`.
pub fn vanilla_call_laplace(m: &DEModel, strike: f64, x: f64, s: Complex64) -> Result<Complex64> {
    let (b_plus, b_minus, gap) = beta_with_gap(m, s)?;
    let lam = m.lambda;
    let rs = m.r + s;
    let coef = |b: Complex64| (lam * b / rs + (lam + m.r) * (1.0 - b) / s) * strike / ((lam + rs) * gap);
    let y = x - strike.ln();
    if y < 0.0 {
        Ok(coef(b_minus) * (b_plus * y).exp())
    } else {
        Ok(coef(b_plus) * (b_minus * y).exp() + x.exp() / s - strike / rs)
    }
}

/// Interval holding all but a negligible part of `e^{-(u-c)²/c}` on `u ≥ 0`.
pub(crate) fn bessel_window(c: f64) -> (f64, f64) {
    let w = 15.0 * c.sqrt();
    ((c - w).max(0.0), c + w + 1.0)
}

/// `∫₀^∞ 2 e^{-2u}I₁(2u) e^{-(u-c)²/c} N(arg(u)) du`; this equals
/// `e^{-c}∫ 2I₁(2u)e^{-u²/c}N(arg) du`.
fn bessel_normal_integral<F: Fn(f64) -> f64>(c: f64, arg: F, spec: &QuadSpec) -> Result<f64> {
    if c <= 0.0 {
        return Ok(0.0);
    }
    let (lo, hi) = bessel_window(c);
    let f = |u: f64| {
        if u == 0.0 {
            return 0.0;
        }
        let d = u - c;
        2.0 * bessel_i1_scaled(2.0 * u) * (-d * d / c).exp() * normal_cdf(arg(u))
    };
    Ok(integrate_interval(f, lo, hi, 8, spec)?.value)
}

fn check_inputs(x: f64, t_bar: f64) -> Result<()> {
    if !x.is_finite() {
        return Err(Error::InvalidParameter(format!("log-price must be finite, got {x}")));
    }
    if !(t_bar >= 0.0 && t_bar.is_finite()) {
        return Err(Error::InvalidParameter(format!("maturity must be nonnegative, got {t_bar}")));
    }
    Ok(())
}

/// Binary call paying 1 when `x ≥ k` at expiry. At `t̄ = 0` both methods
/// return the payoff.
pub fn binary_call_price(
    m: &DEModel,
    strike: f64,
    t_bar: f64,
    x: f64,
    method: Method,
    spec: &QuadSpec,
) -> Result<f64> {
    check_inputs(x, t_bar)?;
    let k = strike.ln();
    let indicator = f64::from(x >= k);
    if t_bar == 0.0 {
        return Ok(indicator);
    }
    match method {
        Method::LaplaceInversion => {
            let f = LaplaceFn::new(|s| binary_call_laplace(m, k, x, s), 0.0);
            laplace_invert(&f, t_bar, spec)
        }
        Method::ClosedForm => {
            let DEModel { rho, gamma, r, lambda } = *m;
            let c = lambda * t_bar;
            let q = (0.5 * gamma * rho * c).sqrt();
            let y = x - k;
            let integral =
                bessel_normal_integral(c, |u| y * q / u + 0.5 * (gamma - rho) * u / q, spec)?;
            Ok((-(lambda + r) * t_bar).exp() * indicator + (-r * t_bar).exp() * integral)
        }
    }
}

/// Vanilla call with strike `K`.
pub fn vanilla_call_price(
    m: &DEModel,
    strike: f64,
    t_bar: f64,
    x: f64,
    method: Method,
    spec: &QuadSpec,
) -> Result<f64> {
    check_inputs(x, t_bar)?;
    let k = strike.ln();
    let s = x.exp();
    let intrinsic = if x >= k { s - strike } else { 0.0 };
    if t_bar == 0.0 {
        return Ok(intrinsic);
    }
    match method {
        Method::LaplaceInversion => {
            let f = LaplaceFn::new(|z| vanilla_call_laplace(m, strike, x, z), 0.0);
            let scaled = QuadSpec { abs_tol: spec.abs_tol * strike.max(1.0), ..*spec };
            laplace_invert(&f, t_bar, &scaled)
        }
        Method::ClosedForm => {
            let DEModel { rho, gamma, r, lambda } = *m;
            let c = lambda * t_bar;
            let c_total = (lambda + r) * t_bar;
            let q = (0.5 * gamma * rho * c).sqrt();
            let y = x - k;
            let spot_spec = QuadSpec { abs_tol: spec.abs_tol / s.max(1.0), ..*spec };
            let strike_spec = QuadSpec { abs_tol: spec.abs_tol / strike.max(1.0), ..*spec };
            let spot_term = bessel_normal_integral(
                c_total,
                |u| y * q / u + 0.5 * (gamma - rho + 2.0) * u / q,
                &spot_spec,
            )?;
            let strike_term =
                bessel_normal_integral(c, |u| y * q / u + 0.5 * (gamma - rho) * u / q, &strike_spec)?;
            Ok((-c_total).exp() * intrinsic + s * spot_term
                - strike * (-r * t_bar).exp() * strike_term)
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ParityKind {
    Binary,
    Vanilla,
}

/// Put price from the matching call through put-call parity.
pub fn put_price_from_parity(call: f64, kind: ParityKind, x: f64, strike: f64, r: f64, t_bar: f64) -> f64 {
    let discount = (-r * t_bar).exp();
    match kind {
        ParityKind::Binary => discount - call,
        ParityKind::Vanilla => call + strike * discount - x.exp(),
    }
}

/// Mean and variance of `X(t) − X(t₀)` over a horizon `dt`.
pub fn log_return_moments(m: &DEModel, dt: f64) -> (f64, f64) {
    let DEModel { rho, gamma, lambda, .. } = *m;
    let m1 = lambda * dt * (gamma - rho) / (gamma * rho);
    let m2 = 2.0 * lambda * dt * (gamma * gamma - gamma * rho + rho * rho) / (gamma * gamma * rho * rho);
    (m1, m2)
}

/// European price of any supported payoff: puts by parity, the butterfly as
/// a combination of three vanilla calls.
pub fn european_price(m: &DEModel, c: &Contract, x: f64, method: Method, spec: &QuadSpec) -> Result<f64> {
    c.validate()?;
    let (k, t) = (c.strike, c.t_bar);
    match c.payoff {
        PayoffKind::BinaryCall => binary_call_price(m, k, t, x, method, spec),
        PayoffKind::VanillaCall => vanilla_call_price(m, k, t, x, method, spec),
        PayoffKind::BinaryPut => {
            if t == 0.0 {
                return Ok(c.payoff_at(x));
            }
            let call = binary_call_price(m, k, t, x, method, spec)?;
            Ok(put_price_from_parity(call, ParityKind::Binary, x, k, m.r, t))
        }
        PayoffKind::VanillaPut => {
            let call = vanilla_call_price(m, k, t, x, method, spec)?;
            Ok(put_price_from_parity(call, ParityKind::Vanilla, x, k, m.r, t))
        }
        PayoffKind::Portfolio => {
            let v = |strike: f64| vanilla_call_price(m, strike, t, x, method, spec);
            Ok(v(k)? - 2.0 * v(k + 0.5 * c.l)? + v(k + c.l)?)
        }
    }
}
