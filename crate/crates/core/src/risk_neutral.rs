//! Risk-neutral Poisson intensity and model admissibility.

use crate::densities::{Family, JumpDensity};
use crate::error::{Error, Result};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

/// Rate, jump density and Poisson intensity, all in per-year units.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MarketParams {
    pub r: f64,
    pub density: JumpDensity,
    pub lambda: f64,
    /// False when λ was supplied by the caller instead of derived.
    pub risk_neutral: bool,
}

impl MarketParams {
    /// Market with the risk-neutral intensity `λ = r / (h̃(−i) − 1)`.
    pub fn risk_neutral(r: f64, density: JumpDensity) -> Result<Self> {
        let lambda = risk_neutral_intensity(r, density)?;
        Ok(MarketParams { r, density, lambda, risk_neutral: true })
    }

    /// Market with a caller-chosen intensity; prices are then not arbitrage-free.
    pub fn with_lambda(r: f64, density: JumpDensity, lambda: f64) -> Result<Self> {
        if !(r >= 0.0 && r.is_finite()) {
            return Err(Error::InvalidParameter(format!("rate must be nonnegative, got {r}")));
        }
        if !(lambda > 0.0 && lambda.is_finite()) {
            return Err(Error::InvalidParameter(format!("λ must be positive, got {lambda}")));
        }
        Ok(MarketParams { r, density, lambda, risk_neutral: false })
    }
}

/// `E[e^{ΔX}] = h̃(−i)`.
pub fn exp_moment(d: &JumpDensity) -> Result<f64> {
    if let Some((rho, gamma)) = d.rates() {
        if rho <= 1.0 {
            return Err(Error::DivergentMoment(format!(
                "E[e^J] diverges for the exponential density unless a < 1 (a = {})",
                d.a()
            )));
        }
        return Ok(gamma * rho / ((rho - 1.0) * (gamma + 1.0)));
    }
    match d.char_fn(Complex64::new(0.0, -1.0)) {
        Ok(v) if v.re.is_finite() && v.re > 0.0 => Ok(v.re),
        _ => Err(Error::DivergentMoment(format!("E[e^J] is not finite for {d}"))),
    }
}

/// `h̃(−i) − 1` without cancellation where a closed form exists.
fn exp_moment_excess(d: &JumpDensity) -> Result<f64> {
    match d.family() {
        Family::Exponential => {
            let (rho, gamma) = d.rates().expect("exponential");
            exp_moment(d)?;
            Ok((gamma - rho + 1.0) / ((rho - 1.0) * (gamma + 1.0)))
        }
        Family::Gaussian => Ok((d.a() + 0.5 * d.b() * d.b()).exp_m1()),
        _ => Ok(exp_moment(d)? - 1.0),
    }
}

/// `λ = r / (h̃(−i) − 1)`.
pub fn risk_neutral_intensity(r: f64, d: JumpDensity) -> Result<f64> {
    if !(r >= 0.0 && r.is_finite()) {
        return Err(Error::InvalidParameter(format!("rate must be nonnegative, got {r}")));
    }
    let excess = exp_moment_excess(&d)?;
    if r == 0.0 {
        if excess.abs() <= 1e-14 {
            return Err(Error::ArbitrarySojourn);
        }
        return Err(Error::InadmissibleDensity(format!(
            "r = 0 forces λ = 0 unless h̃(−i) = 1 (h̃(−i) − 1 = {excess:e})"
        )));
    }
    if excess <= 0.0 {
        return Err(Error::InadmissibleDensity(format!(
            "h̃(−i) = {} must exceed 1 for a positive intensity",
            1.0 + excess
        )));
    }
    Ok(r / excess)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

/// Pass/fail report for each admissibility condition.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Diagnostics {
    pub checks: Vec<Check>,
}

impl Diagnostics {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn failures(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| !c.passed)
    }

    fn push(&mut self, name: &'static str, passed: bool, detail: String) {
        self.checks.push(Check { name, passed, detail });
    }
}

pub fn validate(params: &MarketParams) -> Diagnostics {
    let mut diag = Diagnostics { checks: Vec::new() };
    let MarketParams { r, density, lambda, risk_neutral } = *params;
    diag.push("r >= 0", r >= 0.0 && r.is_finite(), format!("r = {r}"));
    diag.push("λ > 0", lambda > 0.0 && lambda.is_finite(), format!("λ = {lambda}"));

    if let Some((rho, gamma)) = density.rates() {
        diag.push(
            "0<ρ−1<γ",
            rho - 1.0 > 0.0 && rho - 1.0 < gamma,
            format!("ρ = {rho}, γ = {gamma}"),
        );
    }

    match exp_moment_excess(&density) {
        Ok(excess) => {
            diag.push(
                "1<h̃(−i)<∞",
                excess > 0.0,
                format!("h̃(−i) = {}", 1.0 + excess),
            );
            let consistent = excess > 0.0 && {
                let want = r / excess;
                (lambda - want).abs() <= 1e-12 * want.max(1.0)
            };
            let detail = if risk_neutral {
                format!("λ = {lambda}, r/(h̃(−i)−1) = {}", r / excess)
            } else {
                format!("λ = {lambda} was overridden; r/(h̃(−i)−1) = {}", r / excess)
            };
            diag.push("λ = r/(h̃(−i)−1)", consistent, detail);
        }
        Err(e) => diag.push("1<h̃(−i)<∞", false, e.to_string()),
    }
    diag
}
