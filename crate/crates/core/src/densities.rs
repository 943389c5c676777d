//! Jump-size densities: the two-sided exponential and its comparison family,
//! plus the ν = 1/2 truncated Pareto (KoBoL) jump measure.
//!
//! Every family is described by two parameters `(a, b)` in log-return units.
//! Characteristic functions follow the convention `h̃(ω) = ∫ e^{iωx} h(x) dx`.

use crate::error::{Error, Result};
use crate::numerics::special::{gamma, normal_cdf, EULER_GAMMA};
use num_complex::Complex64;
use rand::Rng;
use rand_distr::{Exp1, Open01, StandardNormal};
use serde::{Deserialize, Serialize};
use std::f64::consts::{E, PI};
use std::fmt;
use std::str::FromStr;

const SQRT_PI: f64 = 1.772_453_850_905_516;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Family {
    #[serde(rename = "exp", alias = "exponential")]
    Exponential,
    #[serde(rename = "discrete")]
    Discrete,
    #[serde(rename = "constant", alias = "uniform")]
    Constant,
    #[serde(rename = "gaussian", alias = "normal")]
    Gaussian,
    #[serde(rename = "logistic")]
    Logistic,
    #[serde(rename = "gumbel")]
    Gumbel,
    #[serde(rename = "pareto", alias = "pareto-half")]
    ParetoHalf,
}

impl Family {
    pub const ALL: [Family; 7] = [
        Family::Exponential,
        Family::Discrete,
        Family::Constant,
        Family::Gaussian,
        Family::Logistic,
        Family::Gumbel,
        Family::ParetoHalf,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Family::Exponential => "exp",
            Family::Discrete => "discrete",
            Family::Constant => "constant",
            Family::Gaussian => "gaussian",
            Family::Logistic => "logistic",
            Family::Gumbel => "gumbel",
            Family::ParetoHalf => "pareto",
        }
    }

    /// Whether the family is a probability density (the Pareto jump measure is not).
    pub fn is_integrable(&self) -> bool {
        !matches!(self, Family::ParetoHalf)
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Family {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "exp" | "exponential" => Ok(Family::Exponential),
            "discrete" => Ok(Family::Discrete),
            "constant" | "uniform" => Ok(Family::Constant),
            "gaussian" | "normal" => Ok(Family::Gaussian),
            "logistic" => Ok(Family::Logistic),
            "gumbel" => Ok(Family::Gumbel),
            "pareto" | "pareto-half" => Ok(Family::ParetoHalf),
            other => Err(Error::InvalidParameter(format!("unknown density family '{other}'"))),
        }
    }
}

/// Mean and variance of a single jump.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Moments {
    pub mu1: f64,
    pub mu2: f64,
}

/// A jump-size distribution with its two parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawDensity")]
pub struct JumpDensity {
    family: Family,
    a: f64,
    b: f64,
}

#[derive(Deserialize)]
struct RawDensity {
    family: Family,
    a: f64,
    b: f64,
}

impl TryFrom<RawDensity> for JumpDensity {
    type Error = Error;

    fn try_from(raw: RawDensity) -> Result<Self> {
        JumpDensity::new(raw.family, raw.a, raw.b)
    }
}

impl JumpDensity {
    pub fn new(family: Family, a: f64, b: f64) -> Result<Self> {
        if !(a.is_finite() && b.is_finite()) {
            return Err(Error::InvalidParameter(format!("{family}: parameters must be finite")));
        }
        let ok = match family {
            Family::Exponential => a > 0.0 && b > 0.0,
            // a ∈ {0, 1} is the degenerate one-sided walk.
            Family::Discrete => (0.0..=1.0).contains(&a) && b > 0.0,
            Family::Constant => a < b,
            Family::Gaussian | Family::Logistic | Family::Gumbel => b > 0.0,
            Family::ParetoHalf => a > 0.0 && a < 1.0 && b > 0.0 && b < 1.0,
        };
        if !ok {
            let rule = match family {
                Family::Exponential => "a > 0 and b > 0",
                Family::Discrete => "0 <= a <= 1 and b > 0",
                Family::Constant => "a < b",
                Family::Gaussian | Family::Logistic | Family::Gumbel => "b > 0",
                Family::ParetoHalf => "0 < a < 1 and 0 < b < 1",
            };
            return Err(Error::InvalidParameter(format!(
                "{family}(a = {a}, b = {b}) violates {rule}"
            )));
        }
        Ok(JumpDensity { family, a, b })
    }

    pub fn exponential(a: f64, b: f64) -> Result<Self> {
        Self::new(Family::Exponential, a, b)
    }

    /// Two-sided exponential in rate form: `ρ` is the decay rate of up-jumps,
    /// `γ` of down-jumps.
    pub fn from_rates(rho: f64, gamma: f64) -> Result<Self> {
        Self::new(Family::Exponential, 1.0 / rho, 1.0 / gamma)
    }

    pub fn discrete(a: f64, b: f64) -> Result<Self> {
        Self::new(Family::Discrete, a, b)
    }

    pub fn constant(a: f64, b: f64) -> Result<Self> {
        Self::new(Family::Constant, a, b)
    }

    pub fn gaussian(a: f64, b: f64) -> Result<Self> {
        Self::new(Family::Gaussian, a, b)
    }

    pub fn logistic(a: f64, b: f64) -> Result<Self> {
        Self::new(Family::Logistic, a, b)
    }

    pub fn gumbel(a: f64, b: f64) -> Result<Self> {
        Self::new(Family::Gumbel, a, b)
    }

    pub fn pareto_half(a: f64, b: f64) -> Result<Self> {
        Self::new(Family::ParetoHalf, a, b)
    }

    pub fn family(&self) -> Family {
        self.family
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn b(&self) -> f64 {
        self.b
    }

    /// `(ρ, γ) = (1/a, 1/b)` for the two-sided exponential.
    pub fn rates(&self) -> Option<(f64, f64)> {
        (self.family == Family::Exponential).then(|| (1.0 / self.a, 1.0 / self.b))
    }

    /// Characteristic function `h̃(ω)`, defined inside the strip where the
    /// transform integral converges.
    pub fn char_fn(&self, omega: Complex64) -> Result<Complex64> {
        if !(omega.re.is_finite() && omega.im.is_finite()) {
            return Err(Error::Domain { re: omega.re, im: omega.im });
        }
        let (a, b) = (self.a, self.b);
        let i = Complex64::i();
        let outside = |lo: f64, hi: f64| omega.im <= lo || omega.im >= hi;
        let domain = Err(Error::Domain { re: omega.re, im: omega.im });
        match self.family {
            Family::Exponential => {
                if outside(-1.0 / a, 1.0 / b) {
                    return domain;
                }
                Ok(1.0 / ((1.0 - i * omega * a) * (1.0 + i * omega * b)))
            }
            Family::Discrete => Ok(a * (i * omega * b).exp() + (1.0 - a) * (-i * omega * b).exp()),
            Family::Constant => {
                let z = i * omega * (b - a);
                let ratio = if z.norm() < 1e-4 {
                    1.0 + z * (0.5 + z * (1.0 / 6.0 + z / 24.0))
                } else {
                    (z.exp() - 1.0) / z
                };
                Ok((i * omega * a).exp() * ratio)
            }
            Family::Gaussian => Ok((-0.5 * b * b * omega * omega + i * a * omega).exp()),
            Family::Logistic => {
                if outside(-1.0 / b, 1.0 / b) {
                    return domain;
                }
                let ibw = i * b * omega;
                Ok((i * a * omega).exp() * gamma(1.0 - ibw) * gamma(1.0 + ibw))
            }
            Family::Gumbel => {
                if outside(-1.0 / b, f64::INFINITY) {
                    return domain;
                }
                Ok((i * a * omega).exp() * gamma(1.0 - i * b * omega))
            }
            Family::ParetoHalf => {
                if outside(-1.0 / b, 1.0 / b) {
                    return domain;
                }
                let ibw = i * omega * b;
                Ok(1.0 - 2.0 * SQRT_PI * (a * (1.0 - ibw).sqrt() + (1.0 - a) * (1.0 + ibw).sqrt() - 1.0))
            }
        }
    }

    /// `h̃` on the real axis; real frequencies never hit a pole.
    pub fn char_fn_real(&self, omega: f64) -> Complex64 {
        self.char_fn(Complex64::new(omega, 0.0))
            .expect("characteristic function is finite on the real axis")
    }

    pub fn mean_var(&self) -> Moments {
        let (a, b) = (self.a, self.b);
        let (mu1, mu2) = match self.family {
            Family::Exponential => (a - b, a * a + b * b),
            Family::Discrete => ((2.0 * a - 1.0) * b, 4.0 * a * (1.0 - a) * b * b),
            Family::Constant => (0.5 * (a + b), (b - a) * (b - a) / 12.0),
            Family::Gaussian => (a, b * b),
            Family::Logistic => (a, PI * PI * b * b / 3.0),
            Family::Gumbel => (a + b * EULER_GAMMA, PI * PI * b * b / 6.0),
            Family::ParetoHalf => {
                let mu1 = SQRT_PI * (2.0 * a - 1.0) * b;
                (mu1, 0.5 * SQRT_PI * b * b - mu1 * mu1)
            }
        };
        Moments { mu1, mu2 }
    }

    /// The member of `family` with the given mean and variance.
    pub fn fit_from_moments(family: Family, m: Moments) -> Result<Self> {
        let Moments { mu1, mu2 } = m;
        let infeasible = Err(Error::InfeasibleMoments { family: family.name(), mu1, mu2 });
        if !(mu2 > 0.0 && mu1.is_finite() && mu2.is_finite()) {
            return infeasible;
        }
        let (a, b) = match family {
            Family::Exponential => {
                if mu2 <= mu1 * mu1 {
                    return infeasible;
                }
                let a = 0.5 * (mu1 + (2.0 * mu2 - mu1 * mu1).sqrt());
                (a, a - mu1)
            }
            Family::Discrete => {
                let b = (mu2 + mu1 * mu1).sqrt();
                (0.5 * (1.0 + mu1 / b), b)
            }
            Family::Constant => {
                let half = (3.0 * mu2).sqrt();
                (mu1 - half, mu1 + half)
            }
            Family::Gaussian => (mu1, mu2.sqrt()),
            Family::Logistic => (mu1, (3.0 * mu2).sqrt() / PI),
            Family::Gumbel => {
                let b = (6.0 * mu2).sqrt() / PI;
                (mu1 - b * EULER_GAMMA, b)
            }
            Family::ParetoHalf => {
                let b = (2.0 * (mu2 + mu1 * mu1) / SQRT_PI).sqrt();
                (0.5 * (1.0 + mu1 / (SQRT_PI * b)), b)
            }
        };
        Self::new(family, a, b)
    }

    /// Jump density (Lévy density for the Pareto family). Discrete jumps are
    /// atoms and have no density; see [`JumpDensity::atoms`].
    pub fn pdf(&self, x: f64) -> f64 {
        let (a, b) = (self.a, self.b);
        match self.family {
            Family::Exponential => {
                let tail = if x >= 0.0 { (-x / a).exp() } else { (x / b).exp() };
                tail / (a + b)
            }
            Family::Discrete => 0.0,
            Family::Constant => {
                if (a..=b).contains(&x) {
                    1.0 / (b - a)
                } else {
                    0.0
                }
            }
            Family::Gaussian => {
                let z = (x - a) / b;
                (-0.5 * z * z).exp() / (b * (2.0 * PI).sqrt())
            }
            Family::Logistic => {
                let e = (-((x - a) / b).abs()).exp();
                e / (b * (1.0 + e) * (1.0 + e))
            }
            Family::Gumbel => {
                let z = (x - a) / b;
                (-z - (-z).exp()).exp() / b
            }
            Family::ParetoHalf => {
                if x == 0.0 {
                    return f64::INFINITY;
                }
                let weight = if x < 0.0 { 1.0 - a } else { a };
                b.sqrt() * weight * (-x.abs() / b).exp() / x.abs().powf(1.5)
            }
        }
    }

    /// Point masses `(location, probability)` of the discrete family.
    pub fn atoms(&self) -> Option<[(f64, f64); 2]> {
        (self.family == Family::Discrete).then(|| [(self.b, self.a), (-self.b, 1.0 - self.a)])
    }

    /// Cumulative distribution function of the jump size.
    pub fn cdf(&self, x: f64) -> Result<f64> {
        let (a, b) = (self.a, self.b);
        Ok(match self.family {
            Family::Exponential => {
                if x >= 0.0 {
                    1.0 - a / (a + b) * (-x / a).exp()
                } else {
                    b / (a + b) * (x / b).exp()
                }
            }
            Family::Discrete => {
                if x >= b {
                    1.0
                } else if x >= -b {
                    1.0 - a
                } else {
                    0.0
                }
            }
            Family::Constant => ((x - a) / (b - a)).clamp(0.0, 1.0),
            Family::Gaussian => normal_cdf((x - a) / b),
            Family::Logistic => 1.0 / (1.0 + (-(x - a) / b).exp()),
            Family::Gumbel => (-(-(x - a) / b).exp()).exp(),
            Family::ParetoHalf => return Err(Error::UnsupportedFamily("pareto has no normalizable density (infinite activity)")),
        })
    }

    /// Draws one jump. The Pareto jump measure has infinite activity and
    /// cannot be sampled.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<f64> {
        Ok(self.sampler()?.draw(rng))
    }

    pub fn sampler(&self) -> Result<JumpSampler> {
        if self.family == Family::ParetoHalf {
            return Err(Error::UnsupportedFamily("pareto has infinite activity and cannot be sampled"));
        }
        Ok(JumpSampler { density: *self })
    }

    /// `(D, q)` with `|h̃(ω)| ≤ D·|ω|^{-q}` for all real `ω ≠ 0`, when the
    /// characteristic function decays.
    pub(crate) fn char_fn_decay(&self) -> Option<(f64, f64)> {
        let (a, b) = (self.a, self.b);
        match self.family {
            Family::Exponential => Some((1.0 / (a * b), 2.0)),
            Family::Constant => Some((2.0 / (b - a), 1.0)),
            // sup y² e^{-y²/2} = 2/e
            Family::Gaussian => Some((2.0 / (E * b * b), 2.0)),
            // y/sinh y ≤ 6/y², since sinh y ≥ y³/6
            Family::Logistic => Some((6.0 / (PI * PI * b * b), 2.0)),
            // √(y/sinh y) ≤ √120/y², since sinh y ≥ y⁵/120
            Family::Gumbel => Some((120f64.sqrt() / (PI * PI * b * b), 2.0)),
            Family::Discrete | Family::ParetoHalf => None,
        }
    }
}

impl fmt::Display for JumpDensity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}(a={}, b={})", self.family, self.a, self.b)
    }
}

/// Infallible sampler for a samplable density.
#[derive(Debug, Clone, Copy)]
pub struct JumpSampler {
    density: JumpDensity,
}

impl JumpSampler {
    pub fn density(&self) -> &JumpDensity {
        &self.density
    }

    pub fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let JumpDensity { family, a, b } = self.density;
        match family {
            Family::Exponential => {
                let e: f64 = rng.sample(Exp1);
                if rng.random::<f64>() * (a + b) < a {
                    a * e
                } else {
                    -b * e
                }
            }
            Family::Discrete => {
                if rng.random::<f64>() < a {
                    b
                } else {
                    -b
                }
            }
            Family::Constant => a + (b - a) * rng.random::<f64>(),
            Family::Gaussian => a + b * rng.sample::<f64, _>(StandardNormal),
            Family::Logistic => {
                let u: f64 = rng.sample(Open01);
                a + b * (u / (1.0 - u)).ln()
            }
            Family::Gumbel => {
                let u: f64 = rng.sample(Open01);
                a - b * (-u.ln()).ln()
            }
            Family::ParetoHalf => unreachable!("pareto sampler is never constructed"),
        }
    }
}
