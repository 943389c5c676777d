//! Adaptive Gauss–Kronrod (7/15) quadrature on finite, semi-infinite and
//! whole-line domains.

use crate::error::{Error, Result};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::ops::{Add, Mul, Sub};

/// Tolerances and budget for a numerical integration or inversion.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadSpec {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_evals: usize,
}

impl Default for QuadSpec {
    fn default() -> Self {
        QuadSpec {
            rel_tol: 1e-9,
            abs_tol: 1e-10,
            max_evals: 2_000_000,
        }
    }
}

impl QuadSpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.rel_tol > 0.0 && self.abs_tol > 0.0) {
            return Err(Error::InvalidParameter(
                "quadrature tolerances must be positive".into(),
            ));
        }
        if self.max_evals < 15 {
            return Err(Error::InvalidParameter("max_evals below one panel".into()));
        }
        Ok(())
    }

    pub fn with_abs_tol(mut self, abs_tol: f64) -> Self {
        self.abs_tol = abs_tol;
        self
    }
}

/// Values an integrand may return.
pub trait QuadValue:
    Copy + Add<Output = Self> + Sub<Output = Self> + Mul<f64, Output = Self>
{
    fn zero() -> Self;
    fn magnitude(&self) -> f64;
}

impl QuadValue for f64 {
    fn zero() -> Self {
        0.0
    }
    fn magnitude(&self) -> f64 {
        self.abs()
    }
}

impl QuadValue for Complex64 {
    fn zero() -> Self {
        Complex64::new(0.0, 0.0)
    }
    fn magnitude(&self) -> f64 {
        self.norm()
    }
}

/// Result of an adaptive integration.
#[derive(Debug, Clone, Copy)]
pub struct Estimate<T> {
    pub value: T,
    pub error: f64,
    pub evals: usize,
}

// Nodes and weights to full published precision.
#[allow(clippy::excessive_precision)]
const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_329,
    0.949_107_912_342_758_524_526_189_684_047_851,
    0.864_864_423_359_769_072_789_712_788_640_926,
    0.741_531_185_599_394_439_863_864_773_280_788,
    0.586_087_235_467_691_130_294_144_845_693_013,
    0.405_845_151_377_397_166_906_606_412_076_961,
    0.207_784_955_007_898_467_600_689_403_773_245,
    0.0,
];
#[allow(clippy::excessive_precision)]
const WGK: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_970,
    0.063_092_092_629_978_553_290_700_663_189_204,
    0.104_790_010_322_250_183_839_876_322_541_518,
    0.140_653_259_715_525_918_745_189_590_510_238,
    0.169_004_726_639_267_902_826_583_426_598_550,
    0.190_350_578_064_785_409_913_256_402_421_014,
    0.204_432_940_075_298_892_414_161_999_234_649,
    0.209_482_141_084_727_828_012_999_174_891_714,
];
// Gauss weights for the odd-indexed Kronrod nodes.
#[allow(clippy::excessive_precision)]
const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

struct Panel<T> {
    a: f64,
    b: f64,
    value: T,
    error: f64,
}

impl<T> PartialEq for Panel<T> {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}
impl<T> Eq for Panel<T> {}
impl<T> PartialOrd for Panel<T> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl<T> Ord for Panel<T> {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error)
    }
}

fn gk15<T: QuadValue, F: FnMut(f64) -> T>(f: &mut F, a: f64, b: f64) -> Panel<T> {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut kron = fc * WGK[7];
    let mut gauss = fc * WG[3];
    for j in 0..7 {
        let dx = h * XGK[j];
        let sum = f(c - dx) + f(c + dx);
        kron = kron + sum * WGK[j];
        if j % 2 == 1 {
            gauss = gauss + sum * WG[j / 2];
        }
    }
    let value = kron * h;
    let error = ((kron - gauss) * h).magnitude();
    Panel { a, b, value, error }
}

/// Adaptive integration over the union of the given consecutive panels.
///
/// The worst panel (by Kronrod–Gauss error estimate) is bisected until the
/// summed error falls below `max(abs_tol, rel_tol·|I|)`.
pub fn integrate_panels<T: QuadValue, F: FnMut(f64) -> T>(
    mut f: F,
    edges: &[f64],
    spec: &QuadSpec,
) -> Result<Estimate<T>> {
    spec.validate()?;
    let mut heap = BinaryHeap::new();
    let mut evals = 0;
    for w in edges.windows(2) {
        if w[1] > w[0] {
            heap.push(gk15(&mut f, w[0], w[1]));
            evals += 15;
        }
    }
    loop {
        let (mut value, mut error) = (T::zero(), 0.0);
        for p in heap.iter() {
            value = value + p.value;
            error += p.error;
        }
        let target = spec.abs_tol.max(spec.rel_tol * value.magnitude());
        if error <= target {
            return Ok(Estimate { value, error, evals });
        }
        if evals + 30 > spec.max_evals {
            return Err(Error::AccuracyNotReached {
                estimate: value.magnitude(),
                error_bound: error,
            });
        }
        let worst = match heap.pop() {
            Some(p) => p,
            None => return Ok(Estimate { value, error, evals }),
        };
        let mid = 0.5 * (worst.a + worst.b);
        if mid <= worst.a || mid >= worst.b {
            // Panel cannot be split further in floating point.
            return Err(Error::AccuracyNotReached {
                estimate: value.magnitude(),
                error_bound: error,
            });
        }
        heap.push(gk15(&mut f, worst.a, mid));
        heap.push(gk15(&mut f, mid, worst.b));
        evals += 30;
    }
}

/// Adaptive integral over a finite interval, starting from `pieces` equal panels.
pub fn integrate_interval<T: QuadValue, F: FnMut(f64) -> T>(
    f: F,
    a: f64,
    b: f64,
    pieces: usize,
    spec: &QuadSpec,
) -> Result<Estimate<T>> {
    let n = pieces.max(1);
    let edges: Vec<f64> = (0..=n)
        .map(|j| if j == n { b } else { a + (b - a) * j as f64 / n as f64 })
        .collect();
    integrate_panels(f, &edges, spec)
}

/// `∫₀^∞ g(u) du` for integrands with Gaussian-type decay beyond `scale`.
///
/// `[0, scale]` is split into equal panels; geometric panels are appended
/// beyond it until two consecutive ones contribute below `abs_tol·1e-3`.
pub fn integrate_semi_infinite<F: FnMut(f64) -> f64>(
    mut g: F,
    scale: f64,
    spec: &QuadSpec,
) -> Result<Estimate<f64>> {
    if !(scale > 0.0 && scale.is_finite()) {
        return Err(Error::InvalidParameter(format!("scale must be positive, got {scale}")));
    }
    let n = 32;
    let mut edges: Vec<f64> = (0..=n).map(|j| scale * j as f64 / n as f64).collect();
    let mut quiet = 0;
    let mut lo = scale;
    let mut width = scale;
    let mut probes = 0;
    while quiet < 2 {
        let hi = lo + width;
        let p = gk15(&mut g, lo, hi);
        probes += 15;
        if p.value.abs() + p.error < spec.abs_tol * 1e-3 {
            quiet += 1;
        } else {
            quiet = 0;
        }
        edges.push(hi);
        lo = hi;
        width *= 2.0;
        if !lo.is_finite() || probes > spec.max_evals / 2 {
            return Err(Error::AccuracyNotReached {
                estimate: f64::NAN,
                error_bound: f64::INFINITY,
            });
        }
    }
    let mut est = integrate_panels(g, &edges, spec)?;
    est.evals += probes;
    Ok(est)
}

/// Analytic bound on the magnitude of a whole-line integrand for large `|ω|`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TailBound {
    /// `|g(ω)| ≤ constant·|ω|^{-order}` for `|ω| ≥ from`; `order > 1`.
    Power { constant: f64, order: f64, from: f64 },
    /// `|g(ω)| ≤ exp(ln_constant − rate·√|ω|)·ω⁻²` for `|ω| ≥ from`. The
    /// constant is kept as a logarithm since it may exceed `f64::MAX`.
    StretchedExp { ln_constant: f64, rate: f64, from: f64 },
}

impl TailBound {
    pub fn bound_at(&self, omega: f64) -> f64 {
        let w = omega.abs();
        match *self {
            TailBound::Power { constant, order, .. } => constant * w.powf(-order),
            TailBound::StretchedExp { ln_constant, rate, .. } => {
                (ln_constant - rate * w.sqrt()).exp() / (w * w)
            }
        }
    }

    /// Upper bound on `∫_{|ω|>Ω} |g|`, both tails together.
    pub fn tail_mass(&self, cutoff: f64) -> f64 {
        match *self {
            TailBound::Power { constant, order, .. } => {
                2.0 * constant * cutoff.powf(1.0 - order) / (order - 1.0)
            }
            TailBound::StretchedExp { ln_constant, rate, .. } => {
                2.0 * (ln_constant - rate * cutoff.sqrt()).exp() / cutoff
            }
        }
    }

    fn from(&self) -> f64 {
        match *self {
            TailBound::Power { from, .. } | TailBound::StretchedExp { from, .. } => from,
        }
    }

    /// Smallest cutoff `Ω ≥ from` with `tail_mass(Ω) ≤ budget`.
    pub fn cutoff(&self, budget: f64) -> f64 {
        let start = self.from().max(1e-300);
        if let TailBound::Power { constant, order, .. } = *self {
            let omega = (2.0 * constant / ((order - 1.0) * budget)).powf(1.0 / (order - 1.0));
            return omega.max(self.from());
        }
        let mut hi = start.max(1.0);
        while self.tail_mass(hi) > budget {
            hi *= 2.0;
        }
        let mut lo = start.min(hi);
        if self.tail_mass(lo) <= budget {
            return lo;
        }
        for _ in 0..100 {
            let mid = 0.5 * (lo + hi);
            if self.tail_mass(mid) > budget {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        hi
    }

    fn validate(&self) -> Result<()> {
        let ok = match *self {
            TailBound::Power { constant, order, from } => {
                constant >= 0.0 && order > 1.0 && from >= 0.0
            }
            TailBound::StretchedExp { ln_constant, rate, from } => {
                ln_constant < f64::INFINITY && rate > 0.0 && from > 0.0
            }
        };
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidParameter(format!("bad tail bound {self:?}")))
        }
    }
}

/// `∫_{-∞}^{∞} g(ω) dω` with truncation at the analytic tail bound.
///
/// The cutoff `Ω` is the smallest value whose tail mass is at most
/// `abs_tol/2`; the interior `∫_{-Ω}^{Ω}` is integrated symmetrically to
/// `abs_tol/2`, starting from 64 panels on `[0, min(scale, Ω)]` followed by
/// geometric panels. `scale` should sit where the integrand has mostly
/// decayed.
pub fn integrate_real_line<F: FnMut(f64) -> Complex64>(
    mut g: F,
    tail: TailBound,
    scale: f64,
    spec: &QuadSpec,
) -> Result<Estimate<Complex64>> {
    spec.validate()?;
    tail.validate()?;
    let budget = 0.5 * spec.abs_tol;
    let cutoff = tail.cutoff(budget);
    if !cutoff.is_finite() {
        return Err(Error::AccuracyNotReached {
            estimate: f64::NAN,
            error_bound: f64::INFINITY,
        });
    }

    for factor in [1.0, 1.5, 2.0, 4.0] {
        let w = cutoff.max(1e-3) * factor;
        for omega in [w, -w] {
            let observed = g(omega).norm();
            let bound = tail.bound_at(omega);
            if observed > bound * (1.0 + 1e-9) + 1e-300 {
                return Err(Error::TailBoundViolation { omega, observed, bound });
            }
        }
    }

    let core = scale.min(cutoff).max(cutoff.min(1e-6));
    let n = 64;
    let mut edges: Vec<f64> = (0..=n).map(|j| core * j as f64 / n as f64).collect();
    let mut hi = core;
    while hi < cutoff {
        hi = (2.0 * hi).min(cutoff);
        edges.push(hi);
    }
    let interior_spec = QuadSpec {
        abs_tol: budget,
        ..*spec
    };
    let mut est = integrate_panels(|w| g(w) + g(-w), &edges, &interior_spec)?;
    est.error += tail.tail_mass(cutoff);
    Ok(est)
}
