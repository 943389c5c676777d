//! Special functions used by the closed-form price kernels.

use num_complex::Complex64;
use std::f64::consts::{FRAC_1_SQRT_2, PI};

const LN_SQRT_2PI: f64 = 0.918_938_533_204_672_8;

/// Euler–Mascheroni constant, i.e. `-Γ'(1)`.
pub const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

/// Standard normal cumulative distribution function.
///
/// Evaluated through the complementary error function so that both tails keep
/// full relative precision.
pub fn normal_cdf(z: f64) -> f64 {
    if z.is_nan() {
        return f64::NAN;
    }
    0.5 * libm::erfc(-z * FRAC_1_SQRT_2)
}

/// Natural log of the standard normal CDF, finite far into the lower tail.
pub fn ln_normal_cdf(z: f64) -> f64 {
    if z > 0.0 {
        return (-normal_cdf(-z)).ln_1p();
    }
    if z > -30.0 {
        return normal_cdf(z).ln();
    }
    // Mills ratio by Laplace's continued fraction, evaluated bottom-up.
    let t = -z;
    let mut frac = t;
    for k in (1..=40).rev() {
        frac = t + k as f64 / frac;
    }
    -0.5 * z * z - LN_SQRT_2PI - frac.ln()
}

/// Exponentially scaled modified Bessel function of the first kind, order one:
/// `e^{-u} I₁(u)` for `u ≥ 0`.
pub fn bessel_i1_scaled(u: f64) -> f64 {
    debug_assert!(u >= 0.0 || u.is_nan());
    if u == 0.0 {
        return 0.0;
    }
    if u < 30.0 {
        // All terms positive: no cancellation.
        let half = 0.5 * u;
        let q = half * half;
        let mut term = half;
        let mut sum = half;
        let mut k = 0.0;
        loop {
            k += 1.0;
            term *= q / (k * (k + 1.0));
            sum += term;
            if term < sum * 1e-17 {
                break;
            }
        }
        sum * (-u).exp()
    } else {
        // Hankel expansion, truncated at its smallest term.
        let mut term: f64 = 1.0;
        let mut sum: f64 = 1.0;
        let mut k = 0.0;
        loop {
            k += 1.0;
            let odd = 2.0 * k - 1.0;
            let next = -term * (4.0 - odd * odd) / (k * 8.0 * u);
            if next.abs() >= term.abs() || next.abs() < 1e-17 * sum.abs() {
                break;
            }
            term = next;
            sum += term;
        }
        sum / (2.0 * PI * u).sqrt()
    }
}

const LANCZOS_G: f64 = 7.0;
#[allow(clippy::excessive_precision)]
const LANCZOS: [f64; 9] = [
    0.999_999_999_999_809_93,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_13,
    -176.615_029_162_140_59,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_571_6e-6,
    1.505_632_735_149_311_6e-7,
];

/// Complex log-gamma (Lanczos, g = 7, nine terms) with reflection for
/// `Re z < 1/2`. The imaginary part is not branch-corrected; only `exp` of
/// the result is meaningful.
pub fn ln_gamma(z: Complex64) -> Complex64 {
    if z.re < 0.5 {
        let pi = Complex64::new(PI, 0.0);
        return pi.ln() - (pi * z).sin().ln() - ln_gamma(1.0 - z);
    }
    let z = z - 1.0;
    let mut acc = Complex64::new(LANCZOS[0], 0.0);
    for (k, c) in LANCZOS.iter().enumerate().skip(1) {
        acc += *c / (z + k as f64);
    }
    let t = z + LANCZOS_G + 0.5;
    LN_SQRT_2PI + (z + 0.5) * t.ln() - t + acc.ln()
}

/// Complex gamma function.
pub fn gamma(z: Complex64) -> Complex64 {
    ln_gamma(z).exp()
}
