//! Invariants over randomized parameters.

use ctrw_core::american::{binary_put_price, perpetual_binary_put};
use ctrw_core::black_scholes::{bs_vanilla_call, implied_vol, BSParams};
use ctrw_core::european::{binary_call_price, vanilla_call_price};
use ctrw_core::fourier::price_fourier;
use ctrw_core::numerics::quad::integrate_interval;
use ctrw_core::risk_neutral::exp_moment;
use ctrw_core::{DEModel, Family, JumpDensity, MarketParams, Method, Moments, Payoff, QuadSpec};
use num_complex::Complex64;
use proptest::prelude::*;

const CONTINUOUS: [Family; 5] =
    [Family::Exponential, Family::Constant, Family::Gaussian, Family::Logistic, Family::Gumbel];

fn family() -> impl Strategy<Value = Family> {
    prop::sample::select(Family::ALL.to_vec())
}

fn continuous() -> impl Strategy<Value = Family> {
    prop::sample::select(CONTINUOUS.to_vec())
}

/// Nonnegative means keep `h̃(−i) > 1`, so every fit is admissible.
fn moments() -> impl Strategy<Value = Moments> {
    (0.0..2e-3f64, 5e-5..5e-4f64).prop_map(|(mu1, mu2)| Moments { mu1, mu2 })
}

/// Rates with `0 < ρ − 1 < γ`.
fn model() -> impl Strategy<Value = DEModel> {
    (1.2..12.0f64, 0.05..0.95f64, 0.005..0.1f64).prop_map(|(rho, frac, r)| {
        let gamma = (rho - 1.0) / frac;
        DEModel::new(rho, gamma, r).unwrap()
    })
}

/// Support window holding all but a negligible fraction of the mass.
fn window(d: &JumpDensity) -> (f64, f64) {
    let Moments { mu1, mu2 } = d.mean_var();
    let sd = mu2.sqrt();
    match d.family() {
        Family::Constant => (d.a(), d.b()),
        _ => (mu1 - 60.0 * sd, mu1 + 60.0 * sd),
    }
}

/// Window split at the exponential density's kink at zero.
fn panels(d: &JumpDensity) -> Vec<f64> {
    let (lo, hi) = window(d);
    if lo < 0.0 && hi > 0.0 {
        vec![lo, 0.0, hi]
    } else {
        vec![lo, hi]
    }
}

fn integrate(f: impl Fn(f64) -> f64, edges: &[f64], pieces: usize) -> f64 {
    edges.windows(2).map(|w| integrate_interval(&f, w[0], w[1], pieces, &fine()).unwrap().value).sum()
}

fn fine() -> QuadSpec {
    QuadSpec { rel_tol: 1e-12, abs_tol: 1e-13, max_evals: 400_000 }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn moment_fit_round_trips(f in family(), m in moments()) {
        let d = JumpDensity::fit_from_moments(f, m).unwrap();
        let back = d.mean_var();
        prop_assert!((back.mu1 - m.mu1).abs() <= 1e-12 * m.mu2.sqrt());
        prop_assert!((back.mu2 - m.mu2).abs() <= 1e-10 * m.mu2);
    }

    #[test]
    fn densities_normalize_and_match_their_moments(f in continuous(), m in moments()) {
        let d = JumpDensity::fit_from_moments(f, m).unwrap();
        let edges = panels(&d);
        let mass = integrate(|x| d.pdf(x), &edges, 64);
        let mean = integrate(|x| x * d.pdf(x), &edges, 64);
        prop_assert!((mass - 1.0).abs() < 1e-9, "mass {}", mass);
        prop_assert!((mean - m.mu1).abs() < 1e-9 * m.mu2.sqrt().max(1e-3), "mean {} vs {}", mean, m.mu1);
        prop_assert!((d.char_fn_real(0.0) - 1.0).norm() < 1e-14);
    }

    #[test]
    fn char_fn_matches_quadrature(f in continuous(), m in moments(), w in -3.0..3.0f64) {
        let d = JumpDensity::fit_from_moments(f, m).unwrap();
        let omega = w / m.mu2.sqrt();
        let edges = panels(&d);
        let re = integrate(|x| d.pdf(x) * (omega * x).cos(), &edges, 128);
        let im = integrate(|x| d.pdf(x) * (omega * x).sin(), &edges, 128);
        let want = d.char_fn_real(omega);
        prop_assert!((Complex64::new(re, im) - want).norm() < 1e-8, "{} vs {}", Complex64::new(re, im), want);
    }

    #[test]
    fn risk_neutral_intensity_prices_the_stock(f in family(), m in moments(), r in 0.005..0.1f64) {
        let d = JumpDensity::fit_from_moments(f, m).unwrap();
        let mp = MarketParams::risk_neutral(r, d).unwrap();
        let excess = exp_moment(&d).unwrap() - 1.0;
        prop_assert!((mp.lambda * excess - r).abs() < 1e-8 * r);
        prop_assert!(mp.lambda > 0.0);
    }

    #[test]
    fn call_prices_respect_no_arbitrage_bounds(m in model(), sk in 0.7..1.4f64, t in 0.01..5.0f64) {
        let spec = QuadSpec::default();
        let disc = (-m.r * t).exp();
        let x = sk.ln();
        let b = binary_call_price(&m, 1.0, t, x, Method::ClosedForm, &spec).unwrap();
        let v = vanilla_call_price(&m, 1.0, t, x, Method::ClosedForm, &spec).unwrap();
        prop_assert!(b >= -1e-9 && b <= disc + 1e-9, "binary {}", b);
        prop_assert!(v >= (sk - disc).max(0.0) - 1e-9 && v <= sk + 1e-9, "vanilla {}", v);
    }

    #[test]
    fn call_prices_increase_with_spot(m in model(), t in 0.05..5.0f64) {
        let spec = QuadSpec::default();
        let mut prev = (f64::NEG_INFINITY, f64::NEG_INFINITY);
        for j in 0..9 {
            let x = (0.8 + 0.05 * j as f64).ln();
            let b = binary_call_price(&m, 1.0, t, x, Method::ClosedForm, &spec).unwrap();
            let v = vanilla_call_price(&m, 1.0, t, x, Method::ClosedForm, &spec).unwrap();
            prop_assert!(b >= prev.0 - 1e-9 && v >= prev.1 - 1e-9);
            prev = (b, v);
        }
    }

    #[test]
    fn american_binary_put_below_perpetual(m in model(), gap in 0.01..0.5f64, t in 0.1..20.0f64) {
        let spec = QuadSpec::default();
        let p = binary_put_price(&m, 0.0, gap, t, Method::ClosedForm, &spec).unwrap();
        let longer = binary_put_price(&m, 0.0, gap, 2.0 * t, Method::ClosedForm, &spec).unwrap();
        let perpetual = perpetual_binary_put(&m, 0.0, gap);
        prop_assert!(p >= -1e-9 && p <= longer + 1e-9 && longer <= perpetual + 1e-9);
    }

    #[test]
    fn butterfly_stays_within_its_payoff_range(f in family(), m in moments(), spot in 80.0..130.0f64) {
        let d = JumpDensity::fit_from_moments(f, m).unwrap();
        let mp = MarketParams::risk_neutral(0.04, d).unwrap();
        let p = price_fourier(&Payoff::butterfly(100.0, 10.0).unwrap(), &mp, spot.ln(), 0.25, &QuadSpec::default()).unwrap();
        prop_assert!((-1e-9..=5.0 + 1e-9).contains(&p), "{}", p);
    }

    #[test]
    fn implied_vol_inverts_black_scholes(sigma in 0.03..1.0f64, sk in 0.8..1.25f64, t in 0.05..2.0f64) {
        // Deep in or out of the money the price carries no information on σ.
        let vega_floor = sk * t.sqrt() * (-(sk.ln() / (sigma * t.sqrt())).powi(2)).exp();
        prop_assume!(vega_floor > 1e-6);
        let p = bs_vanilla_call(&BSParams::new(sk, 1.0, 0.03, sigma, t).unwrap());
        let iv = implied_vol(p, sk, 1.0, 0.03, t).unwrap();
        prop_assert!((iv - sigma).abs() < 1e-6, "{} vs {}", iv, sigma);
    }
}
