use criterion::{criterion_group, criterion_main, Criterion};
use ctrw_core::american::binary_put_price;
use ctrw_core::black_scholes::{bs_vanilla_call, implied_vol, BSParams};
use ctrw_core::european::{binary_call_price, vanilla_call_price};
use ctrw_core::fourier::price_fourier;
use ctrw_core::monte_carlo::price_european_mc;
use ctrw_core::{Contract, DEModel, Family, JumpDensity, MCConfig, MarketParams, Method, Moments, Payoff, PayoffKind, QuadSpec};
use std::hint::black_box;

fn exact_routes(c: &mut Criterion) {
    let m = DEModel::from_sigma(5.0, 0.1, 0.04).unwrap();
    let spec = QuadSpec::default();
    let x = 1.05f64.ln();
    let mut g = c.benchmark_group("exact");
    g.bench_function("binary_call_closed", |b| {
        b.iter(|| binary_call_price(&m, 1.0, 0.25, black_box(x), Method::ClosedForm, &spec).unwrap())
    });
    g.bench_function("binary_call_laplace", |b| {
        b.iter(|| binary_call_price(&m, 1.0, 0.25, black_box(x), Method::LaplaceInversion, &spec).unwrap())
    });
    g.bench_function("vanilla_call_closed", |b| {
        b.iter(|| vanilla_call_price(&m, 1.0, 0.25, black_box(x), Method::ClosedForm, &spec).unwrap())
    });
    g.bench_function("american_binary_put_closed", |b| {
        b.iter(|| binary_put_price(&m, 0.0, black_box(x), 0.25, Method::ClosedForm, &spec).unwrap())
    });
    g.finish();
}

fn fourier(c: &mut Criterion) {
    let spec = QuadSpec::default();
    let p = Payoff::butterfly(100.0, 10.0).unwrap();
    let x = 92f64.ln();
    let mut g = c.benchmark_group("fourier_butterfly");
    for family in [Family::Gaussian, Family::Gumbel, Family::Discrete, Family::ParetoHalf] {
        let d = JumpDensity::fit_from_moments(family, Moments { mu1: 1e-3, mu2: 1e-4 }).unwrap();
        let mp = MarketParams::risk_neutral(0.04, d).unwrap();
        g.bench_function(family.name(), |b| b.iter(|| price_fourier(&p, &mp, black_box(x), 0.25, &spec).unwrap()));
    }
    g.finish();
}

fn implied(c: &mut Criterion) {
    let price = bs_vanilla_call(&BSParams { spot: 0.97, strike: 1.0, r: 0.04, sigma: 0.13, t: 0.25 });
    c.bench_function("implied_vol", |b| b.iter(|| implied_vol(black_box(price), 0.97, 1.0, 0.04, 0.25).unwrap()));
}

fn monte_carlo(c: &mut Criterion) {
    let mp = DEModel::new(4.0, 11.0, 0.04).unwrap().market_params();
    let contract = Contract::european(PayoffKind::BinaryCall, 1.0, 0.25).unwrap();
    let cfg = MCConfig::new(100_000, 1);
    let mut g = c.benchmark_group("monte_carlo");
    g.sample_size(10);
    g.bench_function("binary_call_1e5_paths", |b| b.iter(|| price_european_mc(&mp, &contract, 0.0, &cfg).unwrap()));
    g.finish();
}

criterion_group!(benches, exact_routes, fourier, implied, monte_carlo);
criterion_main!(benches);
