//! Brute-force compound-Poisson simulation under the risk-neutral intensity.
//!
//! Every path draws from its own ChaCha8 stream `(seed, path index)` and paths
//! are accumulated in fixed chunks merged in index order, so results do not
//! depend on the number of threads.

use crate::densities::{Family, JumpDensity, JumpSampler};
use crate::error::{Error, Result};
use crate::european::{Contract, Style};
use crate::risk_neutral::MarketParams;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp1, Poisson};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

const CHUNK: u64 = 4096;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct MCConfig {
    pub paths: u64,
    pub seed: u64,
    #[serde(default)]
    pub antithetic: bool,
}

impl MCConfig {
    pub fn new(paths: u64, seed: u64) -> Self {
        MCConfig { paths, seed, antithetic: false }
    }

    fn validate(&self) -> Result<()> {
        if self.paths < 100 {
            return Err(Error::InvalidParameter(format!("need at least 100 paths, got {}", self.paths)));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MCEstimate {
    pub mean: f64,
    pub std_error: f64,
    pub paths: u64,
    pub seed: u64,
}

impl MCEstimate {
    /// `|mean − target| ≤ k·SE`.
    pub fn within(&self, target: f64, k: f64) -> bool {
        (self.mean - target).abs() <= k * self.std_error
    }
}

/// Running mean and sum of squared deviations.
#[derive(Debug, Clone, Copy, Default)]
struct Moments {
    n: u64,
    mean: f64,
    m2: f64,
}

impl Moments {
    fn push(&mut self, v: f64) {
        self.n += 1;
        let delta = v - self.mean;
        self.mean += delta / self.n as f64;
        self.m2 += delta * (v - self.mean);
    }

    fn merge(self, o: Moments) -> Moments {
        if self.n == 0 {
            return o;
        }
        if o.n == 0 {
            return self;
        }
        let n = self.n + o.n;
        let delta = o.mean - self.mean;
        let mean = if delta == 0.0 { self.mean } else { self.mean + delta * o.n as f64 / n as f64 };
        let m2 = self.m2 + o.m2 + delta * delta * (self.n as f64 * o.n as f64 / n as f64);
        Moments { n, mean, m2 }
    }
}

/// Center of symmetry of the jump law, if it has one.
pub fn symmetry_center(d: &JumpDensity) -> Option<f64> {
    match d.family() {
        Family::Gaussian | Family::Logistic => Some(d.a()),
        Family::Constant => Some(0.5 * (d.a() + d.b())),
        Family::Discrete => (d.a() == 0.5).then_some(0.0),
        Family::Exponential => (d.a() == d.b()).then_some(0.0),
        Family::Gumbel | Family::ParetoHalf => None,
    }
}

fn path_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

fn poisson_count<R: Rng + ?Sized>(mean: f64, rng: &mut R) -> u64 {
    if mean <= 0.0 {
        return 0;
    }
    let p = Poisson::new(mean).expect("positive finite mean");
    p.sample(rng) as u64
}

fn check_inputs(mp: &MarketParams, x0: f64, t: f64) -> Result<JumpSampler> {
    if !x0.is_finite() {
        return Err(Error::InvalidParameter(format!("log-price must be finite, got {x0}")));
    }
    if !(t >= 0.0 && t.is_finite()) {
        return Err(Error::InvalidParameter(format!("horizon must be finite and nonnegative, got {t}")));
    }
    if !(mp.lambda >= 0.0 && mp.lambda.is_finite()) {
        return Err(Error::InvalidParameter(format!("bad intensity {}", mp.lambda)));
    }
    mp.density.sampler()
}

/// Terminal log-price and jump count of one path.
fn terminal_with_count<R: Rng + ?Sized>(
    mp: &MarketParams,
    sampler: &JumpSampler,
    x0: f64,
    t: f64,
    rng: &mut R,
) -> (f64, u64) {
    let n = poisson_count(mp.lambda * t, rng);
    let mut x = x0;
    for _ in 0..n {
        x += sampler.draw(rng);
    }
    (x, n)
}

/// One draw of `X(T) = x₀ + Σ_{n ≤ N(T)} ΔXₙ`.
pub fn simulate_terminal<R: Rng + ?Sized>(mp: &MarketParams, x0: f64, t: f64, rng: &mut R) -> Result<f64> {
    let sampler = check_inputs(mp, x0, t)?;
    Ok(terminal_with_count(mp, &sampler, x0, t, rng).0)
}

/// Runs `sample(stream)` for every stream index and returns mean and SE.
fn accumulate<F>(paths: u64, seed: u64, parallel: bool, sample: F) -> MCEstimate
where
    F: Fn(&mut ChaCha8Rng) -> f64 + Sync,
{
    let chunks = paths.div_ceil(CHUNK);
    let run = |c: u64| {
        let mut acc = Moments::default();
        for i in c * CHUNK..((c + 1) * CHUNK).min(paths) {
            let mut rng = path_rng(seed, i);
            acc.push(sample(&mut rng));
        }
        acc
    };
    let parts: Vec<Moments> = if parallel {
        (0..chunks).into_par_iter().map(run).collect()
    } else {
        (0..chunks).map(run).collect()
    };
    let total = parts.into_iter().fold(Moments::default(), Moments::merge);
    let var = if total.n > 1 { total.m2 / (total.n - 1) as f64 } else { 0.0 };
    MCEstimate { mean: total.mean, std_error: (var / total.n as f64).sqrt(), paths, seed }
}

fn european_mc(mp: &MarketParams, c: &Contract, x0: f64, cfg: &MCConfig, parallel: bool) -> Result<MCEstimate> {
    cfg.validate()?;
    c.validate()?;
    if c.style != Style::European {
        return Err(Error::InvalidParameter("Monte Carlo pricing here is European only".into()));
    }
    let t = c.t_bar;
    let sampler = check_inputs(mp, x0, t)?;
    let disc = (-mp.r * t).exp();
    if !cfg.antithetic {
        let f = |rng: &mut ChaCha8Rng| disc * c.payoff_at(terminal_with_count(mp, &sampler, x0, t, rng).0);
        return Ok(accumulate(cfg.paths, cfg.seed, parallel, f));
    }
    let center = symmetry_center(&mp.density)
        .ok_or(Error::UnsupportedFamily("antithetic sampling needs a symmetric jump density"))?;
    // Each stream yields a pair: the path and its mirror about the jump center.
    let f = |rng: &mut ChaCha8Rng| {
        let n = poisson_count(mp.lambda * t, rng);
        let mut shift = 0.0;
        for _ in 0..n {
            shift += sampler.draw(rng) - center;
        }
        let drift = n as f64 * center;
        0.5 * disc * (c.payoff_at(x0 + drift + shift) + c.payoff_at(x0 + drift - shift))
    };
    let pairs = cfg.paths.div_ceil(2);
    let mut est = accumulate(pairs, cfg.seed, parallel, f);
    est.paths = cfg.paths;
    Ok(est)
}

/// `E[e^{−rT} Φ(X_T)]` for a European contract.
pub fn price_european_mc(mp: &MarketParams, c: &Contract, x0: f64, cfg: &MCConfig) -> Result<MCEstimate> {
    european_mc(mp, c, x0, cfg, true)
}

/// `E[e^{−rτ} 1_{τ ≤ T}]` with `τ` the first jump time landing at or below `k`.
pub fn price_american_binary_put_mc(
    mp: &MarketParams,
    k: f64,
    x0: f64,
    t: f64,
    cfg: &MCConfig,
) -> Result<MCEstimate> {
    cfg.validate()?;
    let sampler = check_inputs(mp, x0, t)?;
    if x0 <= k {
        return Ok(MCEstimate { mean: 1.0, std_error: 0.0, paths: cfg.paths, seed: cfg.seed });
    }
    if cfg.antithetic {
        return Err(Error::InvalidParameter("antithetic mode is not available for the American put".into()));
    }
    let (lambda, r) = (mp.lambda, mp.r);
    let f = |rng: &mut ChaCha8Rng| {
        if lambda == 0.0 {
            return 0.0;
        }
        let (mut tau, mut x) = (0.0, x0);
        loop {
            let e: f64 = rng.sample(Exp1);
            tau += e / lambda;
            if tau > t {
                return 0.0;
            }
            x += sampler.draw(rng);
            if x <= k {
                return (-r * tau).exp();
            }
        }
    };
    Ok(accumulate(cfg.paths, cfg.seed, true, f))
}

/// Estimates `E[e^{−rT} e^{X_T}] − e^{x₀}`, zero under the risk-neutral λ.
pub fn martingale_check(mp: &MarketParams, x0: f64, t: f64, cfg: &MCConfig) -> Result<MCEstimate> {
    cfg.validate()?;
    let sampler = check_inputs(mp, x0, t)?;
    if cfg.antithetic {
        return Err(Error::InvalidParameter("antithetic mode is not available for the martingale check".into()));
    }
    let (disc, s0) = ((-mp.r * t).exp(), x0.exp());
    let f = |rng: &mut ChaCha8Rng| disc * terminal_with_count(mp, &sampler, x0, t, rng).0.exp() - s0;
    Ok(accumulate(cfg.paths, cfg.seed, true, f))
}
