//! Black–Scholes reference prices, the Wiener perpetual put, and implied
//! volatility.

use crate::error::{Error, Result};
use crate::numerics::roots::bisect_secant;
use crate::numerics::special::normal_cdf;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BSParams {
    pub spot: f64,
    pub strike: f64,
    pub r: f64,
    pub sigma: f64,
    pub t: f64,
}

impl BSParams {
    pub fn new(spot: f64, strike: f64, r: f64, sigma: f64, t: f64) -> Result<Self> {
        let p = BSParams { spot, strike, r, sigma, t };
        p.validate()?;
        Ok(p)
    }

    fn validate(&self) -> Result<()> {
        if !(self.spot > 0.0 && self.strike > 0.0) {
            return Err(Error::InvalidParameter("spot and strike must be positive".into()));
        }
        if !(self.sigma >= 0.0 && self.t >= 0.0 && self.r.is_finite()) {
            return Err(Error::InvalidParameter("σ and T must be nonnegative".into()));
        }
        Ok(())
    }

    fn d2(&self) -> f64 {
        let v = self.sigma * self.t.sqrt();
        ((self.spot / self.strike).ln() + (self.r - 0.5 * self.sigma * self.sigma) * self.t) / v
    }
}

pub fn bs_binary_call(p: &BSParams) -> f64 {
    let disc = (-p.r * p.t).exp();
    if p.t == 0.0 || p.sigma == 0.0 {
        let forward = p.spot * (p.r * p.t).exp();
        return disc * f64::from(forward >= p.strike);
    }
    disc * normal_cdf(p.d2())
}

pub fn bs_binary_put(p: &BSParams) -> f64 {
    (-p.r * p.t).exp() - bs_binary_call(p)
}

pub fn bs_vanilla_call(p: &BSParams) -> f64 {
    let disc_k = p.strike * (-p.r * p.t).exp();
    if p.t == 0.0 || p.sigma == 0.0 {
        return (p.spot - disc_k).max(0.0);
    }
    let d2 = p.d2();
    let d1 = d2 + p.sigma * p.t.sqrt();
    p.spot * normal_cdf(d1) - disc_k * normal_cdf(d2)
}

pub fn bs_vanilla_put(p: &BSParams) -> f64 {
    let disc_k = p.strike * (-p.r * p.t).exp();
    if p.t == 0.0 || p.sigma == 0.0 {
        return (disc_k - p.spot).max(0.0);
    }
    let d2 = p.d2();
    let d1 = d2 + p.sigma * p.t.sqrt();
    disc_k * normal_cdf(-d2) - p.spot * normal_cdf(-d1)
}

/// Volatility reproducing a vanilla call `price`, to `1e-10·K` in price.
pub fn implied_vol(price: f64, spot: f64, strike: f64, r: f64, t: f64) -> Result<f64> {
    BSParams::new(spot, strike, r, 0.0, t)?;
    if !(t > 0.0) {
        return Err(Error::InvalidParameter("implied volatility needs T > 0".into()));
    }
    let lower = (spot - strike * (-r * t).exp()).max(0.0);
    let upper = spot;
    if !(price > lower && price < upper) {
        return Err(Error::OutOfBand { price, lower, upper });
    }
    let f = |sigma: f64| bs_vanilla_call(&BSParams { spot, strike, r, sigma, t }) - price;
    let mut lo = 1e-4;
    while f(lo) > 0.0 {
        lo *= 0.1;
        if lo < 1e-12 {
            return Err(Error::NoConvergence { iterations: 0, lo, hi: 5.0 });
        }
    }
    let mut hi = 5.0;
    while f(hi) < 0.0 {
        hi *= 2.0;
        if hi > 100.0 {
            return Err(Error::NoConvergence { iterations: 0, lo, hi });
        }
    }
    bisect_secant(f, lo, hi, 1e-14, 0.0, 400)
}

/// Perpetual American put under geometric Brownian motion: `(price, z*)`.
pub fn wiener_perpetual_put(strike: f64, r: f64, sigma: f64, x: f64) -> Result<(f64, f64)> {
    if !(sigma > 0.0 && r > 0.0 && strike > 0.0) {
        return Err(Error::InvalidParameter("need σ > 0, r > 0 and K > 0".into()));
    }
    let s2 = sigma * sigma;
    let z_star = (2.0 * r * strike / (2.0 * r + s2)).ln();
    let price = if x <= z_star {
        strike - x.exp()
    } else {
        s2 * strike / (2.0 * r + s2) * (2.0 * r * (z_star - x) / s2).exp()
    };
    Ok((price, z_star))
}
