//! Data behind the figures: price and implied-volatility curves written as
//! CSV with a `#`-prefixed JSON meta line that regenerates the file.

use crate::american::{binary_put_price, perpetual_binary_put};
use crate::black_scholes::{bs_binary_call, bs_vanilla_call, implied_vol, BSParams};
use crate::densities::{Family, JumpDensity, Moments};
use crate::error::{Error, Result};
use crate::european::{binary_call_price, vanilla_call_price, DEModel, Method};
use crate::fourier::{price_fourier, Payoff};
use crate::numerics::quad::QuadSpec;
use crate::risk_neutral::MarketParams;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::fmt::Write as _;
use std::str::FromStr;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FigureId {
    Fig1,
    Fig2,
    Iv1,
    Iv2,
    Fig3,
    Fig4,
    Fig5,
}

impl FigureId {
    pub const ALL: [FigureId; 7] =
        [FigureId::Fig1, FigureId::Fig2, FigureId::Iv1, FigureId::Iv2, FigureId::Fig3, FigureId::Fig4, FigureId::Fig5];

    pub fn name(&self) -> &'static str {
        match self {
            FigureId::Fig1 => "fig1",
            FigureId::Fig2 => "fig2",
            FigureId::Iv1 => "iv1",
            FigureId::Iv2 => "iv2",
            FigureId::Fig3 => "fig3",
            FigureId::Fig4 => "fig4",
            FigureId::Fig5 => "fig5",
        }
    }
}

impl FromStr for FigureId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        FigureId::ALL
            .into_iter()
            .find(|f| f.name() == s)
            .ok_or_else(|| Error::InvalidParameter(format!("unknown figure {s:?}")))
    }
}

/// Evenly spaced abscissa, endpoints included.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    pub start: f64,
    pub stop: f64,
    pub points: usize,
}

impl Grid {
    pub fn values(&self) -> Vec<f64> {
        if self.points == 1 {
            return vec![self.start];
        }
        let span = self.stop - self.start;
        (0..self.points).map(|i| self.start + span * i as f64 / (self.points - 1) as f64).collect()
    }
}

/// Every parameter needed to regenerate a figure.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FigureMeta {
    pub figure: FigureId,
    /// `"S/K"` for moneyness grids, `"S"` for spot grids.
    pub abscissa: String,
    pub grid: Grid,
    pub r: f64,
    pub sigma: Option<f64>,
    pub t_bar: f64,
    pub strike: f64,
    pub width: Option<f64>,
    pub rhos: Vec<f64>,
    pub families: Vec<Family>,
    pub moments: Option<Moments>,
    /// Fig. 5 maturities; `None` is the perpetual contract.
    pub horizons: Vec<Option<f64>>,
    pub method: Method,
    pub rel_tol: f64,
    pub abs_tol: f64,
    #[serde(default = "default_max_evals")]
    pub max_evals: usize,
}

fn default_max_evals() -> usize {
    QuadSpec::default().max_evals
}

impl FigureMeta {
    /// Caption parameters of each figure.
    pub fn default_for(figure: FigureId) -> Self {
        let spec = QuadSpec::default();
        let moneyness = Grid { start: 0.8, stop: 1.2, points: 81 };
        let base = FigureMeta {
            figure,
            abscissa: "S/K".into(),
            grid: moneyness,
            r: 0.04,
            sigma: Some(0.1),
            t_bar: 0.25,
            strike: 1.0,
            width: None,
            rhos: vec![2.0, 5.0, 20.0],
            families: vec![],
            moments: None,
            horizons: vec![],
            method: Method::ClosedForm,
            rel_tol: spec.rel_tol,
            abs_tol: spec.abs_tol,
            max_evals: spec.max_evals,
        };
        let spot_grid = Grid { start: 80.0, stop: 130.0, points: 101 };
        match figure {
            FigureId::Fig1 | FigureId::Fig2 | FigureId::Iv1 => base,
            FigureId::Iv2 => FigureMeta { r: 0.02139, sigma: Some(0.2), t_bar: 60.0 / 365.0, rhos: vec![30.0], ..base },
            FigureId::Fig3 => FigureMeta {
                abscissa: "S".into(),
                grid: spot_grid,
                strike: 100.0,
                width: Some(10.0),
                ..base
            },
            FigureId::Fig4 => FigureMeta {
                abscissa: "S".into(),
                grid: spot_grid,
                sigma: None,
                strike: 100.0,
                width: Some(10.0),
                rhos: vec![],
                families: Family::ALL.to_vec(),
                moments: Some(Moments { mu1: 1e-3, mu2: 1e-4 }),
                ..base
            },
            FigureId::Fig5 => FigureMeta {
                grid: Grid { start: 0.95, stop: 1.5, points: 111 },
                horizons: vec![Some(0.25), None],
                ..base
            },
        }
    }

    pub fn spec(&self) -> QuadSpec {
        QuadSpec { rel_tol: self.rel_tol, abs_tol: self.abs_tol, max_evals: self.max_evals }
    }

    fn spot(&self, abscissa: f64) -> f64 {
        if self.abscissa == "S" {
            abscissa
        } else {
            abscissa * self.strike
        }
    }

    fn validate(&self) -> Result<()> {
        self.spec().validate()?;
        if !(self.grid.points >= 1 && self.grid.start > 0.0 && self.grid.stop >= self.grid.start) {
            return Err(Error::InvalidParameter(format!("bad grid {:?}", self.grid)));
        }
        if self.abscissa != "S" && self.abscissa != "S/K" {
            return Err(Error::InvalidParameter(format!("abscissa must be S or S/K, got {:?}", self.abscissa)));
        }
        if !(self.strike > 0.0 && self.t_bar >= 0.0) {
            return Err(Error::InvalidParameter("need K > 0 and T ≥ 0".into()));
        }
        Ok(())
    }
}

/// One column of a figure.
#[derive(Debug, Clone, PartialEq)]
pub struct PriceCurve {
    pub label: String,
    pub abscissa: Vec<f64>,
    /// Empty cells are out-of-band implied-volatility points.
    pub ordinate: Vec<Option<f64>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Figure {
    pub meta: FigureMeta,
    pub curves: Vec<PriceCurve>,
    /// Number of empty cells.
    pub warnings: usize,
}

#[derive(Debug, Clone, Copy)]
enum Column {
    Jump { rho: f64 },
    BlackScholes,
    Density(Family),
    Horizon { rho: f64, t: Option<f64> },
}

impl Column {
    fn label(&self) -> String {
        match *self {
            Column::Jump { rho } => format!("rho={rho}"),
            Column::BlackScholes => "bs".into(),
            Column::Density(f) => f.name().into(),
            Column::Horizon { rho, t: Some(t) } => format!("rho={rho};t={t}"),
            Column::Horizon { rho, t: None } => format!("rho={rho};t=inf"),
        }
    }
}

fn columns(meta: &FigureMeta) -> Vec<Column> {
    match meta.figure {
        FigureId::Fig4 => meta.families.iter().map(|&f| Column::Density(f)).collect(),
        FigureId::Fig5 => meta
            .rhos
            .iter()
            .flat_map(|&rho| meta.horizons.iter().map(move |&t| Column::Horizon { rho, t }))
            .collect(),
        _ => meta
            .rhos
            .iter()
            .map(|&rho| Column::Jump { rho })
            .chain(std::iter::once(Column::BlackScholes))
            .collect(),
    }
}

fn sigma_of(meta: &FigureMeta) -> Result<f64> {
    meta.sigma.ok_or_else(|| Error::InvalidParameter(format!("{} needs σ", meta.figure.name())))
}

fn bs_butterfly(spot: f64, strike: f64, width: f64, r: f64, sigma: f64, t: f64) -> f64 {
    let call = |k: f64| bs_vanilla_call(&BSParams { spot, strike: k, r, sigma, t });
    call(strike) - 2.0 * call(strike + 0.5 * width) + call(strike + width)
}

fn cell(meta: &FigureMeta, col: Column, abscissa: f64) -> Result<Option<f64>> {
    let spec = meta.spec();
    let (k, t, r) = (meta.strike, meta.t_bar, meta.r);
    let spot = meta.spot(abscissa);
    let x = spot.ln();
    let bs = |sigma: f64| BSParams { spot, strike: k, r, sigma, t };
    let de = |rho: f64| -> Result<DEModel> { DEModel::from_sigma(rho, sigma_of(meta)?, r) };
    let invert = |price: f64| match implied_vol(price, spot, k, r, t) {
        Ok(v) => Ok(Some(v)),
        Err(Error::OutOfBand { .. } | Error::NoConvergence { .. }) => Ok(None),
        Err(e) => Err(e),
    };
    let width = || meta.width.ok_or_else(|| Error::InvalidParameter("butterfly width L missing".into()));
    match (meta.figure, col) {
        (FigureId::Fig1, Column::Jump { rho }) => binary_call_price(&de(rho)?, k, t, x, meta.method, &spec).map(Some),
        (FigureId::Fig1, Column::BlackScholes) => Ok(Some(bs_binary_call(&bs(sigma_of(meta)?)))),
        (FigureId::Fig2, Column::Jump { rho }) => vanilla_call_price(&de(rho)?, k, t, x, meta.method, &spec).map(Some),
        (FigureId::Fig2, Column::BlackScholes) => Ok(Some(bs_vanilla_call(&bs(sigma_of(meta)?)))),
        (FigureId::Iv1 | FigureId::Iv2, Column::Jump { rho }) => {
            invert(vanilla_call_price(&de(rho)?, k, t, x, meta.method, &spec)?)
        }
        (FigureId::Iv1 | FigureId::Iv2, Column::BlackScholes) => invert(bs_vanilla_call(&bs(sigma_of(meta)?))),
        (FigureId::Fig3, Column::Jump { rho }) => {
            let p = Payoff::butterfly(k, width()?)?;
            price_fourier(&p, &de(rho)?.market_params(), x, t, &spec).map(Some)
        }
        (FigureId::Fig3, Column::BlackScholes) => Ok(Some(bs_butterfly(spot, k, width()?, r, sigma_of(meta)?, t))),
        (FigureId::Fig4, Column::Density(f)) => {
            let m = meta.moments.ok_or_else(|| Error::InvalidParameter("fig4 needs moments".into()))?;
            let mp = MarketParams::risk_neutral(r, JumpDensity::fit_from_moments(f, m)?)?;
            price_fourier(&Payoff::butterfly(k, width()?)?, &mp, x, t, &spec).map(Some)
        }
        (FigureId::Fig5, Column::Horizon { rho, t: Some(h) }) => {
            binary_put_price(&de(rho)?, k.ln(), x, h, meta.method, &spec).map(Some)
        }
        (FigureId::Fig5, Column::Horizon { rho, t: None }) => Ok(Some(perpetual_binary_put(&de(rho)?, k.ln(), x))),
        (fig, col) => Err(Error::InvalidParameter(format!("column {} does not belong to {}", col.label(), fig.name()))),
    }
}

/// Evaluates every cell of a figure; cells run in parallel.
pub fn generate(meta: &FigureMeta) -> Result<Figure> {
    meta.validate()?;
    let xs = meta.grid.values();
    let cols = columns(meta);
    let jobs: Vec<(usize, usize)> = (0..cols.len()).flat_map(|c| (0..xs.len()).map(move |i| (c, i))).collect();
    let values: Vec<Option<f64>> =
        jobs.par_iter().map(|&(c, i)| cell(meta, cols[c], xs[i])).collect::<Result<_>>()?;
    let warnings = values.iter().filter(|v| v.is_none()).count();
    let curves = cols
        .iter()
        .enumerate()
        .map(|(c, col)| PriceCurve {
            label: col.label(),
            abscissa: xs.clone(),
            ordinate: values[c * xs.len()..(c + 1) * xs.len()].to_vec(),
        })
        .collect();
    Ok(Figure { meta: meta.clone(), curves, warnings })
}

impl Figure {
    pub fn curve(&self, label: &str) -> Option<&PriceCurve> {
        self.curves.iter().find(|c| c.label == label)
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        let meta = serde_json::to_string(&self.meta).expect("meta serializes");
        writeln!(out, "# {meta}").unwrap();
        let labels: Vec<&str> = self.curves.iter().map(|c| c.label.as_str()).collect();
        writeln!(out, "{},{}", self.meta.abscissa, labels.join(",")).unwrap();
        for (i, x) in self.meta.grid.values().iter().enumerate() {
            out.push_str(&x.to_string());
            for c in &self.curves {
                out.push(',');
                if let Some(v) = c.ordinate[i] {
                    out.push_str(&v.to_string());
                }
            }
            out.push('\n');
        }
        out
    }
}

/// Reads the meta line of a figure CSV.
pub fn parse_meta(csv: &str) -> Result<FigureMeta> {
    let line = csv
        .lines()
        .next()
        .and_then(|l| l.strip_prefix("# "))
        .ok_or_else(|| Error::InvalidParameter("missing `# {meta}` first line".into()))?;
    serde_json::from_str(line).map_err(|e| Error::InvalidParameter(format!("bad meta line: {e}")))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small(id: FigureId, points: usize) -> FigureMeta {
        let mut m = FigureMeta::default_for(id);
        m.grid.points = points;
        m
    }

    #[test]
    fn grid_endpoints() {
        let g = Grid { start: 0.8, stop: 1.2, points: 81 };
        let v = g.values();
        assert_eq!((v[0], v[80]), (0.8, 1.2));
        assert!((v[40] - 1.0).abs() < 1e-15);
    }

    #[test]
    fn regenerates_bit_identically() {
        for id in FigureId::ALL {
            let fig = generate(&small(id, 5)).unwrap();
            let csv = fig.to_csv();
            let again = generate(&parse_meta(&csv).unwrap()).unwrap().to_csv();
            assert_eq!(csv, again, "{}", id.name());
        }
    }

    #[test]
    fn fig5_column_order() {
        let fig = generate(&small(FigureId::Fig5, 3)).unwrap();
        let labels: Vec<&str> = fig.curves.iter().map(|c| c.label.as_str()).collect();
        assert_eq!(labels, ["rho=2;t=0.25", "rho=2;t=inf", "rho=5;t=0.25", "rho=5;t=inf", "rho=20;t=0.25", "rho=20;t=inf"]);
        for pair in fig.curves.chunks(2) {
            for i in 0..3 {
                assert!(pair[0].ordinate[i].unwrap() <= pair[1].ordinate[i].unwrap() + 1e-12);
            }
        }
    }

    #[test]
    fn bs_self_test_column() {
        let fig = generate(&small(FigureId::Iv1, 9)).unwrap();
        for v in fig.curve("bs").unwrap().ordinate.iter().flatten() {
            assert!((v - 0.1).abs() < 1e-8, "{v}");
        }
    }

    #[test]
    fn csv_shape() {
        let fig = generate(&small(FigureId::Fig1, 3)).unwrap();
        let csv = fig.to_csv();
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines.len(), 5);
        assert_eq!(lines[1], "S/K,rho=2,rho=5,rho=20,bs");
        assert!(lines[2].starts_with("0.8,"));
        assert_eq!(lines[3].split(',').count(), 5);
    }
}
