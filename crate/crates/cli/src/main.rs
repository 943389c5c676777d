//! `ctrw`: prices, implied volatilities, Monte Carlo estimates and figure
//! CSVs for the compound-Poisson market model.
//!
//! Exit codes: 0 success, 2 invalid input, 3 numerical accuracy failure.

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};
use ctrw_core::american::{binary_put_price, perpetual_binary_put, perpetual_vanilla_put, vanilla_z0};
use ctrw_core::black_scholes::implied_vol;
use ctrw_core::european::{european_price, vanilla_call_price};
use ctrw_core::figures::{generate, parse_meta};
use ctrw_core::fourier::price_fourier_detailed;
use ctrw_core::monte_carlo::{martingale_check, price_american_binary_put_mc, price_european_mc};
use ctrw_core::risk_neutral::{exp_moment, validate};
use ctrw_core::{
    Contract, DEModel, Error, Family, FigureId, FigureMeta, JumpDensity, MCConfig, MarketParams, Method, Moments,
    Payoff, PayoffKind, QuadSpec,
};
use serde::Deserialize;
use serde_json::{json, Value};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "ctrw", version, about = "Option pricing under compound-Poisson jump markets")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Price one contract and print JSON.
    Price(Opts),
    /// Implied volatility at one spot (JSON) or over an S/K grid (CSV).
    Iv(Opts),
    /// Monte Carlo estimate with standard error (JSON).
    Mc(Opts),
    /// Write the CSV behind a figure.
    Fig(FigArgs),
    /// Risk-neutral intensity λ = r / (h̃(−i) − 1).
    CalibrateLambda(Opts),
    /// Check model admissibility; exit 2 if any check fails.
    Validate(Opts),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "kebab-case")]
enum ContractArg {
    BinaryCall,
    VanillaCall,
    BinaryPut,
    VanillaPut,
    Butterfly,
    AmericanBinaryPut,
    PerpetualBinaryPut,
    PerpetualVanillaPut,
    /// Discounted-stock martingale check (`mc` only).
    Martingale,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "kebab-case")]
enum MethodArg {
    Laplace,
    Closed,
    Fourier,
    Mc,
}

impl MethodArg {
    fn name(self) -> &'static str {
        match self {
            MethodArg::Laplace => "laplace",
            MethodArg::Closed => "closed",
            MethodArg::Fourier => "fourier",
            MethodArg::Mc => "mc",
        }
    }
}

/// Flags shared by the pricing commands. A `--config` JSON file may supply
/// any of them under the same names; flags win over the file.
#[derive(Args, Debug, Clone, Default, Deserialize)]
#[serde(default, deny_unknown_fields, rename_all = "kebab-case")]
struct Opts {
    /// JSON file with default values for these flags.
    #[arg(long)]
    #[serde(skip)]
    config: Option<PathBuf>,
    #[arg(long, value_enum)]
    contract: Option<ContractArg>,
    /// Jump density: exp, discrete, constant, gaussian, logistic, gumbel, pareto.
    #[arg(long)]
    density: Option<Family>,
    /// First parameter of the density (location, weight or scale by family).
    #[arg(long)]
    a: Option<f64>,
    /// Second parameter of the density.
    #[arg(long)]
    b: Option<f64>,
    /// Upward jump rate of the exponential density (ρ = 1/a).
    #[arg(long)]
    rho: Option<f64>,
    /// Downward jump rate (γ = 1/b); derived from --sigma when omitted.
    #[arg(long)]
    gamma: Option<f64>,
    /// Diffusive volatility used to set γ = ρ − 1 + 2r/σ².
    #[arg(long)]
    sigma: Option<f64>,
    /// Jump mean for a moment-matched density.
    #[arg(long)]
    mu1: Option<f64>,
    /// Jump variance for a moment-matched density.
    #[arg(long)]
    mu2: Option<f64>,
    /// Risk-free rate [default: 0.04].
    #[arg(long)]
    rate: Option<f64>,
    /// Time to maturity in years [default: 0.25].
    #[arg(long = "T")]
    #[serde(rename = "T")]
    t: Option<f64>,
    /// Spot price [default: 1].
    #[arg(long)]
    spot: Option<f64>,
    /// Strike [default: 1].
    #[arg(long)]
    strike: Option<f64>,
    /// Butterfly width.
    #[arg(long = "L")]
    #[serde(rename = "L")]
    l: Option<f64>,
    /// Pricing route; chosen from the contract and density when omitted.
    #[arg(long, value_enum)]
    method: Option<MethodArg>,
    /// Absolute accuracy target of quadrature and inversion.
    #[arg(long)]
    tol: Option<f64>,
    /// Integrand evaluation budget per quadrature or inversion.
    #[arg(long)]
    max_evals: Option<usize>,
    /// Monte Carlo paths [default: 100000].
    #[arg(long)]
    paths: Option<u64>,
    /// Monte Carlo seed [default: 1].
    #[arg(long)]
    seed: Option<u64>,
    /// Antithetic Monte Carlo (symmetric densities only).
    #[arg(long)]
    antithetic: bool,
    /// Use this λ instead of the risk-neutral one (Fourier and MC only).
    #[arg(long)]
    lambda_override: Option<f64>,
    /// Option price to invert (`iv` only).
    #[arg(long)]
    price: Option<f64>,
    /// Output file; standard output when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct FigArgs {
    /// fig1, fig2, iv1, iv2, fig3, fig4 or fig5.
    figure: Option<FigureId>,
    /// Regenerate from the meta line of an existing CSV.
    #[arg(long, conflicts_with = "figure")]
    from: Option<PathBuf>,
    /// Risk-free rate, overriding the figure default.
    #[arg(long)]
    rate: Option<f64>,
    /// Volatility setting γ = ρ − 1 + 2r/σ² and the Black–Scholes column.
    #[arg(long)]
    sigma: Option<f64>,
    /// Time to maturity in years.
    #[arg(long = "T")]
    t: Option<f64>,
    /// Absolute accuracy target.
    #[arg(long)]
    tol: Option<f64>,
    /// laplace or closed, for the exact-route figures.
    #[arg(long, value_enum)]
    method: Option<MethodArg>,
    /// Integrand evaluation budget per quadrature or inversion.
    #[arg(long)]
    max_evals: Option<usize>,
    /// Number of grid points.
    #[arg(long)]
    points: Option<usize>,
    /// Output CSV; standard output when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

macro_rules! merge {
    ($dst:ident, $src:ident; $($f:ident),*) => { $( if $dst.$f.is_none() { $dst.$f = $src.$f; } )* };
}

impl Opts {
    fn resolve(mut self) -> anyhow::Result<Self> {
        if let Some(path) = self.config.clone() {
            let text = std::fs::read_to_string(&path).with_context(|| format!("reading {}", path.display()))?;
            let file: Opts = serde_json::from_str(&text)
                .map_err(|e| Error::InvalidParameter(format!("config {}: {e}", path.display())))?;
            merge!(self, file; contract, density, a, b, rho, gamma, sigma, mu1, mu2, rate, t, spot, strike, l,
                method, tol, max_evals, paths, seed, lambda_override, price, out);
            self.antithetic |= file.antithetic;
        }
        Ok(self)
    }

    fn rate(&self) -> f64 {
        self.rate.unwrap_or(0.04)
    }

    fn maturity(&self) -> f64 {
        self.t.unwrap_or(0.25)
    }

    fn spot(&self) -> f64 {
        self.spot.unwrap_or(1.0)
    }

    fn strike(&self) -> f64 {
        self.strike.unwrap_or(1.0)
    }

    fn spec(&self) -> QuadSpec {
        let mut spec = QuadSpec::default();
        if let Some(t) = self.tol {
            spec.abs_tol = t;
        }
        if let Some(n) = self.max_evals {
            spec.max_evals = n;
        }
        spec
    }

    fn mc(&self) -> MCConfig {
        MCConfig { paths: self.paths.unwrap_or(100_000), seed: self.seed.unwrap_or(1), antithetic: self.antithetic }
    }

    fn density(&self) -> Result<JumpDensity, Error> {
        let family = self.density.unwrap_or(Family::Exponential);
        if let (Some(mu1), Some(mu2)) = (self.mu1, self.mu2) {
            return JumpDensity::fit_from_moments(family, Moments { mu1, mu2 });
        }
        if let (Family::Exponential, Some(rho)) = (family, self.rho) {
            let gamma = match (self.gamma, self.sigma) {
                (Some(g), _) => g,
                (None, Some(s)) if s > 0.0 => rho - 1.0 + 2.0 * self.rate() / (s * s),
                _ => return Err(Error::InvalidParameter("--rho needs --gamma or --sigma".into())),
            };
            return JumpDensity::from_rates(rho, gamma);
        }
        match (self.a, self.b) {
            (Some(a), Some(b)) => JumpDensity::new(family, a, b),
            _ => Err(Error::InvalidParameter(
                "specify the density by --a/--b, --rho with --gamma or --sigma, or --mu1/--mu2".into(),
            )),
        }
    }

    fn market(&self) -> Result<MarketParams, Error> {
        let d = self.density()?;
        match self.lambda_override {
            Some(l) => MarketParams::with_lambda(self.rate(), d, l),
            None => MarketParams::risk_neutral(self.rate(), d),
        }
    }

    /// Exact two-sided exponential model; refuses a λ override.
    fn exact_model(&self) -> Result<DEModel, Error> {
        if self.lambda_override.is_some() {
            return Err(Error::InvalidParameter(
                "--lambda-override applies to --method fourier or mc only; exact prices use the risk-neutral λ".into(),
            ));
        }
        let d = self.density()?;
        match d.rates() {
            Some((rho, gamma)) => DEModel::new(rho, gamma, self.rate()),
            None => DEModel::from_density(&d, self.rate()),
        }
    }

    fn contract(&self) -> ContractArg {
        self.contract.unwrap_or(ContractArg::VanillaCall)
    }

    fn method(&self) -> MethodArg {
        self.method.unwrap_or_else(|| {
            let exp = self.density.is_none_or(|f| f == Family::Exponential);
            if self.contract() == ContractArg::Butterfly && !exp {
                MethodArg::Fourier
            } else {
                MethodArg::Closed
            }
        })
    }

    fn european_contract(&self) -> Result<Contract, Error> {
        let (k, t) = (self.strike(), self.maturity());
        match self.contract() {
            ContractArg::BinaryCall => Contract::european(PayoffKind::BinaryCall, k, t),
            ContractArg::VanillaCall => Contract::european(PayoffKind::VanillaCall, k, t),
            ContractArg::BinaryPut => Contract::european(PayoffKind::BinaryPut, k, t),
            ContractArg::VanillaPut => Contract::european(PayoffKind::VanillaPut, k, t),
            ContractArg::Butterfly => Contract::butterfly(k, self.width()?, t),
            other => Err(Error::InvalidParameter(format!("{other:?} is not a European contract"))),
        }
    }

    fn width(&self) -> Result<f64, Error> {
        self.l.ok_or_else(|| Error::InvalidParameter("butterfly needs --L".into()))
    }
}

fn exact_method(m: MethodArg) -> Option<Method> {
    match m {
        MethodArg::Laplace => Some(Method::LaplaceInversion),
        MethodArg::Closed => Some(Method::ClosedForm),
        _ => None,
    }
}

fn contract_name(c: ContractArg) -> String {
    c.to_possible_value().map(|v| v.get_name().to_string()).unwrap_or_default()
}

fn emit(value: &Value, out: Option<&Path>) -> anyhow::Result<()> {
    let text = serde_json::to_string_pretty(value)?;
    write_out(&(text + "\n"), out)
}

fn write_out(text: &str, out: Option<&Path>) -> anyhow::Result<()> {
    match out {
        Some(p) => std::fs::write(p, text).with_context(|| format!("writing {}", p.display())),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn base_report(o: &Opts, mp: &MarketParams, method: MethodArg) -> Value {
    json!({
        "contract": contract_name(o.contract()),
        "method": method.name(),
        "density": mp.density,
        "rate": mp.r,
        "lambda": mp.lambda,
        "risk_neutral": mp.risk_neutral,
        "spot": o.spot(),
        "strike": o.strike(),
        "T": o.maturity(),
    })
}

fn cmd_price(o: Opts, forced: Option<MethodArg>) -> anyhow::Result<()> {
    let method = forced.unwrap_or_else(|| o.method());
    let exact = match exact_method(method) {
        Some(_) => Some(o.exact_model()?),
        None => None,
    };
    let mp = match exact {
        Some(m) => m.market_params(),
        None => o.market()?,
    };
    let spec = o.spec();
    let (x, k, t) = (o.spot().ln(), o.strike(), o.maturity());
    let mut report = base_report(&o, &mp, method);
    let fields = report.as_object_mut().expect("object");
    match method {
        MethodArg::Mc => {
            let cfg = o.mc();
            let est = match o.contract() {
                ContractArg::AmericanBinaryPut => price_american_binary_put_mc(&mp, k.ln(), x, t, &cfg)?,
                ContractArg::Martingale => martingale_check(&mp, x, t, &cfg)?,
                ContractArg::PerpetualBinaryPut | ContractArg::PerpetualVanillaPut => {
                    bail!(Error::InvalidParameter("perpetual contracts have no Monte Carlo route".into()))
                }
                _ => price_european_mc(&mp, &o.european_contract()?, x, &cfg)?,
            };
            fields.insert("price".into(), json!(est.mean));
            fields.insert("std_error".into(), json!(est.std_error));
            fields.insert("paths".into(), json!(est.paths));
            fields.insert("seed".into(), json!(est.seed));
            fields.insert("antithetic".into(), json!(cfg.antithetic));
            if o.contract() == ContractArg::Martingale {
                fields.insert("passed".into(), json!(est.within(0.0, 3.0)));
            }
        }
        MethodArg::Fourier => {
            if o.contract() != ContractArg::Butterfly {
                bail!(Error::InvalidParameter("the Fourier route prices the butterfly (--contract butterfly)".into()));
            }
            let p = Payoff::butterfly(k, o.width()?)?;
            let res = price_fourier_detailed(&p, &mp, x, t, &spec)?;
            fields.insert("price".into(), json!(res.price));
            fields.insert("error_bound".into(), json!(res.error_bound));
            fields.insert("imag_residue".into(), json!(res.imag_residue));
        }
        MethodArg::Laplace | MethodArg::Closed => {
            let m = exact.expect("exact model");
            let how = exact_method(method).expect("exact method");
            let price = match o.contract() {
                ContractArg::AmericanBinaryPut => binary_put_price(&m, k.ln(), x, t, how, &spec)?,
                ContractArg::PerpetualBinaryPut => perpetual_binary_put(&m, k.ln(), x),
                ContractArg::PerpetualVanillaPut => {
                    let (price, z_star) = perpetual_vanilla_put(&m, k, x)?;
                    fields.insert("z_star".into(), json!(z_star.exp()));
                    fields.insert("z0".into(), json!(vanilla_z0(&m, k)));
                    price
                }
                ContractArg::Martingale => {
                    bail!(Error::InvalidParameter("the martingale check needs --method mc".into()))
                }
                _ => european_price(&m, &o.european_contract()?, x, how, &spec)?,
            };
            fields.insert("price".into(), json!(price));
        }
    }
    if method != MethodArg::Mc {
        fields.insert("rel_tol".into(), json!(spec.rel_tol));
        fields.insert("abs_tol".into(), json!(spec.abs_tol));
    }
    emit(&report, o.out.as_deref())
}

fn cmd_iv(o: Opts) -> anyhow::Result<()> {
    let (r, t, k) = (o.rate(), o.maturity(), o.strike());
    if let (Some(spot), Some(price)) = (o.spot, o.price) {
        let iv = implied_vol(price, spot, k, r, t)?;
        return emit(&json!({ "price": price, "spot": spot, "strike": k, "rate": r, "T": t, "implied_vol": iv }), o.out.as_deref());
    }
    let m = o.exact_model()?;
    let how = exact_method(o.method()).ok_or_else(|| Error::InvalidParameter("iv uses --method laplace or closed".into()))?;
    let spec = o.spec();
    if let Some(spot) = o.spot {
        let price = vanilla_call_price(&m, k, t, spot.ln(), how, &spec)?;
        let iv = implied_vol(price, spot, k, r, t)?;
        let report = json!({
            "rho": m.rho, "gamma": m.gamma, "rate": r, "spot": spot, "strike": k, "T": t,
            "price": price, "implied_vol": iv,
        });
        return emit(&report, o.out.as_deref());
    }
    let mut meta = FigureMeta::default_for(FigureId::Iv1);
    meta.rhos = vec![m.rho];
    meta.sigma = Some(o.sigma.unwrap_or_else(|| m.sigma()));
    meta.r = r;
    meta.t_bar = t;
    meta.strike = k;
    meta.method = how;
    meta.abs_tol = spec.abs_tol;
    meta.max_evals = spec.max_evals;
    write_figure(&meta, o.out.as_deref())
}

fn write_figure(meta: &FigureMeta, out: Option<&Path>) -> anyhow::Result<()> {
    let fig = generate(meta)?;
    if fig.warnings > 0 {
        eprintln!("warning: {} out-of-band cells left empty", fig.warnings);
    }
    write_out(&fig.to_csv(), out)
}

fn cmd_fig(f: FigArgs) -> anyhow::Result<()> {
    let mut meta = match (&f.from, f.figure) {
        (Some(path), _) => {
            let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
            parse_meta(&text)?
        }
        (None, Some(id)) => FigureMeta::default_for(id),
        (None, None) => bail!(Error::InvalidParameter("name a figure or pass --from".into())),
    };
    if let Some(r) = f.rate {
        meta.r = r;
    }
    if let Some(s) = f.sigma {
        meta.sigma = Some(s);
    }
    if let Some(t) = f.t {
        meta.t_bar = t;
    }
    if let Some(tol) = f.tol {
        meta.abs_tol = tol;
    }
    if let Some(n) = f.max_evals {
        meta.max_evals = n;
    }
    if let Some(n) = f.points {
        meta.grid.points = n;
    }
    if let Some(m) = f.method {
        meta.method = exact_method(m)
            .ok_or_else(|| Error::InvalidParameter("figures take --method laplace or closed".into()))?;
    }
    write_figure(&meta, f.out.as_deref())
}

fn cmd_calibrate(o: Opts) -> anyhow::Result<()> {
    let d = o.density()?;
    let mp = MarketParams::risk_neutral(o.rate(), d)?;
    let report = json!({
        "density": d,
        "rate": mp.r,
        "exp_moment": exp_moment(&d)?,
        "lambda": mp.lambda,
    });
    emit(&report, o.out.as_deref())
}

fn cmd_validate(o: Opts) -> anyhow::Result<()> {
    let d = o.density()?;
    let mp = match o.lambda_override {
        Some(l) => MarketParams::with_lambda(o.rate(), d, l)?,
        None => MarketParams::risk_neutral(o.rate(), d)?,
    };
    let diag = validate(&mp);
    emit(&json!({ "passed": diag.passed(), "checks": diag.checks }), o.out.as_deref())?;
    if !diag.passed() {
        let names: Vec<String> = diag.failures().map(|c| format!("{} violated ({})", c.name, c.detail)).collect();
        bail!(Error::InvalidParameter(names.join("; ")));
    }
    Ok(())
}

fn run(cli: Cli) -> anyhow::Result<()> {
    match cli.cmd {
        Cmd::Price(o) => cmd_price(o.resolve()?, None),
        Cmd::Mc(o) => cmd_price(o.resolve()?, Some(MethodArg::Mc)),
        Cmd::Iv(o) => cmd_iv(o.resolve()?),
        Cmd::Fig(f) => cmd_fig(f),
        Cmd::CalibrateLambda(o) => cmd_calibrate(o.resolve()?),
        Cmd::Validate(o) => cmd_validate(o.resolve()?),
    }
}

fn exit_code(err: &anyhow::Error) -> u8 {
    match err.downcast_ref::<Error>() {
        Some(e) if e.is_numerical() => 3,
        _ => 2,
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
