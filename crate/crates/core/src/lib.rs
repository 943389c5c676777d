//! Option pricing for a pure-jump continuous-time random walk market:
//! exact renewal-equation solutions under two-sided exponential jumps,
//! Fourier pricing under any cataloged jump density, American and perpetual
//! puts, Black–Scholes references and a Monte Carlo oracle.

// Guards such as `!(x > 0.0)` are written to reject NaN as well.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod american;
pub mod black_scholes;
pub mod densities;
pub mod error;
pub mod european;
pub mod figures;
pub mod fourier;
pub mod monte_carlo;
pub mod numerics;
pub mod risk_neutral;

pub use american::ExerciseBoundary;
pub use black_scholes::BSParams;
pub use densities::{Family, JumpDensity, Moments};
pub use error::{Error, Result};
pub use european::{Contract, DEModel, Method, PayoffKind, Style};
pub use figures::{Figure, FigureId, FigureMeta, PriceCurve};
pub use fourier::Payoff;
pub use monte_carlo::{MCConfig, MCEstimate};
pub use numerics::QuadSpec;
pub use risk_neutral::{Diagnostics, MarketParams};
