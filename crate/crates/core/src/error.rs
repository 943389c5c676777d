use thiserror::Error;

/// Errors produced by the pricing engine.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("characteristic function has a pole at omega = {re} + {im}i")]
    Domain { re: f64, im: f64 },

    #[error("moments (mu1 = {mu1}, mu2 = {mu2}) are infeasible for the {family} family")]
    InfeasibleMoments { family: &'static str, mu1: f64, mu2: f64 },

    #[error("exponential moment of the jump density diverges: {0}")]
    DivergentMoment(String),

    #[error("inadmissible density: {0}")]
    InadmissibleDensity(String),

    #[error("r = 0 with unit exponential moment leaves the sojourn law arbitrary; only compound Poisson models are priced")]
    ArbitrarySojourn,

    #[error("unsupported density: {0}")]
    UnsupportedFamily(&'static str),

    #[error("accuracy not reached: estimate {estimate}, error bound {error_bound}")]
    AccuracyNotReached { estimate: f64, error_bound: f64 },

    #[error("integrand at omega = {omega} has magnitude {observed}, above the declared tail bound {bound}")]
    TailBoundViolation { omega: f64, observed: f64, bound: f64 },

    #[error("branch inconsistency in beta roots at s = {re} + {im}i")]
    BranchInconsistency { re: f64, im: f64 },

    #[error("price {price} is outside the no-arbitrage band ({lower}, {upper})")]
    OutOfBand { price: f64, lower: f64, upper: f64 },

    #[error("root finder did not converge after {iterations} iterations (last bracket [{lo}, {hi}])")]
    NoConvergence { iterations: usize, lo: f64, hi: f64 },
}

impl Error {
    /// True for failures of a numerical method (as opposed to bad inputs).
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::AccuracyNotReached { .. }
                | Error::TailBoundViolation { .. }
                | Error::BranchInconsistency { .. }
                | Error::NoConvergence { .. }
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
