//! Numerical kernel: Laplace inversion, quadrature, root finding and the
//! special functions behind the closed-form prices.

pub mod laplace;
pub mod quad;
pub mod roots;
pub mod special;

pub use laplace::{euler, laplace_invert, talbot, LaplaceFn};
pub use quad::{
    integrate_interval, integrate_real_line, integrate_semi_infinite, Estimate, QuadSpec,
    TailBound,
};
pub use roots::bisect_secant;
pub use special::{bessel_i1_scaled, ln_normal_cdf, normal_cdf};
