//! Evaluation of the integrals I_N, a 2N-parameter family containing the
//! Askey-Wilson integral as N = 2, together with residual checks for the
//! q-difference equations, residue-sum evaluations and theta identities
//! they satisfy.
//!
//! Module map:
//! - [`qkernel`]: q-Pochhammer symbols, theta, q-binomials, symmetric functions
//! - [`hyperseries`]: unilateral, bilateral and very-well-poised series
//! - [`integrand`]: the integrand, weight, basis functions and Laurent function F
//! - [`contour`]: circle quadrature, the branch-cut tail, closed forms, moments
//! - [`jackson`]: bilateral Jackson sums and residue-sum evaluations
//! - [`qdiff`]: recurrence coefficients and residual checkers
//! - [`thetakit`]: theta identities and the reconstructed function f
//! - [`cli`]: the `qaw` command-line harness

pub mod cli;
pub mod contour;
pub mod hyperseries;
pub mod integrand;
pub mod jackson;
pub mod qdiff;
pub mod qkernel;
pub mod thetakit;

pub use num_complex::Complex64 as C64;

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum QawError {
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("pole proximity: {0}")]
    PoleProximity(String),
    #[error("theta zero: {0}")]
    ThetaZero(String),
    #[error("divergent: {0}")]
    Divergence(String),
    #[error("no convergence: {0}")]
    NoConvergence(String),
    #[error("unsupported domain: {0}")]
    UnsupportedDomain(String),
    #[error("degenerate: {0}")]
    Degenerate(String),
}

pub type Result<T> = std::result::Result<T, QawError>;

pub use contour::{IntegralResult, Method};
pub use integrand::FamilyParams;
pub use qdiff::ResidualReport;
pub use qkernel::{QContext, SeriesResult};

pub(crate) fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

pub(crate) fn fmt_c(z: C64) -> String {
    if z.im == 0.0 {
        format!("{}", z.re)
    } else {
        format!("{}{:+}i", z.re, z.im)
    }
}
