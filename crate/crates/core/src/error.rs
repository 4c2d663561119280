//! Error types shared across the crate.

use thiserror::Error;

/// Errors produced by distribution constructors, solvers and estimators.
#[derive(Debug, Clone, Error)]
pub enum Error {
    /// An argument fell outside its mathematical domain (negative loss,
    /// probability outside (0,1), retention share of exactly 1 in the
    /// ceded-loss likelihood, ...).
    #[error("domain error: {0}")]
    Domain(String),

    /// Distribution parameters violate the family's constraints.
    #[error("invalid parameters: {0}")]
    InvalidParameters(String),

    /// Safety loading <= 0: the retention cap equation ln(1+theta) = alpha*beta*M
    /// forces alpha*M to 0 and the insurer problem has no admissible optimum.
    #[error("degenerate loading {loading}: no interior optimum exists for theta <= 0")]
    DegenerateLoading { loading: f64 },

    /// A bracketing scan found no sign change for a scalar root.
    #[error("no root found: {details}")]
    NoRootFound { details: String },

    /// The exponential moment E[e^{beta X}] does not exist for the claim
    /// tail, so the reinsurer's expected utility is not defined.
    #[error("divergent exponential moment: {0}")]
    DivergentMoment(String),

    /// Damped Newton failed to reach the residual target.
    #[error("newton stalled after {iterations} iterations, residual {residual:e}")]
    NewtonStalled { iterations: usize, residual: f64 },

    /// Every posterior grid cell evaluated to zero mass.
    #[error("numeric underflow: {0}")]
    NumericUnderflow(String),

    /// A quadrature or other numeric routine produced a non-finite value.
    #[error("numeric failure: {0}")]
    Numeric(String),
}

pub type Result<T> = std::result::Result<T, Error>;
