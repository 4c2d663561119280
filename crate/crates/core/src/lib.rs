//! Optimal proportional excess-of-loss reinsurance.
//!
//! Per claim X the insurer retains Y = α·min(X, M) and cedes the rest.
//! This crate finds the contract pair (α, M) three ways and blends them:
//!
//! - [`insurer::solve_insurer`] maximizes the insurer's expected
//!   exponential utility of terminal wealth;
//! - [`reinsurer::solve_reinsurer`] does the same for the reinsurer;
//! - [`bayes::posterior_summary`] computes the posterior mean of (α, M)
//!   from observed ceded losses under configurable priors;
//! - [`bayes::balanced_estimate`] combines all three through the
//!   square-error doubly-balanced loss, ω₁·insurer + ω₂·reinsurer +
//!   (1−ω₁−ω₂)·posterior mean.
//!
//! Everything numeric is generic over the scalar type via [`float::Real`]
//! (`f32` or `f64`); the aliases below fix `f64`, the precision at which
//! the documented tolerances hold.

pub mod bayes;
pub mod contract;
pub mod distributions;
pub mod error;
pub mod float;
pub mod insurer;
pub mod quadrature;
pub mod reinsurer;
pub mod special;
pub mod surplus;
pub mod utility;

pub use error::{Error, Result};
pub use float::Real;

/// Claim-size distribution at working precision.
pub type ClaimModel = distributions::ClaimModel<f64>;
/// Prior specification at working precision.
pub type PriorSpec = distributions::PriorSpec<f64>;
/// Contract parameter pair (α, M) at working precision.
pub type ContractParams = contract::ContractParams<f64>;
/// Claim decomposition at working precision.
pub type LossSplit = contract::LossSplit<f64>;
/// Party configuration at working precision.
pub type UtilityConfig = utility::UtilityConfig<f64>;
/// Insurer solve result at working precision.
pub type SolveResult = insurer::SolveResult<f64>;
/// Reinsurer solve result at working precision.
pub type ReinsurerSolveResult = reinsurer::ReinsurerSolveResult<f64>;
/// Ceded-loss sample at working precision.
pub type CededSample = bayes::CededSample<f64>;
/// Prior triple at working precision.
pub type PriorTriple = bayes::PriorTriple<f64>;
/// Balanced-loss weights at working precision.
pub type BalancedWeights = bayes::BalancedWeights<f64>;
/// Posterior summary at working precision.
pub type PosteriorSummary = bayes::PosteriorSummary<f64>;
