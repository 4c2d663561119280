//! Per-party utility and surplus configuration.

use crate::error::{Error, Result};
use crate::float::Real;

/// Parameters of one party's expected-utility problem: exponential risk
/// aversion β, expected-value premium loading θ, Poisson claim intensity λ,
/// horizon t and initial wealth. The same struct serves the insurer
/// (β₀, θ₀, u₀) and the reinsurer (β₁, θ₁, u₀*).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UtilityConfig<F> {
    /// Risk aversion β > 0 of u(x) = −e^{−βx}.
    pub beta: F,
    /// Safety loading θ > −1 of the expected-value premium principle.
    pub loading: F,
    /// Poisson intensity λ > 0.
    pub lambda: F,
    /// Time horizon t > 0.
    pub horizon_t: F,
    /// Initial wealth; enters simulated surplus only, never the optimizers.
    pub initial_wealth: F,
}

impl<F: Real> UtilityConfig<F> {
    pub fn new(beta: F, loading: F, lambda: F, horizon_t: F, initial_wealth: F) -> Result<Self> {
        if !(beta > F::zero() && beta.is_finite()) {
            return Err(Error::InvalidParameters(format!("beta must be positive, got {beta}")));
        }
        if !(loading > -F::one() && loading.is_finite()) {
            return Err(Error::InvalidParameters(format!("loading must exceed -1, got {loading}")));
        }
        if !(lambda > F::zero() && lambda.is_finite()) {
            return Err(Error::InvalidParameters(format!("lambda must be positive, got {lambda}")));
        }
        if !(horizon_t > F::zero() && horizon_t.is_finite()) {
            return Err(Error::InvalidParameters(format!(
                "horizon must be positive, got {horizon_t}"
            )));
        }
        if !initial_wealth.is_finite() {
            return Err(Error::InvalidParameters(format!(
                "initial wealth must be finite, got {initial_wealth}"
            )));
        }
        Ok(Self { beta, loading, lambda, horizon_t, initial_wealth })
    }

    /// λ·t, the expected claim count over the horizon.
    pub fn poisson_mass(&self) -> F {
        self.lambda * self.horizon_t
    }
}
