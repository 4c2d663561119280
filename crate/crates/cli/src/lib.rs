//! Library surface of the experiment harness, exposed so integration
//! tests can drive the same code paths as the binary.

pub mod config;
pub mod run;

pub use config::{parse_claim_model, parse_pair, parse_prior, parse_weights, ExperimentConfig, RawConfig};
pub use run::{
    combine_cmd, pipeline_cmd, posterior_cmd, reference_weight_pairs, run_pipeline, run_table2,
    simulate_cmd, solve_insurer_cmd, solve_reinsurer_cmd, table1_cmd, table2_cmd, CommandOutput,
};

use thiserror::Error;

/// Harness-level errors, split by the exit code they map to: configuration
/// problems exit 1, numeric failures exit 2.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error("numeric failure: {0}")]
    Numeric(#[from] pxl_core::Error),
    #[error("numeric failure: {context}: {source}")]
    NumericWithContext {
        context: String,
        source: pxl_core::Error,
    },
}

impl CliError {
    /// Attaches a step label to a numeric failure; an existing, more
    /// specific context is kept.
    pub fn with_context(self, context: String) -> Self {
        match self {
            CliError::Numeric(source) => CliError::NumericWithContext { context, source },
            other => other,
        }
    }

    /// Process exit code mandated for this error class.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 1,
            CliError::Numeric(_) | CliError::NumericWithContext { .. } => 2,
        }
    }
}
