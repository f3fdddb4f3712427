//! Error types shared across the library.

use thiserror::Error;

/// Errors produced by model evaluation, configuration, data ingestion and
/// the optimizer.
#[derive(Debug, Error)]
pub enum ModelError {
    /// A parameter set violates its documented invariants.
    #[error("invalid parameter: {0}")]
    Parameter(String),

    /// A state or input carried a NaN or infinity.
    #[error("non-finite numeric input: {0}")]
    NumericInput(String),

    /// An argument lies outside the mathematical domain of an operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// A control violates its box bounds.
    #[error("control constraint violated: {0}")]
    Constraint(String),

    /// A simulated state left the configured physical band.
    #[error("state divergence in `{component}` at step {step}: value {value}")]
    Divergence {
        component: &'static str,
        step: usize,
        value: f64,
    },

    /// A vector or sequence had the wrong length.
    #[error("shape mismatch: expected {expected}, got {got}")]
    Shape { expected: usize, got: usize },

    /// Scenario configuration is invalid.
    #[error("config error: {0}")]
    Config(String),

    /// Input data (CSV, series) is invalid.
    #[error("data error: {0}")]
    Data(String),

    /// A derivative evaluation produced a non-finite value.
    #[error("differentiation error in {0}")]
    Differentiation(String),

    /// Underlying I/O failure.
    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, ModelError>;
