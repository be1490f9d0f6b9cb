use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("contract violation: {0}")]
    ContractViolation(String),

    #[error("degenerate input: {0}")]
    DegenerateInput(String),

    #[error("matrix does not preserve the form (residual {residual:.3e})")]
    NotAnIsometry { residual: f64 },

    #[error("generator `{label}` does not preserve the form (residual {residual:.3e})")]
    InvalidGenerator { label: String, residual: f64 },

    #[error("relator `{relator}` is not satisfied (residual {residual:.3e})")]
    RelatorNotSatisfied { relator: String, residual: f64 },

    #[error("numerical failure in {what} (condition estimate {condition:.3e})")]
    NumericalFailure { what: String, condition: f64 },

    #[error("rejected: {0}")]
    Rejected(String),

    #[error("unknown generator label `{0}`")]
    UnknownLabel(String),

    #[error("resource guard exceeded: {count} words requested, limit is {limit}")]
    Resource { count: u128, limit: u128 },

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("precondition failed: {0}")]
    Precondition(String),

    #[error("fixed-point seeds disagree (spread {spread:.3e})")]
    NonContraction { spread: f64 },

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
