use thiserror::Error;

/// Errors raised by the simulation library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid dimension {dim} for {what}")]
    InvalidDimension { what: String, dim: usize },

    #[error("dimension mismatch on {subsystem}: expected {expected}, found {found}")]
    DimensionMismatch {
        subsystem: String,
        expected: usize,
        found: usize,
    },

    #[error("truncation tail {tail:.3e} exceeds {limit:.1e} at dimension {dim}")]
    Truncation { tail: f64, limit: f64, dim: usize },

    #[error("internal consistency: {0}")]
    Consistency(String),

    #[error("parameter regime: {0}")]
    Regime(String),

    #[error("singular parameters: {0}")]
    Singularity(String),

    #[error("logical basis state {index} is not an eigenvector of the gate (deviation {deviation:.3e})")]
    PhaseCoherence { index: usize, deviation: f64 },

    #[error("config: {0}")]
    Config(String),

    #[error("missing key {0}")]
    MissingKey(String),

    #[error("integration accuracy: {0}")]
    IntegrationAccuracy(String),

    #[error("invalid state: {0}")]
    InvalidState(String),

    #[error("operator is not Hermitian (max |H - H^dag| = {deviation:.3e})")]
    NonHermitian { deviation: f64 },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
