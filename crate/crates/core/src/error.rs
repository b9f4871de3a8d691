use thiserror::Error;

/// Errors raised by the separation pipeline and the benchmark harness.
#[derive(Debug, Error)]
pub enum IcaError {
    /// An argument lies outside the domain of a mathematical function.
    #[error("domain error: {0}")]
    Domain(String),

    /// The denominator of the divergence vanished.
    #[error("degenerate contrast: {0}")]
    DegenerateContrast(String),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// Covariance eigenvalue below the rank floor.
    #[error("rank-deficient covariance: smallest eigenvalue {0:e}")]
    RankDeficient(f64),

    #[error("singular demixing matrix (det = {0:e})")]
    Singular(f64),

    /// Aggregation or plotting was asked to work on nothing.
    #[error("no records to emit")]
    EmptyRecords,

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, IcaError>;
