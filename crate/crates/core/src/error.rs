use thiserror::Error;

/// Errors produced across the library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum GeoError {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error(
        "matrix is not positive definite (min eigenvalue {min_eig:e}, max eigenvalue {max_eig:e})"
    )]
    NotPositiveDefinite { min_eig: f64, max_eig: f64 },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("iteration did not converge after {iterations} steps (residual {residual:e})")]
    MaxIterExceeded {
        iterations: usize,
        residual: f64,
        /// Flattened last iterate.
        last: Vec<f64>,
    },

    #[error("invalid model: {0}")]
    InvalidModel(String),

    #[error("degenerate data: {0}")]
    DegenerateData(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("price panel is empty")]
    EmptyPanel,

    #[error("window {window} too large for {available} observations")]
    WindowTooLarge { window: usize, available: usize },

    #[error("bootstrap interval out of order: [{lower}, {upper}] around {point}")]
    IntervalOrder { lower: f64, point: f64, upper: f64 },

    #[error("io error: {0}")]
    Io(String),
}

impl From<std::io::Error> for GeoError {
    fn from(e: std::io::Error) -> Self {
        GeoError::Io(e.to_string())
    }
}

impl From<csv::Error> for GeoError {
    fn from(e: csv::Error) -> Self {
        GeoError::Parse(e.to_string())
    }
}

impl From<serde_json::Error> for GeoError {
    fn from(e: serde_json::Error) -> Self {
        GeoError::Parse(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, GeoError>;
