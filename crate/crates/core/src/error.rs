use thiserror::Error;

/// Everything that can go wrong in the lab.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error("grid mismatch: {0}")]
    GridMismatch(String),
    #[error("invalid exponent: {0}")]
    InvalidExponent(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("grid too small for lambda = {lambda}: {reason}")]
    AliasingGuard { lambda: f64, reason: String },
    #[error("signal is not band-limited: {0}")]
    NotBandLimited(String),
    #[error("not grid aligned: {0}")]
    NotGridAligned(String),
    #[error("non-finite value: {0}")]
    NonFinite(String),
    #[error("zero input: {0}")]
    ZeroInput(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
