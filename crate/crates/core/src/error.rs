//! Crate-wide error type.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("parse error: {0}")]
    Parse(String),
    #[error("unsupported geometry: {0}")]
    UnsupportedGeometry(String),
    #[error("truncated input: {0}")]
    TruncatedInput(String),
    #[error("invalid clip: {0}")]
    InvalidClip(String),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("mtu too small: {0}")]
    MtuTooSmall(String),
    #[error("geometry mismatch: {0}")]
    GeometryMismatch(String),
    #[error("frame alignment mismatch: {0}")]
    Alignment(String),
    #[error("degenerate feature: {0}")]
    DegenerateFeature(String),
    #[error("schema error: missing or malformed column `{0}`")]
    Schema(String),
    #[error("bad split: {0}")]
    BadSplit(String),
    #[error("unknown class: {0}")]
    UnknownClass(String),
    #[error("training error ({algo}): {cause}")]
    Training { algo: String, cause: String },
    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },
    #[error("undefined correlation: {0}")]
    UndefinedCorrelation(String),
    #[error("usage error: {0}")]
    Usage(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub fn training(algo: &str, cause: impl Into<String>) -> Self {
        Error::Training {
            algo: algo.to_string(),
            cause: cause.into(),
        }
    }
}
