use thiserror::Error;

/// Errors surfaced by the solver library.
///
/// Contract violations (dimension mismatches, non-positive radii and the
/// like) are programming errors and panic instead of returning a variant.
#[derive(Debug, Error)]
pub enum Error {
    #[error("configuration error: {0}")]
    Config(String),

    #[error("invalid accuracy target: {0}")]
    InvalidAccuracy(String),

    #[error("numerical failure in {what}: residual {residual:e}")]
    Numerical { what: String, residual: f64 },

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("degenerate problem: {0}")]
    Degenerate(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
