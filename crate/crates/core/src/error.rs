use thiserror::Error;

/// Errors raised across the library.
///
/// Variants map onto the CLI exit classes: `Precondition`, `Resolution`,
/// `RefinementRequired` and `DomainTooSmall` are setup problems, the rest
/// are genuine numerical or input failures.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("domain error: {0}")]
    Domain(String),
    #[error("integration failed at x = {x}: {reason}")]
    Integration { x: f64, reason: String },
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("resolution error: {0}")]
    Resolution(String),
    #[error("phase extraction failed: {0}")]
    Extraction(String),
    #[error("k-quadrature too coarse: {0}")]
    RefinementRequired(String),
    #[error("spatial domain too small: {0}")]
    DomainTooSmall(String),
    #[error("grid mismatch: {0}")]
    GridMismatch(String),
    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
