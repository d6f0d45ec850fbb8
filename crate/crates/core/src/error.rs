use thiserror::Error;

/// Errors raised by the reconstruction library.
#[derive(Debug, Error)]
pub enum PatError {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error("grid mismatch: {0}")]
    GridMismatch(String),
    #[error("non-finite value at index {0}")]
    NonFinite(usize),
    #[error("wavelet depth {levels} exceeds the {max} dyadic levels available")]
    DepthTooLarge { levels: usize, max: usize },
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    #[error("support violation: {0}")]
    SupportViolation(String),
    #[error("invalid wavelet index: {0}")]
    InvalidIndex(String),
    #[error("{solver} did not converge after {iterations} iterations (residual {residual:.3e})")]
    NotConverged {
        solver: &'static str,
        iterations: usize,
        residual: f64,
    },
    #[error("bad aperture: {0}")]
    BadAperture(String),
    #[error("reference field has zero norm")]
    ZeroTruth,
    #[error("operation not supported by the {0} backend")]
    UnsupportedBackend(&'static str),
    #[error("malformed file: {0}")]
    Format(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, PatError>;
