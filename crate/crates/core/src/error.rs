use thiserror::Error;

/// Errors raised across graph construction, downstream tasks and the harness.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("operator is not symmetric (max asymmetry {0:e})")]
    NotSymmetric(f64),

    #[error("observation {0} is an all-zero vector")]
    DegenerateObservation(usize),

    #[error("graph variant must be `raw` to normalize, found `{0}`")]
    NotRaw(&'static str),

    #[error("could not calibrate sparsity to mean degree {target}: achieved range [{low}, {high}]")]
    Calibration { target: f64, low: f64, high: f64 },

    #[error("non-finite loss at epoch {0}")]
    NonFiniteLoss(usize),

    #[error("{path}:{line}: {message}")]
    Parse {
        path: String,
        line: usize,
        message: String,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidInput(msg.into())
}
