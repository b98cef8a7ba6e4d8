use thiserror::Error;

/// Errors raised by the library. Validation problems on complexes are
/// reported separately as [`crate::complex::Violation`] lists.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid complex: {0}")]
    InvalidComplex(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("shape mismatch in {op}: {detail}")]
    Shape { op: &'static str, detail: String },
    #[error("schema mismatch: expected `{expected}`, found `{found}`")]
    Schema { expected: String, found: String },
    #[error("non-finite loss at epoch {epoch}, series {series}, timestep {timestep}")]
    NonFiniteLoss {
        epoch: usize,
        series: usize,
        timestep: usize,
    },
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::InvalidArgument(msg.into()))
}
