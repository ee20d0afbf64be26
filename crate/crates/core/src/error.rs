use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("negative multiplier {0}: only nonnegative scalars act on extended reals")]
    NegativeScale(f64),
    #[error("invalid piecewise-linear function: {0}")]
    InvalidFunction(String),
    #[error("invalid grid function: {0}")]
    InvalidGrid(String),
    #[error("function is not convex")]
    NotConvex,
    #[error("length mismatch: {left} weights vs {right} functions")]
    LengthMismatch { left: usize, right: usize },
    #[error("empty family")]
    EmptyFamily,
    #[error("{0}")]
    InvalidArgument(String),
    #[error("schema error at {pointer}: {message}")]
    Schema { pointer: String, message: String },
    #[error("duplicate scenario id {0:?}")]
    DuplicateId(String),
    #[error("unknown scenario kind {0:?}")]
    UnknownKind(String),
    #[error("JSON parse error: {0}")]
    Json(#[from] serde_json::Error),
    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn schema(pointer: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Schema {
            pointer: pointer.into(),
            message: message.into(),
        }
    }
}
