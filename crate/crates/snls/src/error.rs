use thiserror::Error;

/// Crate-wide error type.
#[derive(Debug, Error)]
pub enum Error {
    /// Two fields live on different grids.
    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    /// A parameter or precondition was violated.
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// Configuration validation failure, with the offending field path.
    #[error("config error at `{field}`: {message}")]
    Config { field: String, message: String },

    /// A preset required a certified noise hypothesis and certification failed.
    #[error("certification abort: {0}")]
    CertificationAbort(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn config(field: &str, message: impl Into<String>) -> Self {
        Error::Config {
            field: field.to_string(),
            message: message.into(),
        }
    }
}
