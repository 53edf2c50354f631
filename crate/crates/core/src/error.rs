use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// Invalid world geometry, sensor layout or experiment settings.
    #[error("configuration error: {0}")]
    Config(String),

    /// An API was called out of contract (wrong dimensions, stepping a
    /// finished episode, mismatched tape, ...).
    #[error("usage error: {0}")]
    Usage(String),

    #[error("training diverged: {0}")]
    Diverged(String),

    #[error("format error: {0}")]
    Format(String),

    #[error("parse error at line {line}: {msg}")]
    Parse { line: u64, msg: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn config_err(msg: impl Into<String>) -> Error {
    Error::Config(msg.into())
}

pub(crate) fn usage_err(msg: impl Into<String>) -> Error {
    Error::Usage(msg.into())
}
