use thiserror::Error;

/// Errors produced anywhere in the recognition pipeline.
#[derive(Debug, Error)]
pub enum Error {
    /// Malformed PGM input; `offset` is the byte position where parsing failed.
    #[error("pgm parse error at byte {offset}: {message}")]
    Parse { offset: usize, message: String },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// Segmentation plus denoising left no hand pixels.
    #[error("empty foreground after preprocessing")]
    EmptyForeground,

    #[error("conflict: {0}")]
    Conflict(String),

    #[error("invalid state: {0}")]
    InvalidState(String),

    #[error("generation error: {0}")]
    Generation(String),

    #[error("registry load error ({entry}): {message}")]
    Load { entry: String, message: String },

    #[error("configuration error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidArgument(msg.into())
}
