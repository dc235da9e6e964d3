use std::path::PathBuf;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("failed to parse config {path}: {message}")]
    ConfigParse { path: PathBuf, message: String },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("image dimensions differ: {0}x{1} vs {2}x{3}")]
    DimensionMismatch(usize, usize, usize, usize),

    #[error("action component {index} = {value} exceeds bound {bound}")]
    ActionOutOfBounds {
        index: usize,
        value: f64,
        bound: f64,
    },

    #[error("episode already finished")]
    EpisodeFinished,

    #[error("kernel matrix factorization failed (jitter reached {0:e})")]
    Factorization(f64),

    #[error("malformed {kind} data: {message}")]
    Format { kind: &'static str, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn config(msg: impl Into<String>) -> Self {
        Error::Config(msg.into())
    }

    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }

    pub(crate) fn format(kind: &'static str, msg: impl Into<String>) -> Self {
        Error::Format {
            kind,
            message: msg.into(),
        }
    }

    /// Whether the error stems from user-supplied configuration rather than
    /// a failure while running.
    pub fn is_config_error(&self) -> bool {
        matches!(self, Error::Config(_) | Error::ConfigParse { .. })
    }
}
