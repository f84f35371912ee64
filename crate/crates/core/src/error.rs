use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("forward cache does not match the current network: {0}")]
    StaleCache(&'static str),

    #[error("invalid mask: {0}")]
    InvalidMask(String),

    #[error("invalid network: {0}")]
    InvalidNetwork(String),

    #[error("gradient set does not match the active connection set")]
    GradientMismatch,

    #[error("replay buffer is empty")]
    EmptyBuffer,

    #[error("episode already finished; call reset before stepping")]
    EpisodeFinished,

    #[error("unknown environment `{0}`")]
    UnknownEnv(String),

    #[error("unknown topology mode `{0}`")]
    UnknownMode(String),

    #[error("invalid config `{key}`: {reason}")]
    InvalidConfig { key: String, reason: String },

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn config(key: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::InvalidConfig {
            key: key.into(),
            reason: reason.into(),
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
