use std::path::PathBuf;

use thiserror::Error;

use crate::corpus::CorpusError;
use crate::eval::EvalError;
use crate::features::FeatureError;
use crate::svr::{ModelFileError, SvrError};
use crate::tuning::TuningError;

/// Any failure of a pipeline command.
#[derive(Debug, Error)]
pub enum Error {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Config(String),
    #[error("{0}")]
    Data(String),
    #[error("{}: {source}", path.display())]
    Io { path: PathBuf, source: std::io::Error },
    #[error(transparent)]
    Corpus(#[from] CorpusError),
    #[error(transparent)]
    Feature(#[from] FeatureError),
    #[error(transparent)]
    Svr(#[from] SvrError),
    #[error(transparent)]
    Model(#[from] ModelFileError),
    #[error(transparent)]
    Tuning(#[from] TuningError),
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error("internal error: {0}")]
    Internal(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// Process exit status: 1 for usage or configuration mistakes, 2 for bad
    /// input data, 3 for internal failures.
    pub fn exit_code(&self) -> i32 {
        const USAGE: i32 = 1;
        const DATA: i32 = 2;
        const INTERNAL: i32 = 3;
        match self {
            Self::Usage(_) | Self::Config(_) => USAGE,
            Self::Data(_) | Self::Io { .. } | Self::Corpus(_) | Self::Eval(_) => DATA,
            Self::Feature(FeatureError::InvalidConfig(_)) => USAGE,
            Self::Feature(_) => DATA,
            Self::Svr(SvrError::InvalidParams(_)) => USAGE,
            Self::Svr(_) => DATA,
            Self::Model(ModelFileError::Unserializable(_)) => INTERNAL,
            Self::Model(_) => DATA,
            Self::Tuning(
                TuningError::EmptyGrid(_)
                | TuningError::InvalidGrid { .. }
                | TuningError::InvalidFolds { .. }
                | TuningError::Config(_),
            ) => USAGE,
            Self::Tuning(TuningError::Pool(_)) | Self::Internal(_) => INTERNAL,
            Self::Tuning(_) => DATA,
        }
    }
}
