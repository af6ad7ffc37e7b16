use std::path::PathBuf;

use thiserror::Error;

use crate::compose::ComposeError;
use crate::corpus::CorpusError;
use crate::eval::EvalError;
use crate::linalg::LinalgError;
use crate::senses::SenseError;
use crate::train::TrainError;

/// Crate-wide error: file and format problems plus every module error.
#[derive(Debug, Error)]
pub enum Error {
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("{}: line {line}: {message}", path.display())]
    Parse {
        path: PathBuf,
        line: usize,
        message: String,
    },
    #[error("{}: {message}", path.display())]
    Format { path: PathBuf, message: String },
    #[error(transparent)]
    Linalg(#[from] LinalgError),
    #[error(transparent)]
    Corpus(#[from] CorpusError),
    #[error(transparent)]
    Train(#[from] TrainError),
    #[error(transparent)]
    Sense(#[from] SenseError),
    #[error(transparent)]
    Compose(#[from] ComposeError),
    #[error(transparent)]
    Eval(#[from] EvalError),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn format(path: impl Into<PathBuf>, message: impl Into<String>) -> Self {
        Error::Format {
            path: path.into(),
            message: message.into(),
        }
    }

    pub(crate) fn parse(path: impl Into<PathBuf>, line: usize, message: impl Into<String>) -> Self {
        Error::Parse {
            path: path.into(),
            line,
            message: message.into(),
        }
    }

    /// True for failures of the numerical kind (non-PSD input, degenerate
    /// composition, undefined statistics) as opposed to bad files or data.
    pub fn is_numeric(&self) -> bool {
        match self {
            Error::Linalg(_) => true,
            Error::Compose(e) => e.is_numeric(),
            Error::Sense(SenseError::Linalg(_)) => true,
            Error::Eval(EvalError::Undefined(_)) => true,
            _ => false,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
