use std::path::PathBuf;

use chemowave::RunFailure;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("`{key}`: {msg}")]
    Invalid { key: String, msg: String },

    #[error(transparent)]
    Model(#[from] chemowave::Error),

    #[error("{0}")]
    Run(#[from] RunFailure),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
}

impl HarnessError {
    /// 1 for invalid input or I/O trouble, 2 for numerical faults.
    pub fn exit_code(&self) -> i32 {
        let numerical = match self {
            HarnessError::Model(e) => e.is_numerical(),
            HarnessError::Run(f) => f.error.is_numerical(),
            _ => false,
        };
        if numerical {
            2
        } else {
            1
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>) -> impl FnOnce(std::io::Error) -> Self {
        let path = path.into();
        move |source| HarnessError::Io { path, source }
    }

    // core parameter errors name their key; keep that when surfacing them
    pub(crate) fn keyed(key: &str, err: chemowave::Error) -> Self {
        match err {
            chemowave::Error::InvalidParameter { name, reason } => HarnessError::Invalid {
                key: name.to_string(),
                msg: reason,
            },
            chemowave::Error::InvalidProfile(msg) | chemowave::Error::InvalidGrid(msg) => {
                HarnessError::Invalid {
                    key: key.to_string(),
                    msg,
                }
            }
            other => HarnessError::Model(other),
        }
    }
}

pub type Result<T, E = HarnessError> = std::result::Result<T, E>;
