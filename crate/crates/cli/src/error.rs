use std::fmt;
use std::path::Path;

use thiserror::Error;

pub type Result<T, E = CliError> = std::result::Result<T, E>;

/// A scenario-file problem at a JSON location such as `process["M B"]`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FieldError {
    pub location: String,
    pub detail: String,
}

impl FieldError {
    pub fn new(location: impl Into<String>, detail: impl fmt::Display) -> Self {
        FieldError {
            location: location.into(),
            detail: detail.to_string(),
        }
    }
}

impl fmt::Display for FieldError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.location, self.detail)
    }
}

impl std::error::Error for FieldError {}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{path}: {detail}")]
    Parse { path: String, detail: String },

    #[error("cannot {action} `{path}`: {source}")]
    Io {
        action: &'static str,
        path: String,
        #[source]
        source: std::io::Error,
    },

    #[error("invalid argument: {0}")]
    Usage(String),

    #[error("{0}")]
    Failed(String),

    #[error(transparent)]
    Core(#[from] rewardrig_core::Error),

    #[error(transparent)]
    Grid(#[from] rewardrig_gridworld::Error),
}

impl CliError {
    pub fn parse(path: &Path, detail: impl fmt::Display) -> Self {
        CliError::Parse {
            path: path.display().to_string(),
            detail: detail.to_string(),
        }
    }

    pub fn io(action: &'static str, path: &Path, source: std::io::Error) -> Self {
        CliError::Io {
            action,
            path: path.display().to_string(),
            source,
        }
    }

    /// 0 ok, 1 verification or precondition failure, 2 parse error, 3 IO error.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Parse { .. } | CliError::Usage(_) => 2,
            CliError::Io { .. } => 3,
            CliError::Failed(_) | CliError::Core(_) | CliError::Grid(_) => 1,
        }
    }
}
