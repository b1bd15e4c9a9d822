use std::path::{Path, PathBuf};

use thiserror::Error;

/// Pipeline failures, split by the exit code they map to.
#[derive(Debug, Error)]
pub enum PipelineError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}:{line}: {message}")]
    Parse {
        path: PathBuf,
        line: usize,
        message: String,
    },
    #[error("{path}: {message}")]
    Invalid { path: PathBuf, message: String },
    #[error(transparent)]
    Core(#[from] groundwork_core::Error),
    #[error("{0}")]
    Validation(String),
    #[error("missing input {0}")]
    MissingInput(PathBuf),
    #[error("{stage} has not been run for video {video}; run it first")]
    MissingStage { stage: &'static str, video: String },
    #[error("video {video} is locked by a running annotation service ({lock})")]
    Locked { video: String, lock: PathBuf },
}

impl PipelineError {
    pub fn io(path: &Path, source: std::io::Error) -> Self {
        if source.kind() == std::io::ErrorKind::NotFound {
            Self::MissingInput(path.to_path_buf())
        } else {
            Self::Io {
                path: path.to_path_buf(),
                source,
            }
        }
    }

    pub fn invalid(path: &Path, message: impl Into<String>) -> Self {
        Self::Invalid {
            path: path.to_path_buf(),
            message: message.into(),
        }
    }

    /// 2 for missing inputs or stages, 1 for everything else.
    pub fn exit_code(&self) -> i32 {
        match self {
            Self::MissingInput(_) | Self::MissingStage { .. } => 2,
            _ => 1,
        }
    }
}

pub type Result<T, E = PipelineError> = std::result::Result<T, E>;
