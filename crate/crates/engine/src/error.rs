use std::path::PathBuf;

use rjoin_core::CoreError;

/// Errors from the IO / orchestration layer.
#[derive(Debug, thiserror::Error)]
pub enum EngineError {
    #[error("io error at {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("parse error at {path}:{line}: {msg}")]
    Parse {
        path: PathBuf,
        line: usize,
        msg: String,
    },
    #[error("format error in {path}: {msg}")]
    Format { path: PathBuf, msg: String },
    #[error("config error: {0}")]
    Config(String),
    #[error("duplicate dataset id {0:?}")]
    DuplicateId(String),
    #[error("repository is empty")]
    EmptyRepository,
    #[error("block {block_id} holds {count} points, over the {cap} cap")]
    Capacity {
        block_id: usize,
        count: usize,
        cap: usize,
    },
    #[error("repository locked (remove {0} if no other command is running)")]
    Locked(PathBuf),
    #[error("unknown dataset id {0:?} (ingest it first)")]
    UnknownDataset(String),
    #[error(transparent)]
    Core(#[from] CoreError),
}

impl EngineError {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        EngineError::Io {
            path: path.into(),
            source,
        }
    }

    /// CLI exit code: 1 for user mistakes, 2 for internal failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            EngineError::Io { .. }
            | EngineError::Parse { .. }
            | EngineError::Config(_)
            | EngineError::DuplicateId(_)
            | EngineError::UnknownDataset(_)
            | EngineError::Locked(_) => 1,
            _ => 2,
        }
    }
}

pub type Result<T> = std::result::Result<T, EngineError>;
