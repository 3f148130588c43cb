use std::path::PathBuf;

use horobcz_core::Error as CoreError;
use thiserror::Error;

pub type CliResult<T> = Result<T, CliError>;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),

    #[error(transparent)]
    Core(#[from] CoreError),

    #[error("cannot write {}: {source}", path.display())]
    Write { path: PathBuf, source: std::io::Error },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl CliError {
    /// 2 for bad input of any kind, 1 for failures while computing or writing.
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Core(
                CoreError::FieldTag(_)
                | CoreError::Parse(_)
                | CoreError::Preset(_)
                | CoreError::UndersizedWindow(_)
                | CoreError::NotHorizontallyShort(_)
                | CoreError::Domain(_)
                | CoreError::Hypothesis(_)
                | CoreError::Io(_)
                | CoreError::Json(_),
            ) => 2,
            _ => 1,
        }
    }
}
