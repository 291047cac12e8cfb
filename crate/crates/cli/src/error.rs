use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),

    #[error(transparent)]
    Core(#[from] rabishift::Error),

    #[error("I/O error on {}: {source}", path.display())]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },

    /// Files were written but at least one numerical check failed.
    #[error("tolerance not met:\n  {}", .0.join("\n  "))]
    Tolerance(Vec<String>),
}

impl CliError {
    pub(crate) fn config(msg: impl Into<String>) -> Self {
        CliError::Config(msg.into())
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: impl Into<std::io::Error>) -> Self {
        CliError::Io {
            path: path.into(),
            source: source.into(),
        }
    }

    /// 2 config, 3 capacity, 4 numerical tolerance, 1 anything else.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Core(rabishift::Error::Domain(_)) => 2,
            CliError::Core(rabishift::Error::Capacity { .. }) => 3,
            CliError::Core(_) => 4,
            CliError::Tolerance(_) => 4,
            CliError::Io { .. } => 1,
        }
    }
}
