use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),

    #[error("physics error: {0}")]
    Physics(#[from] eneon_core::Error),

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{failed} validation check(s) failed")]
    ValidationFailed { failed: usize },
}

impl CliError {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        CliError::Io { path: path.into(), source }
    }

    /// Process exit status: 1 failed checks, 2 config, 3 physics, 4 I/O.
    pub fn exit_code(&self) -> u8 {
        use eneon_core::Error as E;
        match self {
            CliError::ValidationFailed { .. } => 1,
            CliError::Config(_) => 2,
            CliError::Physics(E::InvalidParams { .. } | E::InvalidRate { .. } | E::InvalidConfig(_)) => 2,
            CliError::Physics(_) => 3,
            CliError::Io { .. } => 4,
        }
    }
}

pub type CliResult<T> = Result<T, CliError>;
