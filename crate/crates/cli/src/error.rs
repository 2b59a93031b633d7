use std::path::PathBuf;

use thiserror::Error;

/// Process exit codes.
pub const EXIT_INPUT: i32 = 2;
pub const EXIT_CONFIG: i32 = 3;
pub const EXIT_RUNTIME: i32 = 4;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{}: {source}", path.display())]
    Io { path: PathBuf, source: std::io::Error },

    #[error("{}: line {line}: {msg}", path.display())]
    Parse { path: PathBuf, line: u64, msg: String },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error(transparent)]
    Library(#[from] slseg::Error),
}

impl CliError {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        CliError::Io { path: path.into(), source }
    }

    pub fn exit_code(&self) -> i32 {
        use slseg::Error as E;
        match self {
            CliError::Io { .. } | CliError::Parse { .. } => EXIT_INPUT,
            CliError::Config(_) => EXIT_CONFIG,
            CliError::Library(e) => match e {
                E::InvalidPanel(_) | E::NonCount { .. } => EXIT_INPUT,
                E::InvalidScoreParams(_) | E::Config(_) | E::Domain(_) | E::Unreachable { .. } => EXIT_CONFIG,
                _ => EXIT_RUNTIME,
            },
        }
    }
}

pub type Result<T, E = CliError> = std::result::Result<T, E>;
