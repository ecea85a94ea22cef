use std::path::PathBuf;

use biphasic_core::error::Error as CoreError;

/// Process exit codes of the command line tool.
pub mod exit {
    pub const OK: u8 = 0;
    /// A verification check or a sweep run failed.
    pub const CHECK_FAILED: u8 = 1;
    /// Bad command line usage.
    pub const USAGE: u8 = 2;
    /// Invalid configuration, mesh or boundary data.
    pub const CONFIG: u8 = 3;
    /// The solver could not complete a time step.
    pub const STEP_FAILURE: u8 = 4;
    /// Reading or writing a file failed.
    pub const IO: u8 = 5;
}

#[derive(Debug, thiserror::Error)]
pub enum AppError {
    #[error("{}:{line}: {message}", path.display())]
    Parse {
        path: PathBuf,
        line: usize,
        message: String,
    },

    #[error("configuration error: {0}")]
    Config(String),

    #[error(transparent)]
    Core(#[from] CoreError),

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl AppError {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Self::Io {
            path: path.into(),
            source,
        }
    }

    pub fn exit_code(&self) -> u8 {
        match self {
            Self::Parse { .. } | Self::Config(_) => exit::CONFIG,
            Self::Io { .. } => exit::IO,
            Self::Core(e) => match e {
                CoreError::StepFailure { .. }
                | CoreError::InvertedElement { .. }
                | CoreError::LinearSolver(_) => exit::STEP_FAILURE,
                CoreError::MetricUndefined(_) | CoreError::Refused(_) => exit::CHECK_FAILED,
                _ => exit::CONFIG,
            },
        }
    }
}

pub type Result<T, E = AppError> = std::result::Result<T, E>;
