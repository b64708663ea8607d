use thiserror::Error;

/// Failures of the command-line harness, mapped to exit codes by
/// [`CliError::exit_code`].
#[derive(Debug, Error)]
pub enum CliError {
    /// Invalid flags, config entries or input files; detected before any
    /// integration starts.
    #[error("usage error: {0}")]
    Usage(String),

    /// A run failed numerically (stage solver divergence, non-finite state).
    #[error("numerical failure: {0}")]
    Numerical(#[from] hamint::Error),

    /// A run inside a multi-run command failed.
    #[error("run failed: {0}")]
    RunFailed(String),

    /// One or more sweep rows failed; the table was still written.
    #[error("{failed} of {total} runs failed")]
    Partial { failed: usize, total: usize },

    #[error("{path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
}

impl CliError {
    pub const USAGE_EXIT: i32 = 2;
    pub const FAILURE_EXIT: i32 = 1;

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => Self::USAGE_EXIT,
            _ => Self::FAILURE_EXIT,
        }
    }

    pub fn usage(message: impl Into<String>) -> Self {
        CliError::Usage(message.into())
    }

    pub fn io(path: impl AsRef<std::path::Path>, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.as_ref().display().to_string(),
            source,
        }
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;
