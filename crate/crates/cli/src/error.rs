use thiserror::Error;

/// Failures of a CLI run. Malformed input maps to its own exit code.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("malformed input: {0}")]
    Malformed(String),

    #[error(transparent)]
    Core(#[from] isoslice::Error),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Malformed(_) => EXIT_MALFORMED,
            CliError::Core(isoslice::Error::InvalidArgument(_)) => EXIT_MALFORMED,
            _ => EXIT_FAILED,
        }
    }
}

pub fn malformed(msg: impl Into<String>) -> CliError {
    CliError::Malformed(msg.into())
}

pub type CliResult<T> = std::result::Result<T, CliError>;

pub const EXIT_PASS: i32 = 0;
pub const EXIT_FAILED: i32 = 1;
pub const EXIT_MALFORMED: i32 = 2;
