use miso_cache::Error;
use thiserror::Error;

pub const EXIT_FAILURE: u8 = 1;
pub const EXIT_USAGE: u8 = 2;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),

    #[error(transparent)]
    Core(#[from] Error),

    #[error("write failed: {0}")]
    Io(#[from] std::io::Error),

    #[error("csv output failed: {0}")]
    Csv(#[from] csv::Error),

    #[error("json output failed: {0}")]
    Json(#[from] serde_json::Error),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => EXIT_USAGE,
            CliError::Core(Error::Range(_) | Error::Demand(_) | Error::Divisibility { .. }) => {
                EXIT_USAGE
            }
            CliError::Core(_) => EXIT_FAILURE,
            CliError::Io(_) | CliError::Csv(_) | CliError::Json(_) => EXIT_FAILURE,
        }
    }
}

/// Result of a command that ran to completion. `Failed` carries the reason
/// a property check did not hold; output has already been written.
#[derive(Debug, PartialEq)]
pub enum Status {
    Ok,
    Failed(String),
}
