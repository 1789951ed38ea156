use thiserror::Error;

/// Exit code for usage errors, matching clap's own.
pub const EXIT_USAGE: i32 = 2;
/// Exit code when a replay does not reproduce the recorded artifacts.
pub const EXIT_REPLAY_MISMATCH: i32 = 50;

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Core(#[from] heckfa::Error),

    #[error("{0}")]
    Usage(String),

    #[error("replay differs from the recorded run in: {}", .0.join(", "))]
    ReplayMismatch(Vec<String>),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Core(e) => e.exit_code(),
            CliError::Usage(_) => EXIT_USAGE,
            CliError::ReplayMismatch(_) => EXIT_REPLAY_MISMATCH,
        }
    }
}

pub type CliResult<T> = Result<T, CliError>;

pub fn config_error(msg: impl Into<String>) -> CliError {
    CliError::Core(heckfa::Error::InvalidConfig(msg.into()))
}
