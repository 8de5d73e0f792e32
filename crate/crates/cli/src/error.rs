use std::process::ExitCode;

use martlab::Error;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    /// Bad flags, files or combinations: exit 2.
    #[error("{0}")]
    Config(String),
    /// A verification or comparison failed: exit 1.
    #[error("{0}")]
    Failed(String),
    #[error(transparent)]
    Core(#[from] Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type CliResult<T> = std::result::Result<T, CliError>;

impl CliError {
    /// The reader of standard output went away, as with `| head`.
    pub fn is_broken_pipe(&self) -> bool {
        let io = match self {
            CliError::Io(e) | CliError::Core(Error::Io(e)) => e,
            _ => return false,
        };
        io.kind() == std::io::ErrorKind::BrokenPipe
    }

    pub fn exit_code(&self) -> ExitCode {
        let code = match self {
            CliError::Config(_) | CliError::Io(_) => 2,
            CliError::Failed(_) => 1,
            CliError::Core(e) => match e {
                Error::InvalidDist(_)
                | Error::ParseRational(_)
                | Error::HorizonCap { .. }
                | Error::HorizonMismatch { .. }
                | Error::InvalidProbSeq(_)
                | Error::InvalidEpsRule(_)
                | Error::KernelSpec(_)
                | Error::Invalid(_)
                | Error::Io(_)
                | Error::Json(_)
                | Error::Csv(_) => 2,
                Error::EnumerationBudget { .. }
                | Error::BudgetInsufficient { .. }
                | Error::ScheduleCap { .. }
                | Error::InsufficientData { .. } => 1,
            },
        };
        ExitCode::from(code)
    }
}

pub fn config_err(msg: impl Into<String>) -> CliError {
    CliError::Config(msg.into())
}
