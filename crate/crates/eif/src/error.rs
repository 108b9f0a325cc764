use std::fmt;

/// Failure of a command, with its process exit code.
#[derive(Debug)]
pub enum CliError {
    /// Bad configuration, arguments or input data.
    Config(String),
    Io(String),
    Core(eif_core::Error),
}

impl CliError {
    /// 1 for configuration, input and IO problems, 2 for numerical failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) | CliError::Io(_) => 1,
            CliError::Core(e) if e.is_input_error() || matches!(e, eif_core::Error::Domination(_)) => 1,
            CliError::Core(_) => 2,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Config(m) => write!(f, "config error: {m}"),
            CliError::Io(m) => write!(f, "io error: {m}"),
            CliError::Core(e) => write!(f, "{e}"),
        }
    }
}

impl std::error::Error for CliError {}

impl From<eif_core::Error> for CliError {
    fn from(e: eif_core::Error) -> Self {
        CliError::Core(e)
    }
}
