use distfit_core::Error as CoreError;
use thiserror::Error;

/// Error categories, each with its own process exit code.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error("data error: {0}")]
    Data(String),
    #[error("numerical failure: {0}")]
    Numerical(String),
    #[error("i/o error: {0}")]
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Data(_) => 3,
            CliError::Numerical(_) => 4,
            CliError::Io(_) => 1,
        }
    }

    pub fn hint(&self) -> &'static str {
        match self {
            CliError::Config(_) => "check the config file and --set overrides",
            CliError::Data(_) => "fix the named file, line or field and rerun",
            CliError::Numerical(_) => {
                "try other starting values, a finer quadrature, or fixing poorly identified parameters"
            }
            CliError::Io(_) => "check that the output directory is writable",
        }
    }

    /// Wraps a library error raised while processing input data.
    pub fn from_core(context: &str, e: CoreError) -> Self {
        let msg = format!("{context}: {e}");
        match e {
            CoreError::Degenerate(_)
            | CoreError::DensityUnderflow { .. }
            | CoreError::NonFinite(_)
            | CoreError::Numerical(_) => CliError::Numerical(msg),
            _ => CliError::Data(msg),
        }
    }
}
