use std::process::ExitCode;

/// Exit status for a bad flag, config file or input file.
pub const EXIT_CONFIG: u8 = 2;
/// Exit status when the numerics fail on valid input.
pub const EXIT_NUMERICAL: u8 = 3;
/// Exit status for file system failures.
pub const EXIT_IO: u8 = 4;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("config: {0}")]
    Config(String),
    #[error(transparent)]
    Core(#[from] hcdyn::Error),
    #[error("{path}: {message}")]
    Io { path: String, message: String },
}

impl CliError {
    pub fn io(path: &std::path::Path, e: std::io::Error) -> Self {
        CliError::Io {
            path: path.display().to_string(),
            message: e.to_string(),
        }
    }

    pub fn exit_code(&self) -> ExitCode {
        ExitCode::from(match self {
            CliError::Config(_) => EXIT_CONFIG,
            CliError::Io { .. } | CliError::Core(hcdyn::Error::Io(_)) => EXIT_IO,
            CliError::Core(e) if e.is_input_error() => EXIT_CONFIG,
            CliError::Core(_) => EXIT_NUMERICAL,
        })
    }
}

pub type CliResult<T> = Result<T, CliError>;
