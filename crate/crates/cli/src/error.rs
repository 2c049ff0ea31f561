use std::process::ExitCode;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error("{0}")]
    Core(#[from] skaudit_core::Error),
    #[error("{path}: {message}")]
    Io { path: String, message: String },
    #[error("csv error: {0}")]
    Csv(String),
}

impl CliError {
    pub fn io(path: &std::path::Path, err: impl std::fmt::Display) -> Self {
        Self::Io {
            path: path.display().to_string(),
            message: err.to_string(),
        }
    }

    /// Usage, config and runtime errors all exit with 2.
    pub fn exit_code(&self) -> ExitCode {
        ExitCode::from(2)
    }
}

pub type CliResult<T> = Result<T, CliError>;
