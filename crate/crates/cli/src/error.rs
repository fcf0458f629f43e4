use thiserror::Error;

/// Failures that stop a command before or outside the numerical run.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error in `{field}`: {message}")]
    Config { field: String, message: String },
    #[error("cannot read snapshot {path}: {message}")]
    Snapshot { path: String, message: String },
    #[error("i/o error on {path}: {message}")]
    Io { path: String, message: String },
    #[error(transparent)]
    Core(#[from] muskat_core::Error),
}

impl CliError {
    pub fn config(field: impl Into<String>, message: impl Into<String>) -> Self {
        CliError::Config {
            field: field.into(),
            message: message.into(),
        }
    }

    pub fn io(path: impl AsRef<std::path::Path>, e: impl std::fmt::Display) -> Self {
        CliError::Io {
            path: path.as_ref().display().to_string(),
            message: e.to_string(),
        }
    }

    /// Process exit status.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config { .. } | CliError::Snapshot { .. } => 2,
            CliError::Io { .. } => 3,
            CliError::Core(_) => 4,
        }
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;
