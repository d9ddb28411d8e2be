use std::path::Path;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("invalid `{field}`: {message}")]
    Config { field: String, message: String },

    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Core(#[from] mesoheat_core::Error),

    /// A study or comparison ran but missed its declared tolerance.
    #[error("tolerance not met: {0}")]
    Tolerance(String),
}

impl CliError {
    pub fn config(field: &str, message: impl Into<String>) -> Self {
        CliError::Config {
            field: field.to_string(),
            message: message.into(),
        }
    }

    pub fn io(path: &Path, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.display().to_string(),
            source,
        }
    }

    /// 1 for bad input or I/O, 2 for numerical failure.
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Config { .. } | CliError::Io { .. } => 1,
            CliError::Core(e) if e.is_numerical() => 2,
            CliError::Core(_) => 1,
            CliError::Tolerance(_) => 2,
        }
    }
}

/// Attributes a validation failure from the core library to a config field.
pub fn at(field: &'static str) -> impl Fn(mesoheat_core::Error) -> CliError {
    move |e| {
        if e.is_numerical() {
            CliError::Core(e)
        } else {
            CliError::config(field, e.to_string())
        }
    }
}
