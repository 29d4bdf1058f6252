use std::path::Path;

use chiral_array_core::Error as CoreError;

/// Exit status 1: rejected input. Exit status 2: numerical or IO failure.
#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("invalid `{param}`: {message}")]
    Validation { param: String, message: String },

    #[error("{context}: {source}")]
    Numeric {
        context: String,
        #[source]
        source: CoreError,
    },

    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    #[error("{0}")]
    Output(String),
}

impl CliError {
    pub fn validation(param: impl Into<String>, message: impl Into<String>) -> Self {
        CliError::Validation {
            param: param.into(),
            message: message.into(),
        }
    }

    pub fn io(path: &Path, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.display().to_string(),
            source,
        }
    }

    /// Parameter errors become validation failures under `section`;
    /// everything else is numeric.
    pub fn from_core(section: &str, err: CoreError) -> Self {
        match err {
            CoreError::InvalidParameter { name, reason } => CliError::validation(format!("{section}.{name}"), reason),
            CoreError::DimensionMismatch { expected, actual } => {
                CliError::validation(section, format!("expected {expected} values, got {actual}"))
            }
            other => CliError::Numeric {
                context: section.to_string(),
                source: other,
            },
        }
    }

    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Validation { .. } => 1,
            _ => 2,
        }
    }
}
