use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    /// Unreadable, malformed or inconsistent scenario file.
    #[error("{path}: {message}")]
    ConfigParse { path: PathBuf, message: String },

    #[error("usage: {0}")]
    Usage(String),

    #[error("{context}: {source}")]
    Compute {
        context: String,
        #[source]
        source: swarmdyn::Error,
    },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 2,
            CliError::ConfigParse { .. } => 3,
            CliError::Compute { .. } => 4,
            CliError::Io { .. } => 5,
        }
    }

    pub(crate) fn compute(context: impl Into<String>) -> impl FnOnce(swarmdyn::Error) -> CliError {
        let context = context.into();
        move |source| CliError::Compute { context, source }
    }
}
