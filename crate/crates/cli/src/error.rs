use std::path::PathBuf;

/// Everything `run` can fail with, grouped by exit code.
#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Input(String),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("engine failure: {0}")]
    Engine(String),
}

impl CliError {
    pub fn input(msg: impl Into<String>) -> Self {
        CliError::Input(msg.into())
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Input(_) | CliError::Io { .. } => crate::EXIT_INPUT,
            CliError::Engine(_) => crate::EXIT_ENGINE,
        }
    }
}

impl From<liyau_core::Error> for CliError {
    fn from(e: liyau_core::Error) -> Self {
        if e.is_input_error() {
            CliError::Input(e.to_string())
        } else {
            CliError::Engine(e.to_string())
        }
    }
}
