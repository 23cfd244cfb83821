use thiserror::Error;

/// CLI errors carrying their process exit code: 2 for configuration or schema
/// problems, 3 for numerical failures, 4 for output I/O, 1 for a compare run
/// that exceeded its tolerance.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("numerical failure: {0}")]
    Numerical(String),
    #[error("output error: {0}")]
    Io(String),
    #[error("comparison exceeded tolerance: {0}")]
    ToleranceExceeded(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::ToleranceExceeded(_) => 1,
            CliError::Config(_) => 2,
            CliError::Numerical(_) => 3,
            CliError::Io(_) => 4,
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e.to_string())
    }
}
