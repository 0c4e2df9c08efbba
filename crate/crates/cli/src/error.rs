use thiserror::Error;

/// Failures surfaced by the command line, each mapped to an exit code.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("usage: {0}")]
    Usage(String),
    #[error("i/o: {0}")]
    Io(String),
    #[error("invalid scenario: {0}")]
    Scenario(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) | CliError::Io(_) => 1,
            CliError::Scenario(_) => 2,
        }
    }
}

impl From<sheafcoord::SheafError> for CliError {
    fn from(e: sheafcoord::SheafError) -> Self {
        CliError::Scenario(e.to_string())
    }
}
