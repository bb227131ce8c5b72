//! Exit-code policy: 0 success, 2 config/usage, 3 numeric divergence,
//! 4 partial comparison failure, 5 empty-result diagnostic, 1 anything else.

use as_softmax::Error;

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Divergence(String),
    Partial(String),
    Empty(String),
    Other(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Divergence(_) => 3,
            CliError::Partial(_) => 4,
            CliError::Empty(_) => 5,
            CliError::Other(_) => 1,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Usage(m)
            | CliError::Divergence(m)
            | CliError::Partial(m)
            | CliError::Empty(m)
            | CliError::Other(m) => f.write_str(m),
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match e {
            Error::Numeric { .. } => CliError::Divergence(e.to_string()),
            Error::Config(_) | Error::Contract(_) | Error::InvalidInput(_) | Error::Load { .. } => {
                CliError::Usage(e.to_string())
            }
            other => CliError::Other(other.to_string()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Other(format!("i/o error: {e}"))
    }
}
