use std::fmt;

use causal_ssl_core::Error as CoreError;

use crate::csv_io::LoadError;

/// Top-level error of a CLI invocation, split by exit code.
#[derive(Debug)]
pub enum CliError {
    /// Bad flags, configuration files or protocol settings. Exit code 2.
    Config(String),
    /// Unusable input data or failed IO. Exit code 3.
    Data(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Data(_) => 3,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Config(m) => write!(f, "configuration error: {m}"),
            CliError::Data(m) => write!(f, "data error: {m}"),
        }
    }
}

impl std::error::Error for CliError {}

impl From<CoreError> for CliError {
    fn from(e: CoreError) -> Self {
        match e {
            CoreError::InvalidConfig(_) | CoreError::UnknownPreset(_) => CliError::Config(e.to_string()),
            _ => CliError::Data(e.to_string()),
        }
    }
}

impl From<LoadError> for CliError {
    fn from(e: LoadError) -> Self {
        match e {
            LoadError::MissingColumn(_) | LoadError::PositiveLabelAbsent(_) | LoadError::Partition(_) => {
                CliError::Config(e.to_string())
            }
            LoadError::Dataset(inner) => inner.into(),
            _ => CliError::Data(e.to_string()),
        }
    }
}
