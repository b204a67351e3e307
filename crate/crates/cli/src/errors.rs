//! Error-to-exit-code mapping: 1 config, 2 missing artifact, 3 data.

use std::fmt;
use std::path::Path;

#[derive(Debug)]
pub enum CliError {
    Config(String),
    MissingArtifact(String),
    Data(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 1,
            CliError::MissingArtifact(_) => 2,
            CliError::Data(_) => 3,
        }
    }

    pub fn missing(path: &Path) -> CliError {
        CliError::MissingArtifact(format!(
            "required artifact {} does not exist; run the producing subcommand first",
            path.display()
        ))
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Config(m) => write!(f, "config error: {m}"),
            CliError::MissingArtifact(m) => write!(f, "missing artifact: {m}"),
            CliError::Data(m) => write!(f, "data error: {m}"),
        }
    }
}

impl std::error::Error for CliError {}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Data(e.to_string())
    }
}

pub type CliResult<T> = Result<T, CliError>;
