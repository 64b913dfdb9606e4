use std::path::PathBuf;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("numeric guard failed: {0}")]
    Guard(String),
    #[error("cannot write {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("cannot read input: {0}")]
    Input(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) => 2,
            CliError::Guard(_) => 3,
            CliError::Io { .. } | CliError::Input(_) => 4,
        }
    }
}

impl From<kicked_rotor::Error> for CliError {
    fn from(e: kicked_rotor::Error) -> Self {
        match e {
            kicked_rotor::Error::Parameter(msg) => CliError::Config(msg),
            other => CliError::Guard(other.to_string()),
        }
    }
}
