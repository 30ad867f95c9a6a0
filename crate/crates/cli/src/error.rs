use std::path::PathBuf;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Validation(String),
    #[error(transparent)]
    Numeric(#[from] pastq::Error),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("{failed} selftest check(s) failed")]
    SelftestFailed { failed: usize },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Validation(_) => 1,
            CliError::Numeric(pastq::Error::InvalidArgument(_)) => 1,
            CliError::Numeric(_) | CliError::Io { .. } => 2,
            CliError::SelftestFailed { .. } => 3,
        }
    }
}
