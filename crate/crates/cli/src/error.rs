use std::io;
use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Core(#[from] xxrelay::Error),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: io::Error },
    #[error("csv output: {0}")]
    Csv(#[from] csv::Error),
    #[error("manifest: {0}")]
    Manifest(String),
    #[error("thread pool: {0}")]
    Threads(#[from] rayon::ThreadPoolBuildError),
}

impl CliError {
    pub fn io(path: impl Into<PathBuf>, source: io::Error) -> Self {
        CliError::Io { path: path.into(), source }
    }

    /// 2 for configuration and argument problems, 3 for numerical failures
    /// and unsuccessful searches, 1 otherwise.
    pub fn exit_code(&self) -> i32 {
        use xxrelay::Error as E;
        match self {
            CliError::Config(_) => 2,
            CliError::Core(e) => match e {
                E::InvalidConfig(_)
                | E::InvalidParameter(_)
                | E::InvalidArgument(_)
                | E::InvalidPair { .. }
                | E::InvalidInterval(_)
                | E::SizeLimit { .. } => 2,
                E::Numerical { .. } | E::NoMaximum(_) | E::NotFound(_) | E::NonMonotone(_) => 3,
            },
            _ => 1,
        }
    }
}
