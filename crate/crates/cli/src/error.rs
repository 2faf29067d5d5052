use std::io;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("numerical non-convergence: {0}")]
    NonConvergence(String),

    #[error("invariant check failed: {0}")]
    Invariant(String),

    #[error("i/o error on {path}: {source}")]
    Io { path: String, source: io::Error },
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Io { .. } => 1,
            CliError::Config(_) => 2,
            CliError::NonConvergence(_) => 3,
            CliError::Invariant(_) => 4,
        }
    }

    pub fn io(path: impl Into<String>, source: io::Error) -> Self {
        CliError::Io {
            path: path.into(),
            source,
        }
    }
}

impl From<dsi_barrier_core::Error> for CliError {
    fn from(e: dsi_barrier_core::Error) -> Self {
        use dsi_barrier_core::Error as E;
        match e {
            E::NonConvergence { .. } => CliError::NonConvergence(e.to_string()),
            E::Domain(_) | E::NonRealRoots { .. } | E::Config(_) => CliError::Config(e.to_string()),
        }
    }
}

pub type CliResult<T> = Result<T, CliError>;
