use std::path::PathBuf;

use crate::config::ConfigError;

/// Failure of a CLI run, mapped onto the process exit code.
#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Core(#[from] vpme_core::Error),
    #[error("{path}:{line}: {reason}")]
    Format { path: PathBuf, line: usize, reason: String },
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("invalid environment: {0}")]
    Environment(String),
}

impl CliError {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Self::Io { path: path.into(), source }
    }

    /// 2 for bad input or configuration, 3 when the nonlinear solve fails.
    pub fn exit_code(&self) -> i32 {
        match self {
            Self::Core(vpme_core::Error::NoConvergence { .. }) => 3,
            _ => 2,
        }
    }

    /// Short machine-readable category.
    pub fn kind(&self) -> &'static str {
        match self {
            Self::Config(_) => "config",
            Self::Core(vpme_core::Error::NoConvergence { .. }) => "no_convergence",
            Self::Core(_) => "invalid_input",
            Self::Format { .. } => "format",
            Self::Io { .. } => "io",
            Self::Environment(_) => "environment",
        }
    }
}
