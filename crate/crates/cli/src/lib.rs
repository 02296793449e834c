//! Command-line front end for `vpme-core`: configuration files, text
//! snapshots, scenario drivers and run manifests.

pub mod config;
pub mod error;
pub mod io;
pub mod report;
pub mod scenario;
pub mod verify;

pub use config::{ConfigError, RunConfig, VerifyScale};
pub use error::CliError;
pub use report::{RunManifest, Verdict};
pub use scenario::{run_scenario, Outcome, RunOptions, Scenario};

/// Reads the worker cap from `VPME_THREADS`; unset means one.
pub fn threads_from_env() -> Result<usize, CliError> {
    match std::env::var("VPME_THREADS") {
        Err(_) => Ok(1),
        Ok(s) => match s.trim().parse::<usize>() {
            Ok(n) if n > 0 => Ok(n),
            _ => Err(CliError::Environment(format!("VPME_THREADS must be a positive integer, got `{s}`"))),
        },
    }
}
