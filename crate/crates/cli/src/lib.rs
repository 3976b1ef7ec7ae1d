//! Experiment runner: one JSON config in, a JSON certificate and CSV tables out.
//!
//! Every experiment is computed fully in memory before anything is written,
//! so a failing run leaves no partial artifacts behind.

pub mod artifacts;
pub mod config;
mod experiments;
pub mod report;

use std::path::{Path, PathBuf};

use nilfix::report::CheckRecord;
use thiserror::Error;

pub use artifacts::{Artifacts, CERTIFICATE_FILE};
pub use config::{ExperimentConfig, Kind};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("invalid config at `{path}`: {message}")]
    ConfigInvalid { path: String, message: String },
    #[error("missing artifact {0}")]
    MissingArtifact(PathBuf),
    #[error("i/o error on {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{context}: {message}")]
    Module { context: String, message: String },
}

impl CliError {
    pub(crate) fn invalid(path: impl Into<String>, message: impl Into<String>) -> Self {
        CliError::ConfigInvalid { path: path.into(), message: message.into() }
    }

    pub(crate) fn module(context: impl Into<String>, e: impl std::fmt::Display) -> Self {
        CliError::Module { context: context.into(), message: e.to_string() }
    }

    pub(crate) fn io(path: &Path, source: std::io::Error) -> Self {
        CliError::Io { path: path.to_path_buf(), source }
    }
}

/// Exit code for an execution error.
pub const EXIT_ERROR: i32 = 1;
/// Exit code when at least one declared check failed.
pub const EXIT_CHECK_FAILED: i32 = 2;

/// Checks of a finished run and the files written for it.
#[derive(Debug)]
pub struct RunOutcome {
    pub checks: Vec<CheckRecord>,
    pub written: Vec<PathBuf>,
}

impl RunOutcome {
    pub fn exit_code(&self) -> i32 {
        if self.checks.iter().all(|c| c.pass) {
            0
        } else {
            EXIT_CHECK_FAILED
        }
    }
}

/// Runs the experiment without touching the file system.
pub fn execute(cfg: &ExperimentConfig) -> Result<Artifacts, CliError> {
    let params = cfg.validate()?;
    experiments::run(cfg, params)
}

/// Runs the experiment and writes its artifacts into `cfg.output_dir`.
pub fn run(cfg: &ExperimentConfig) -> Result<RunOutcome, CliError> {
    let art = execute(cfg)?;
    let written = art.write(&cfg.output_dir)?;
    Ok(RunOutcome { checks: art.checks, written })
}

pub fn run_file(path: &Path) -> Result<RunOutcome, CliError> {
    run(&ExperimentConfig::load(path)?)
}

/// Caps the global thread pool at `NILFIX_THREADS` when that is set.
pub fn configure_threads() -> Result<(), CliError> {
    let Ok(v) = std::env::var("NILFIX_THREADS") else { return Ok(()) };
    let n: usize =
        v.trim().parse().ok().filter(|&n| n > 0).ok_or_else(|| {
            CliError::invalid("env.NILFIX_THREADS", format!("expected a positive integer, got {v:?}"))
        })?;
    // A pool that already exists keeps its size; that only happens in tests.
    let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    Ok(())
}
