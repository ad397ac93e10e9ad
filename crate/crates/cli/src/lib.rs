//! Front end for the `modone` experiments: argument parsing, dispatch and report emission.

pub mod commands;
pub mod config;
pub mod report;

use std::time::Instant;

use thiserror::Error;

pub use config::RunConfig;
use report::Timing;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Input(String),
    #[error("{0}")]
    Precision(String),
    #[error("{0}")]
    Io(String),
    #[error("internal error: {0}")]
    Internal(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            Self::Input(_) => 2,
            Self::Precision(_) => 3,
            Self::Io(_) | Self::Internal(_) => 1,
        }
    }
}

impl From<modone::Error> for CliError {
    fn from(e: modone::Error) -> Self {
        match e {
            modone::Error::PrecisionExhausted(_) => Self::Precision(e.to_string()),
            modone::Error::ConstructionFailed(_) => Self::Internal(e.to_string()),
            _ => Self::Input(e.to_string()),
        }
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        Self::Internal(e.to_string())
    }
}

/// Run a resolved configuration and return the rendered report with its destination.
pub fn execute(config: &RunConfig) -> Result<(String, Option<std::path::PathBuf>), CliError> {
    let (format, path) = config.destination().map_err(CliError::Input)?;
    modone::parallel::set_deterministic(
        config.options.deterministic || matches!(config.command, config::Command::ThetaVerify(_)),
    );
    if let Some(n) = config.options.threads {
        if n == 0 {
            return Err(CliError::Input("--threads must be at least 1".into()));
        }
        modone::parallel::set_threads(n);
    }
    let start = Instant::now();
    let outcome = commands::dispatch(config)?;
    let timing = config
        .options
        .timing
        .then(|| Timing { wall_seconds: start.elapsed().as_secs_f64(), threads: modone::parallel::current_threads() });
    Ok((report::render(config, &outcome, format, timing)?, path))
}

/// Parse-resolve-execute-write; returns the process exit code.
pub fn run(mut config: RunConfig) -> i32 {
    if let Err(e) = config.resolve() {
        eprintln!("error: {e}");
        return 2;
    }
    match execute(&config).and_then(|(text, path)| report::write(&text, path.as_deref())) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
