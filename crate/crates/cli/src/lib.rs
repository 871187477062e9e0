//! Batch front end for the `vesture` dressing library: JSON run
//! configurations, grid sweeps, presets, verification of stored outputs and
//! the self-test.

pub mod config;
pub mod run;
pub mod selftest;
pub mod table;

pub use config::{parse_config, Field, Format, Outputs, RunConfig, SeedSpec};
pub use run::{
    evaluate, kerr_newman_preset, kerr_preset, run_dress, run_verify, verify_table, PresetGrid,
    Summary, Sweep, VerifyReport,
};
pub use selftest::{run_selftest, SelftestOptions, SuiteResult};
pub use table::{Cell, Table};

/// Process exit codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u8)]
pub enum ExitCode {
    Success = 0,
    Config = 1,
    /// Condition cap exceeded.
    Numeric = 2,
    /// A regular point failed the constraint gate.
    Constraint = 3,
    Io = 4,
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("configuration error:\n  {}", .0.join("\n  "))]
    Config(Vec<String>),
    #[error("numeric failure: {0}")]
    Numeric(String),
    #[error("I/O error: {0}")]
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> ExitCode {
        match self {
            CliError::Config(_) => ExitCode::Config,
            CliError::Numeric(_) => ExitCode::Numeric,
            CliError::Io(_) => ExitCode::Io,
        }
    }
}

/// Environment variable capping the worker pool size.
pub const THREADS_ENV: &str = "VESTURE_THREADS";

/// Size the global rayon pool from `VESTURE_THREADS`, if set.
pub fn init_threads() -> Result<(), CliError> {
    let Ok(value) = std::env::var(THREADS_ENV) else {
        return Ok(());
    };
    let n: usize = value
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| CliError::Config(vec![format!("{THREADS_ENV} must be a positive integer, got \"{value}\"")]))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| CliError::Config(vec![format!("{THREADS_ENV}: {e}")]))
}
