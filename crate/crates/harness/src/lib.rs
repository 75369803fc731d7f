//! Orchestration for the `mie-core` engines: configuration, sweeps,
//! Monte-Carlo statistics and report emission.

pub mod config;
pub mod report;
pub mod stats;
pub mod sweep;

pub use config::{Engine, ExperimentConfig, Format, Point};
pub use report::{emit_report, to_csv, to_json, SCHEMA};
pub use sweep::{run_die, run_distribution, run_sweep, Executor, StatReport};

#[derive(Debug, thiserror::Error)]
pub enum HarnessError {
    #[error("invalid configuration: {0}")]
    Validation(String),
    #[error(transparent)]
    Engine(#[from] mie_core::Error),
    #[error("i/o: {0}")]
    Io(#[from] std::io::Error),
}

impl HarnessError {
    /// Process exit code: 1 validation, 2 numerical failure, 3 I/O.
    pub fn exit_code(&self) -> i32 {
        match self {
            Self::Validation(_) => 1,
            Self::Engine(e) if e.is_numerical() => 2,
            Self::Engine(_) => 1,
            Self::Io(_) => 3,
        }
    }
}
