//! Experiment harness around `mchi-core`: character sweeps, bound-check
//! batteries, baselines and deterministic export.

pub mod baseline;
pub mod battery;
pub mod config;
pub mod corpus;
pub mod export;
pub mod sweep;

use thiserror::Error;

pub use battery::{run_battery, BatteryOutcome, CheckResult, BATTERIES};
pub use config::{ExperimentConfig, Format};
pub use sweep::{run_sweep, SweepRecord};

pub const BUILD: &str = concat!("mchi-cli ", env!("CARGO_PKG_VERSION"));

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error("capacity exceeded: {0}")]
    Capacity(String),
    #[error("i/o error: {0}")]
    Io(String),
    #[error(transparent)]
    Core(#[from] mchi_core::Error),
}

impl CliError {
    /// Process exit code: 2 for usage/config/io problems, 3 for capacity.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Capacity(_) | CliError::Core(mchi_core::Error::Capacity(_)) => 3,
            _ => 2,
        }
    }
}
