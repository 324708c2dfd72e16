use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::CliError;

/// Upper end of the conductor range a sweep will accept.
pub const MAX_SWEEP_CONDUCTOR: u64 = 10_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Format {
    #[default]
    JsonLines,
    Csv,
}

/// Everything a command needs to run; serializable so a stored config
/// reproduces the same output.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub q_min: u64,
    pub q_max: u64,
    /// Exact character order; `None` keeps every non-principal order.
    pub order: Option<u64>,
    pub y: f64,
    #[serde(rename = "T")]
    pub t_range: f64,
    pub alpha: f64,
    /// Grid resolution for twist minimization, in units of `1 / log y`.
    pub grid: f64,
    pub seed: u64,
    /// Worker count; 0 lets the pool decide.
    pub threads: usize,
    pub out: Option<PathBuf>,
    pub format: Format,
    pub baseline: Option<PathBuf>,
    /// Record per-character wall time (breaks byte-identical output).
    pub timing: bool,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            q_min: 3,
            q_max: 1000,
            order: None,
            y: 1e5,
            t_range: 1.0,
            alpha: 0.5,
            grid: 0.05,
            seed: 1,
            threads: 0,
            out: None,
            format: Format::JsonLines,
            baseline: None,
            timing: false,
        }
    }
}

fn invalid(field: &str, msg: impl std::fmt::Display) -> CliError {
    CliError::Config(format!("{field}: {msg}"))
}

impl ExperimentConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
        toml::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn validate(&self) -> Result<(), CliError> {
        if self.q_min == 0 {
            return Err(invalid("q-min", "must be at least 1"));
        }
        if self.q_max > MAX_SWEEP_CONDUCTOR {
            return Err(CliError::Capacity(format!("q-max: {} exceeds the limit {MAX_SWEEP_CONDUCTOR}", self.q_max)));
        }
        if self.order == Some(0) {
            return Err(invalid("order", "must be positive"));
        }
        if !(self.y.is_finite() && self.y >= 2.0) {
            return Err(invalid("y", format!("{} is not a finite value >= 2", self.y)));
        }
        if !(self.t_range.is_finite() && self.t_range > 0.0) {
            return Err(invalid("T", format!("{} is not positive", self.t_range)));
        }
        if !(self.alpha > 0.0 && self.alpha <= 1.0) {
            return Err(invalid("alpha", format!("{} is outside (0, 1]", self.alpha)));
        }
        if !(self.grid.is_finite() && self.grid > 0.0) {
            return Err(invalid("grid", format!("{} is not positive", self.grid)));
        }
        Ok(())
    }

    /// SHA-256 over the fields that influence output bytes (worker count and
    /// output path excluded).
    pub fn hash(&self) -> String {
        let mut canonical = self.clone();
        canonical.threads = 0;
        canonical.out = None;
        let digest = Sha256::digest(serde_json::to_vec(&canonical).expect("config serializes"));
        digest.iter().map(|b| format!("{b:02x}")).collect()
    }
}
