use std::path::Path;

use serde::Deserialize;

use crate::CliError;

/// The stored baselines shipped with the crate.
pub const DEFAULT_BASELINES: &str = include_str!("../baselines/baselines.toml");

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Baselines {
    pub schema_version: u32,
    pub halasz: HalaszBaseline,
    pub pvapp: PvappBaseline,
    pub mertens: MertensBaseline,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HalaszBaseline {
    pub seed: u64,
    pub corpus_size: u64,
    pub x: f64,
    pub y: f64,
    pub grid: f64,
    #[serde(rename = "T")]
    pub t_values: Vec<f64>,
    /// Maxima of the frozen corpus, for reproducibility.
    pub corpus_max_ratio: Vec<f64>,
    /// Pilot maxima over a larger sample; the regression bound.
    pub max_ratio: Vec<f64>,
    pub tolerance: f64,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PvappBaseline {
    pub polya_max_defect: f64,
    pub truncation_gap: f64,
    pub charsum_l1_q_max: u64,
    pub charsum_l1_cutoff: f64,
    pub charsum_l1_min_ratio: f64,
    pub charsum_l1_tolerance: f64,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MertensBaseline {
    pub oracle_gap: f64,
    pub average_m_max: u64,
    pub average_cutoff: f64,
    pub average_constant: f64,
}

impl Baselines {
    pub fn parse(text: &str) -> Result<Self, String> {
        let b: Baselines = toml::from_str(text).map_err(|e| e.to_string())?;
        b.validate()?;
        Ok(b)
    }

    pub fn load(path: Option<&Path>) -> Result<Result<Self, String>, CliError> {
        match path {
            None => Ok(Self::parse(DEFAULT_BASELINES)),
            Some(p) => {
                let text = std::fs::read_to_string(p).map_err(|e| CliError::Io(format!("{}: {e}", p.display())))?;
                Ok(Self::parse(&text).map_err(|e| format!("{}: {e}", p.display())))
            }
        }
    }

    fn validate(&self) -> Result<(), String> {
        let h = &self.halasz;
        if h.t_values.is_empty() || h.t_values.len() != h.max_ratio.len() || h.t_values.len() != h.corpus_max_ratio.len() {
            return Err("halasz: T, corpus_max_ratio and max_ratio must be non-empty and of equal length".into());
        }
        if h.max_ratio.iter().chain(&h.corpus_max_ratio).any(|r| !(r.is_finite() && *r > 0.0)) || !(h.tolerance >= 1.0) {
            return Err("halasz: ratios must be positive and the tolerance at least 1".into());
        }
        if h.t_values.iter().any(|t| !(*t > 0.0 && *t <= 1.0)) || h.corpus_size == 0 {
            return Err("halasz: T values must lie in (0, 1] and the corpus must be non-empty".into());
        }
        let p = &self.pvapp;
        if !(p.charsum_l1_min_ratio > 0.0 && p.charsum_l1_tolerance > 0.0 && p.charsum_l1_tolerance <= 1.0) {
            return Err("pvapp: the charsum-l1 baseline must be positive with tolerance in (0, 1]".into());
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn shipped_baselines_parse() {
        let b = Baselines::parse(DEFAULT_BASELINES).unwrap();
        assert_eq!(b.halasz.t_values, vec![0.01, 0.1, 1.0]);
        assert!(Baselines::parse("schema_version = 1").is_err());
        let broken = DEFAULT_BASELINES.replace("tolerance = 1.2", "tolerance = 0.5");
        assert!(Baselines::parse(&broken).unwrap_err().contains("tolerance"));
    }
}
