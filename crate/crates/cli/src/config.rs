use std::fs;
use std::path::{Path, PathBuf};

use dimp_core::mixing::DEFAULT_LAMBDA;
use dimp_core::select::{SampleSizeMode, SampleSizePolicy};
use serde::{Deserialize, Serialize};

use crate::CliError;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WeightModel {
    Wc,
}

/// Flat JSON experiment configuration. Unknown keys are rejected.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ExperimentConfig {
    pub graph_path: PathBuf,
    pub weight_model: WeightModel,
    pub k: usize,
    pub epsilon: f64,
    pub ell: f64,
    /// Monte Carlo cascades per influence evaluation.
    pub r_mc: usize,
    pub repeats: usize,
    /// Edge-weight changes per snapshot transition; one run per entry.
    pub update_counts: Vec<usize>,
    /// Snapshot transitions after the initial snapshot.
    pub timesteps: usize,
    pub master_seed: u64,
    pub lambda: f64,
    pub sample_size_mode: SampleSizeMode,
    pub sample_size: usize,
    pub stability_threshold: f64,
    pub sample_size_c0: f64,
    pub max_sample_size: usize,
    pub output_dir: PathBuf,
    /// Persist every RR collection of run-dynamic as JSON.
    pub save_collections: bool,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            graph_path: PathBuf::new(),
            weight_model: WeightModel::Wc,
            k: 50,
            epsilon: 0.1,
            ell: 1.0,
            r_mc: 10_000,
            repeats: 10,
            update_counts: vec![1_000, 10_000],
            timesteps: 1,
            master_seed: 0,
            lambda: DEFAULT_LAMBDA,
            sample_size_mode: SampleSizeMode::Fixed,
            sample_size: 100_000,
            stability_threshold: 0.01,
            sample_size_c0: 0.01,
            max_sample_size: 10_000_000,
            output_dir: PathBuf::from("out"),
            save_collections: false,
        }
    }
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self, CliError> {
        let cfg: ExperimentConfig =
            serde_json::from_str(text).map_err(|e| CliError::Config(e.to_string()))?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        Self::from_json(&text)
    }

    /// Checks run parameters. The graph path is checked when it is opened.
    pub fn validate(&self) -> Result<(), CliError> {
        let fail = |m: &str| Err(CliError::Config(m.to_string()));
        if self.k == 0 {
            return fail("k must be at least 1");
        }
        if self.r_mc == 0 {
            return fail("r_mc must be at least 1");
        }
        if self.repeats == 0 {
            return fail("repeats must be at least 1");
        }
        if self.update_counts.is_empty() {
            return fail("update_counts must not be empty");
        }
        if !(self.lambda > 0.0 && self.lambda.is_finite()) {
            return fail("lambda must be positive");
        }
        self.sample_size_policy()
            .validate()
            .map_err(|e| CliError::Config(e.to_string()))
    }

    pub fn sample_size_policy(&self) -> SampleSizePolicy {
        SampleSizePolicy {
            mode: self.sample_size_mode,
            fixed_n: self.sample_size,
            epsilon: self.epsilon,
            ell: self.ell,
            stability_threshold: self.stability_threshold,
            c0: self.sample_size_c0,
            max_n: self.max_sample_size,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_follow_experimental_protocol() {
        let c = ExperimentConfig::default();
        assert_eq!(c.k, 50);
        assert_eq!(c.r_mc, 10_000);
        assert_eq!(c.repeats, 10);
        assert_eq!(c.epsilon, 0.1);
        assert_eq!(c.ell, 1.0);
    }

    #[test]
    fn partial_config_fills_defaults() {
        let c = ExperimentConfig::from_json(r#"{"graph_path": "g.txt", "k": 5}"#).unwrap();
        assert_eq!(c.k, 5);
        assert_eq!(c.r_mc, 10_000);
        c.validate().unwrap();
    }

    #[test]
    fn unknown_keys_rejected() {
        let err = ExperimentConfig::from_json(r#"{"graph_path": "g", "budget": 3}"#).unwrap_err();
        assert!(matches!(err, CliError::Config(_)));
    }

    #[test]
    fn invalid_values_rejected() {
        for bad in [
            r#"{"graph_path": "g", "k": 0}"#,
            r#"{"graph_path": "g", "repeats": 0}"#,
            r#"{"graph_path": "g", "r_mc": 0}"#,
            r#"{"graph_path": "g", "sample_size": 0}"#,
        ] {
            let c = ExperimentConfig::from_json(bad).unwrap();
            assert!(c.validate().is_err(), "{bad}");
        }
        assert!(ExperimentConfig::from_json(r#"{"weight_model": "lt"}"#).is_err());
    }
}
