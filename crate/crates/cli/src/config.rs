//! The run configuration file.

use std::fs;
use std::path::{Path, PathBuf};

use kws_core::augment::AugmentationPolicy;
use kws_core::features::{FeatureConfig, MaskSpec};
use kws_core::model::ModelConfig;
use kws_core::training::TrainConfig;
use serde::{Deserialize, Serialize};

use crate::error::{CliError, CliResult};

pub const RESOLVED_CONFIG_FILE: &str = "resolved-config.json";

fn enabled() -> bool {
    true
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AugmentConfig {
    /// When false, training sees clean features only.
    #[serde(default = "enabled")]
    pub enabled: bool,
    #[serde(default)]
    pub policy: AugmentationPolicy,
    #[serde(default)]
    pub masks: MaskSpec,
}

impl Default for AugmentConfig {
    fn default() -> Self {
        Self { enabled: true, policy: AugmentationPolicy::default(), masks: MaskSpec::default() }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Paths {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub manifest: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dataset: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub synthetic: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub noise: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rir: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<PathBuf>,
}

/// Everything needed to reproduce a training run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default)]
    pub feature: FeatureConfig,
    #[serde(default)]
    pub augment: AugmentConfig,
    #[serde(default)]
    pub model: ModelConfig,
    pub train: TrainConfig,
    #[serde(default)]
    pub paths: Paths,
}

impl RunConfig {
    pub fn new(epochs: usize) -> Self {
        Self {
            feature: FeatureConfig::default(),
            augment: AugmentConfig::default(),
            model: ModelConfig::default(),
            train: TrainConfig::new(epochs),
            paths: Paths::default(),
        }
    }

    pub fn load(path: &Path) -> CliResult<Self> {
        let text = fs::read_to_string(path)
            .map_err(|e| CliError::usage(format!("cannot read config {}: {e}", path.display())))?;
        serde_json::from_str(&text).map_err(|e| CliError::usage(format!("invalid config {}: {e}", path.display())))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes") + "\n"
    }

    pub fn save(&self, path: &Path) -> CliResult {
        fs::write(path, self.to_json())
            .map_err(|e| CliError::usage(format!("cannot write {}: {e}", path.display())))
    }

    /// Checks every section and that every referenced path exists.
    pub fn validate(&self) -> CliResult {
        self.feature.validate()?;
        self.model.validate()?;
        self.train.validate()?;
        if self.augment.enabled {
            self.augment.policy.validate()?;
        }
        self.augment.masks.validate(self.feature.n_mfcc)?;
        if self.model.n_features != self.feature.n_mfcc {
            return Err(CliError::usage(format!(
                "model.n_features ({}) must equal feature.n_mfcc ({})",
                self.model.n_features, self.feature.n_mfcc
            )));
        }
        let p = &self.paths;
        for (name, path) in [
            ("paths.manifest", &p.manifest),
            ("paths.dataset", &p.dataset),
            ("paths.synthetic", &p.synthetic),
            ("paths.noise", &p.noise),
            ("paths.rir", &p.rir),
        ] {
            if let Some(path) = path {
                if !path.exists() {
                    return Err(CliError::usage(format!("{name}: {} does not exist", path.display())));
                }
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trips_through_json() {
        let mut config = RunConfig::new(7);
        config.paths.output = Some("out".into());
        config.model.d_model = 64;
        config.augment.policy.time_ops.truncate(2);
        let back: RunConfig = serde_json::from_str(&config.to_json()).unwrap();
        assert_eq!(back, config);
    }

    #[test]
    fn minimal_file_needs_only_epochs() {
        let config: RunConfig = serde_json::from_str(r#"{"train": {"epochs": 2}}"#).unwrap();
        assert_eq!(config, RunConfig::new(2));
        assert!(serde_json::from_str::<RunConfig>("{}").is_err());
        assert!(serde_json::from_str::<RunConfig>(r#"{"train": {"epochs": 2}, "extra": 1}"#).is_err());
    }

    #[test]
    fn missing_paths_fail_validation() {
        let mut config = RunConfig::new(1);
        config.validate().unwrap();
        config.paths.noise = Some("/definitely/not/here".into());
        let err = config.validate().unwrap_err().to_string();
        assert!(err.contains("paths.noise"), "{err}");
    }
}
