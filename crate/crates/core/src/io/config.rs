use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::IoError;
use crate::gateway::ProviderConfig;
use crate::ir::DEFAULT_TOL;
use crate::pipeline::{ClassifierMode, DEFAULT_BIG_M};

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ClassifierBackend {
    Rules,
    #[default]
    Llm,
}

impl From<ClassifierBackend> for ClassifierMode {
    fn from(b: ClassifierBackend) -> Self {
        match b {
            ClassifierBackend::Rules => ClassifierMode::Rules,
            ClassifierBackend::Llm => ClassifierMode::Gateway,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunPaths {
    pub instances: Option<PathBuf>,
    pub output: Option<PathBuf>,
    pub transcript: Option<PathBuf>,
}

/// Settings for an external fine-tuning job. Nothing here runs training;
/// the values are written next to an exported dataset.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FinetuneHyperparameters {
    pub epochs: u32,
    pub batch_size: u32,
    /// `None` keeps the provider's default.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub learning_rate_multiplier: Option<f64>,
}

impl Default for FinetuneHyperparameters {
    fn default() -> Self {
        FinetuneHyperparameters {
            epochs: 4,
            batch_size: 1,
            learning_rate_multiplier: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub big_m: f64,
    pub tolerance: f64,
    pub classifier: ClassifierBackend,
    pub provider: ProviderConfig,
    pub paths: RunPaths,
    pub finetune: FinetuneHyperparameters,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            big_m: DEFAULT_BIG_M,
            tolerance: DEFAULT_TOL,
            classifier: ClassifierBackend::default(),
            provider: ProviderConfig::default(),
            paths: RunPaths::default(),
            finetune: FinetuneHyperparameters::default(),
        }
    }
}

/// A commented configuration file holding the defaults.
pub const DEFAULT_CONFIG_TOML: &str = include_str!("../../data/config.toml");

impl RunConfig {
    pub fn from_toml_str(text: &str) -> Result<Self, String> {
        let cfg: RunConfig = toml::from_str(text).map_err(|e| e.to_string())?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, IoError> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| IoError::io(path, e))?;
        Self::from_toml_str(&text).map_err(|message| IoError::Invalid {
            path: path.to_path_buf(),
            message,
        })
    }

    pub fn validate(&self) -> Result<(), String> {
        if !(self.big_m.is_finite() && self.big_m > 0.0) {
            return Err(format!("big_m must be positive, got {}", self.big_m));
        }
        if !(self.tolerance.is_finite() && self.tolerance > 0.0) {
            return Err(format!("tolerance must be positive, got {}", self.tolerance));
        }
        self.provider.validate().map_err(|e| e.to_string())
    }
}
