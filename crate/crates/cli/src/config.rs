use std::path::{Path, PathBuf};

use otut_core::corpus::SeedFilterConfig;
use otut_core::encoders::EncoderConfig;
use otut_core::hashing::sha256_hex;
use otut_core::models::{HeadConfig, TrainConfig};
use otut_core::synthesis::SynthesisConfig;
use serde::{Deserialize, Serialize};

use crate::UsageError;

/// Default locations used when a subcommand flag is omitted.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Paths {
    pub corpus: Option<PathBuf>,
    pub dataset: Option<PathBuf>,
    pub checkpoint: Option<PathBuf>,
    pub reports: Option<PathBuf>,
}

/// The whole pipeline configuration, one TOML table per block.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PipelineConfig {
    pub filter: SeedFilterConfig,
    pub encoder: EncoderConfig,
    pub synthesis: SynthesisConfig,
    pub head: HeadConfig,
    pub train: TrainConfig,
    pub paths: Paths,
}

impl PipelineConfig {
    /// Defaults, overlaid by the file when one is given.
    pub fn load(path: Option<&Path>) -> anyhow::Result<Self> {
        let Some(path) = path else {
            return Ok(PipelineConfig::default());
        };
        let text = std::fs::read_to_string(path)
            .map_err(|e| UsageError(format!("cannot read config {}: {e}", path.display())))?;
        let cfg: PipelineConfig =
            toml::from_str(&text).map_err(|e| UsageError(format!("invalid config {}: {e}", path.display())))?;
        Ok(cfg)
    }

    /// `--seed` drives every stochastic stage of a run.
    pub fn set_seed(&mut self, seed: u64) {
        self.synthesis.seed = seed;
        self.train.seed = seed;
    }

    pub fn validate(&self) -> anyhow::Result<()> {
        let usage = |e: &dyn std::fmt::Display| UsageError(format!("invalid config: {e}"));
        self.filter.validate().map_err(|e| usage(&e))?;
        self.synthesis.validate().map_err(|e| usage(&e))?;
        self.head.validate().map_err(|e| usage(&e))?;
        self.train.validate().map_err(|e| usage(&e))?;
        Ok(())
    }

    /// SHA-256 of the canonical JSON form of the effective configuration.
    pub fn hash(&self) -> String {
        sha256_hex(serde_json::to_string(self).expect("config serializes").as_bytes())
    }
}

/// A flag value, else the configured path, else a usage error naming both.
pub fn resolve(flag: Option<PathBuf>, configured: &Option<PathBuf>, what: &str) -> anyhow::Result<PathBuf> {
    flag.or_else(|| configured.clone())
        .ok_or_else(|| UsageError(format!("no {what} given: pass --{what} or set paths.{what} in the config")).into())
}
