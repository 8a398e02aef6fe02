use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use nameguess_core::abbrev::FabricationConfig;
use nameguess_core::corpus::FilterCriteria;
use nameguess_core::difficulty::DifficultyThresholds;
use nameguess_remote::EndpointConfig;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PromptConfig {
    pub k: usize,
    pub n: usize,
    pub demo: bool,
    pub sample_seed: Option<u64>,
}

impl Default for PromptConfig {
    fn default() -> Self {
        Self { k: 10, n: 10, demo: false, sample_seed: None }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SegmentConfig {
    pub lexicon: Option<PathBuf>,
    pub vocab: Option<PathBuf>,
    pub min_word_len: usize,
}

impl Default for SegmentConfig {
    fn default() -> Self {
        Self { lexicon: None, vocab: None, min_word_len: 3 }
    }
}

/// Everything a run may read from `--config`. Sections mirror the modules.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AppConfig {
    pub seed: Option<u64>,
    pub filter: FilterCriteria,
    pub segment: SegmentConfig,
    pub fabrication: FabricationConfig,
    pub difficulty: DifficultyThresholds,
    pub prompts: PromptConfig,
    pub endpoint: EndpointConfig,
}

impl AppConfig {
    pub fn load(path: Option<&Path>) -> Result<Self> {
        let Some(path) = path else {
            return Ok(Self::default());
        };
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("reading config {}", path.display()))?;
        toml::from_str(&text).with_context(|| format!("parsing config {}", path.display()))
    }

    /// The seed in effect: the flag, then the top-level `seed`, then the
    /// fabrication section's seed. The result is written back everywhere.
    pub fn resolve_seed(&mut self, flag: Option<u64>) -> u64 {
        let seed = flag.or(self.seed).unwrap_or(self.fabrication.seed);
        self.seed = Some(seed);
        self.fabrication.seed = seed;
        seed
    }
}
