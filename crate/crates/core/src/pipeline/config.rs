//! Run configuration, read from TOML.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::dedup::DedupConfig;
use crate::hostfilter::{HostThresholds, DEFAULT_UT1_CATEGORIES};
use crate::quality::QualityThresholds;
use crate::repetition::RepetitionThresholds;

use super::PipelineError;

/// Locations of the operator-supplied lists. Unset lists fall back to the
/// bundled defaults (placeholders for NG and dating terms).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ListPaths {
    pub ng: Option<PathBuf>,
    pub dating: Option<PathBuf>,
    pub footer_markers: Option<PathBuf>,
    /// Directory holding `<category>/domains` files.
    pub ut1_dir: Option<PathBuf>,
    pub ut1_categories: Vec<String>,
}

impl Default for ListPaths {
    fn default() -> Self {
        Self {
            ng: None,
            dating: None,
            footer_markers: None,
            ut1_dir: None,
            ut1_categories: DEFAULT_UT1_CATEGORIES.iter().map(|s| s.to_string()).collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PipelineConfig {
    /// WARC archives to ingest.
    pub inputs: Vec<PathBuf>,
    /// Snapshot ids, used by listing fetches.
    pub snapshots: Vec<String>,
    /// Language model (`.lidm`).
    pub model: Option<PathBuf>,
    pub out_dir: PathBuf,
    /// Worker threads; 0 uses every core. Never changes results.
    pub workers: usize,
    /// Overrides `dedup.hash_seed` when set.
    pub seed: Option<u64>,
    /// Run the markup-level Japanese gate before extraction.
    pub rapid_gate: bool,
    /// Apply the repetition rules before the quality rules.
    pub repetition_first: bool,
    /// Also ingest responses with non-2xx status codes.
    pub accept_non_2xx: bool,
    pub drop_comment_sections: bool,
    /// Treat pages whose winning language score is below this as
    /// undetermined.
    pub min_lang_score: Option<f64>,
    /// Pages processed per parallel batch during extraction.
    pub batch_size: usize,
    pub quality: QualityThresholds,
    pub repetition: RepetitionThresholds,
    pub dedup: DedupConfig,
    /// Signature cache file reused across runs.
    pub dedup_cache: Option<PathBuf>,
    pub host: HostThresholds,
    pub lists: ListPaths,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self {
            inputs: Vec::new(),
            snapshots: Vec::new(),
            model: None,
            out_dir: PathBuf::from("out"),
            workers: 0,
            seed: None,
            rapid_gate: true,
            repetition_first: true,
            accept_non_2xx: false,
            drop_comment_sections: true,
            min_lang_score: None,
            batch_size: 1024,
            quality: QualityThresholds::default(),
            repetition: RepetitionThresholds::default(),
            dedup: DedupConfig::default(),
            dedup_cache: None,
            host: HostThresholds::default(),
            lists: ListPaths::default(),
        }
    }
}

impl PipelineConfig {
    pub fn from_toml_str(s: &str) -> Result<Self, PipelineError> {
        let config: Self = toml::from_str(s).map_err(|e| PipelineError::Config(e.to_string()))?;
        config.validate()?;
        Ok(config)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, PipelineError> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)
            .map_err(|e| PipelineError::Config(format!("{}: {e}", path.display())))?;
        Self::from_toml_str(&text)
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("configurations always serialize")
    }

    pub fn validate(&self) -> Result<(), PipelineError> {
        let bad = |what: &str, e: &dyn std::fmt::Display| PipelineError::Config(format!("{what}: {e}"));
        self.quality.validate().map_err(|e| bad("quality", &e))?;
        self.repetition.validate().map_err(|e| bad("repetition", &e))?;
        self.dedup_config().validate().map_err(|e| bad("dedup", &e))?;
        self.host.validate().map_err(|e| bad("host", &e))?;
        if self.batch_size == 0 {
            return Err(PipelineError::Config("batch_size must be positive".into()));
        }
        if let Some(m) = self.min_lang_score {
            if !m.is_finite() {
                return Err(PipelineError::Config("min_lang_score must be finite".into()));
            }
        }
        Ok(())
    }

    /// Dedup settings with the run seed applied.
    pub fn dedup_config(&self) -> DedupConfig {
        let mut d = self.dedup.clone();
        if let Some(seed) = self.seed {
            d.hash_seed = seed;
        }
        d
    }
}
