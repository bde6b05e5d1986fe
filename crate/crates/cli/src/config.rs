use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use taxovec::{Error, Result, SimilarityConfig, TfIdfConfig, TokenizerConfig, TrainConfig};

pub const CONFIG_FILE: &str = "config.json";

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Paths {
    pub taxonomy: Option<PathBuf>,
    pub documents: Option<PathBuf>,
    pub embeddings: Option<PathBuf>,
    pub models: Option<PathBuf>,
    pub output: Option<PathBuf>,
}

/// Where category vectors come from when a measure needs them.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum CatvecSource {
    /// `cat:` rows of the store if it has any, otherwise composed from centroids.
    #[default]
    Auto,
    Store,
    Algebraic,
}

/// Everything a run depends on. Written next to every output.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PipelineConfig {
    pub paths: Paths,
    pub tokenizer: TokenizerConfig,
    pub tfidf: TfIdfConfig,
    /// Descendant weight for merged centroids; `None` keeps plain centroids.
    pub merge_lambda: Option<f64>,
    pub train: TrainConfig,
    pub similarity: SimilarityConfig,
    pub catvecs: CatvecSource,
    /// Candidate categories per word for category-embedding training.
    pub candidates: usize,
    pub k: usize,
    pub seed: u64,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        let train = TrainConfig::default();
        PipelineConfig {
            paths: Paths::default(),
            tokenizer: TokenizerConfig::default(),
            tfidf: TfIdfConfig::default(),
            merge_lambda: None,
            seed: train.seed,
            train,
            similarity: SimilarityConfig::default(),
            catvecs: CatvecSource::default(),
            candidates: taxovec::category_embedding::DEFAULT_CANDIDATES,
            k: 5,
        }
    }
}

impl PipelineConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::Io {
            path: path.to_owned(),
            source: e,
        })?;
        serde_json::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))
    }

    pub fn write_to(&self, dir: &Path) -> Result<()> {
        let path = dir.join(CONFIG_FILE);
        let mut text = serde_json::to_string_pretty(self)?;
        text.push('\n');
        fs::write(&path, text).map_err(|e| Error::Io { path, source: e })
    }

    pub fn validate(&self) -> Result<()> {
        self.train.validate()?;
        self.similarity.validate()?;
        if let Some(l) = self.merge_lambda {
            if !(l.is_finite() && l >= 0.0) {
                return Err(Error::Config(format!("merge lambda must be nonnegative, got {l}")));
            }
        }
        if self.k == 0 {
            return Err(Error::Config("k must be at least 1".into()));
        }
        Ok(())
    }

    pub fn require<'a>(&self, path: &'a Option<PathBuf>, flag: &str) -> Result<&'a Path> {
        path.as_deref()
            .ok_or_else(|| Error::Config(format!("missing --{flag} (or its entry in the config file)")))
    }
}
