use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::baselines::{NgramConfig, SvmConfig};
use crate::error::{Error, Result};
use crate::model::{Hyperparams, ModelMode, Representation};
use crate::training::TrainingConfig;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Precision {
    #[default]
    F32,
    F64,
}

/// Architecture settings of a run; the class count and table size come
/// from the data.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ModelConfig {
    pub mode: ModelMode,
    /// `M`
    pub segment_len: usize,
    /// `N`
    pub sentence_len: usize,
    /// `d_p` for tag embeddings.
    pub dp: usize,
    /// `d_l`
    pub dl: usize,
    /// Total `K` across receptive fields.
    pub filters: usize,
    pub windows: Vec<usize>,
    pub conv_layers: usize,
    /// Attention width; `2·d_l` when absent.
    pub attention: Option<usize>,
    /// Word-vector width for lexical models.
    pub word_dim: usize,
    /// Fine-tune word vectors; defaults to frozen when pretrained vectors are
    /// supplied and trainable otherwise.
    pub train_embeddings: Option<bool>,
    pub vocabulary_cap: usize,
}

impl Default for ModelConfig {
    fn default() -> Self {
        Self {
            mode: ModelMode::SYNTACTIC_CNN,
            segment_len: 100,
            sentence_len: 30,
            dp: 64,
            dl: 128,
            filters: 200,
            windows: vec![3, 5],
            conv_layers: 1,
            attention: None,
            word_dim: 300,
            train_embeddings: None,
            vocabulary_cap: crate::corpus::MAX_VOCABULARY,
        }
    }
}

impl ModelConfig {
    pub fn hyperparams(&self, classes: usize, vocab_rows: usize, pretrained: bool) -> Hyperparams {
        let mut windows = self.windows.clone();
        windows.sort_unstable();
        windows.dedup();
        let lexical = self.mode.representation == Representation::Lexical;
        Hyperparams {
            mode: self.mode,
            segment_len: self.segment_len,
            sentence_len: self.sentence_len,
            embed_dim: if lexical { self.word_dim } else { self.dp },
            hidden: self.dl,
            filters: self.filters,
            windows,
            conv_layers: self.conv_layers,
            attention: self.attention.unwrap_or(2 * self.dl),
            classes,
            vocab_rows,
            train_embeddings: !lexical || self.train_embeddings.unwrap_or(!pretrained),
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BaselineConfig {
    pub ngram: NgramConfig,
    pub svm: SvmConfig,
}

/// Everything a run depends on. Serialized as TOML into the run directory;
/// its hash goes into checkpoints.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub corpus: Option<PathBuf>,
    /// Separate test corpus; without one the validation split is scored.
    pub test_corpus: Option<PathBuf>,
    /// Corpus files are `token/TAG` lines instead of raw text.
    pub pretagged: bool,
    /// Tagger checkpoint for raw text.
    pub tagger: Option<PathBuf>,
    /// Pretrained word vectors for lexical models.
    pub embeddings: Option<PathBuf>,
    pub precision: Precision,
    pub model: ModelConfig,
    pub training: TrainingConfig,
    pub baseline: BaselineConfig,
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_toml(&std::fs::read_to_string(path)?)
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Config(e.to_string()))
    }

    /// SHA-256 of the resolved TOML.
    pub fn hash(&self) -> Result<String> {
        Ok(hex::encode(Sha256::digest(self.to_toml()?.as_bytes())))
    }

    pub fn validate(&self) -> Result<()> {
        self.training.validate()?;
        let m = &self.model;
        if m.segment_len == 0 || m.sentence_len == 0 || m.dl == 0 || m.dp == 0 || m.windows.is_empty() {
            return Err(Error::Config("M, N, d_p, d_l and the window list must be non-empty".into()));
        }
        Ok(())
    }
}
