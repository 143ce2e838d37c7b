use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::tagger::TAG_VOCAB;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Representation {
    /// Part-of-speech tag ids.
    Syntactic,
    /// Word ids over a capped vocabulary.
    Lexical,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EncoderKind {
    Cnn,
    Lstm,
}

/// Input representation × sentence encoder, written `syntactic-cnn`,
/// `lexical-lstm` and so on.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct ModelMode {
    pub representation: Representation,
    pub encoder: EncoderKind,
}

impl ModelMode {
    pub const SYNTACTIC_CNN: Self = Self {
        representation: Representation::Syntactic,
        encoder: EncoderKind::Cnn,
    };
    pub const SYNTACTIC_LSTM: Self = Self {
        representation: Representation::Syntactic,
        encoder: EncoderKind::Lstm,
    };
    pub const LEXICAL_CNN: Self = Self {
        representation: Representation::Lexical,
        encoder: EncoderKind::Cnn,
    };
    pub const LEXICAL_LSTM: Self = Self {
        representation: Representation::Lexical,
        encoder: EncoderKind::Lstm,
    };
}

impl fmt::Display for ModelMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let r = match self.representation {
            Representation::Syntactic => "syntactic",
            Representation::Lexical => "lexical",
        };
        let e = match self.encoder {
            EncoderKind::Cnn => "cnn",
            EncoderKind::Lstm => "lstm",
        };
        write!(f, "{r}-{e}")
    }
}

impl FromStr for ModelMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::Config(format!("bad mode `{s}`; expected e.g. syntactic-cnn"));
        let (representation, rest) = if let Some(rest) = s.strip_prefix("syntactic") {
            (Representation::Syntactic, rest)
        } else if let Some(rest) = s.strip_prefix("lexical") {
            (Representation::Lexical, rest)
        } else {
            return Err(bad());
        };
        let encoder = match rest.strip_prefix(['-', '_', 'x']).ok_or_else(bad)? {
            "cnn" => EncoderKind::Cnn,
            "lstm" => EncoderKind::Lstm,
            _ => return Err(bad()),
        };
        Ok(Self {
            representation,
            encoder,
        })
    }
}

impl Serialize for ModelMode {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for ModelMode {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Architecture hyperparameters. Everything needed to allocate parameters.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Hyperparams {
    pub mode: ModelMode,
    /// Sentences per segment (`M`).
    pub segment_len: usize,
    /// Tag slots per sentence (`N`).
    pub sentence_len: usize,
    /// Embedding width (`d_p`; 300 for pretrained word vectors).
    pub embed_dim: usize,
    /// LSTM hidden width (`d_l`) for both the sentence and segment encoders.
    pub hidden: usize,
    /// Total convolution filters across all receptive fields (`K`).
    pub filters: usize,
    /// Receptive field sizes (`Z`), kept sorted ascending.
    pub windows: Vec<usize>,
    /// Stacked convolution layers per receptive field.
    pub conv_layers: usize,
    /// Attention projection width (`a`).
    pub attention: usize,
    /// Number of authors (`C`).
    pub classes: usize,
    /// Embedding table rows (tag inventory, or vocabulary + PAD + UNK).
    pub vocab_rows: usize,
    /// Whether the embedding table receives gradient updates.
    pub train_embeddings: bool,
}

impl Hyperparams {
    /// Defaults: `d_p = 64`, `d_l = 128`, 100 filters per receptive field
    /// over `{3, 5}`, one conv layer, `a = 2·d_l`, `M = 100`, `N = 30`.
    pub fn syntactic(encoder: EncoderKind, classes: usize) -> Self {
        Self {
            mode: ModelMode {
                representation: Representation::Syntactic,
                encoder,
            },
            segment_len: 100,
            sentence_len: 30,
            embed_dim: 64,
            hidden: 128,
            filters: 200,
            windows: vec![3, 5],
            conv_layers: 1,
            attention: 256,
            classes,
            vocab_rows: TAG_VOCAB,
            train_embeddings: true,
        }
    }

    /// Same architecture over 300-wide frozen word vectors.
    pub fn lexical(encoder: EncoderKind, classes: usize, vocab_rows: usize) -> Self {
        Self {
            mode: ModelMode {
                representation: Representation::Lexical,
                encoder,
            },
            embed_dim: 300,
            vocab_rows,
            train_embeddings: false,
            ..Self::syntactic(encoder, classes)
        }
    }

    pub fn filters_per_window(&self) -> usize {
        self.filters / self.windows.len().max(1)
    }

    /// Width of a sentence vector: `K` for the CNN encoder, `2·d_l` for the LSTM.
    pub fn sentence_dim(&self) -> usize {
        match self.mode.encoder {
            EncoderKind::Cnn => self.filters,
            EncoderKind::Lstm => 2 * self.hidden,
        }
    }

    /// Width of a segment-encoder state and of the attended vector `V`.
    pub fn segment_dim(&self) -> usize {
        2 * self.hidden
    }

    /// Row of the embedding table that stays zero.
    pub fn pad_row(&self) -> usize {
        match self.mode.representation {
            Representation::Syntactic => crate::tagger::PAD as usize,
            Representation::Lexical => crate::tagger::WORD_PAD as usize,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::Config(m.to_string()));
        if self.segment_len == 0 || self.sentence_len == 0 {
            return bad("M and N must be positive");
        }
        if self.embed_dim == 0 || self.hidden == 0 || self.attention == 0 {
            return bad("layer widths must be positive");
        }
        if self.classes < 2 {
            return bad("need at least two classes");
        }
        if self.vocab_rows <= self.pad_row() {
            return bad("embedding table too small");
        }
        if self.mode.encoder == EncoderKind::Cnn {
            if self.windows.is_empty() || self.windows.contains(&0) {
                return bad("receptive fields must be non-empty and positive");
            }
            if self.filters == 0 || !self.filters.is_multiple_of(self.windows.len()) {
                return bad("filter count must be a positive multiple of the number of receptive fields");
            }
            if self.conv_layers == 0 {
                return bad("need at least one conv layer");
            }
            if !self.windows.windows(2).all(|w| w[0] < w[1]) {
                return bad("receptive fields must be strictly ascending");
            }
            let widest = *self.windows.iter().max().unwrap();
            let needed = self.conv_layers * (widest - 1) + 1;
            if self.sentence_len < needed {
                return Err(Error::SentenceTooShort {
                    len: self.sentence_len,
                    needed,
                });
            }
        }
        Ok(())
    }

    /// Closed-form trainable-plus-frozen parameter count:
    ///
    /// ```text
    /// embedding      V·d_e
    /// cnn            Σ_r [ r·d_e·k + k + (L−1)(r·k·k + k) ],  k = K/|Z|
    /// lstm sentence  2·(4d(d_e + d) + 4d)
    /// lstm segment   2·(4d(s + d) + 4d),  s = K (cnn) or 2d (lstm)
    /// attention      2d·a + 2a
    /// classifier     2d·C + C
    /// ```
    pub fn parameter_count(&self) -> usize {
        let d = self.hidden;
        let lstm = |input: usize| 4 * d * (input + d) + 4 * d;
        let embedding = self.vocab_rows * self.embed_dim;
        let sentence = match self.mode.encoder {
            EncoderKind::Cnn => {
                let k = self.filters_per_window();
                self.windows
                    .iter()
                    .map(|&r| {
                        r * self.embed_dim * k + k + (self.conv_layers - 1) * (r * k * k + k)
                    })
                    .sum()
            }
            EncoderKind::Lstm => 2 * lstm(self.embed_dim),
        };
        let segment = 2 * lstm(self.sentence_dim());
        let attention = 2 * d * self.attention + 2 * self.attention;
        let classifier = 2 * d * self.classes + self.classes;
        embedding + sentence + segment + attention + classifier
    }
}
