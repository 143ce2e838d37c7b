use std::collections::{BTreeMap, HashMap};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::corpus::Segment;
use crate::error::{Error, Result};
use crate::tagger::TagSet;

/// Inserted between the sentences of a segment.
pub const BOUNDARY: &str = "</s>";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum NgramKind {
    /// Part-of-speech tags.
    Pos,
    /// Lowercased surface tokens.
    Word,
}

impl std::str::FromStr for NgramKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "pos" | "syntactic" => Ok(Self::Pos),
            "word" | "lexical" => Ok(Self::Word),
            _ => Err(Error::Config(format!("unknown n-gram kind `{s}` (pos or word)"))),
        }
    }
}

/// The symbols of a segment's real sentences, separated by [`BOUNDARY`].
pub fn segment_symbols(segment: &Segment, kind: NgramKind) -> Vec<String> {
    let tagset = TagSet::standard();
    let mut out = Vec::new();
    for s in segment.sentences.iter().filter(|s| !s.is_filler()) {
        if !out.is_empty() {
            out.push(BOUNDARY.to_string());
        }
        match kind {
            NgramKind::Pos => out.extend(s.tag_ids[..s.true_length].iter().map(|&t| tagset.name(t).to_string())),
            NgramKind::Word => out.extend(s.tokens.iter().take(s.true_length).map(|t| t.to_lowercase())),
        }
    }
    out
}

/// Counts of every contiguous window of length `n_min..=n_max`. Grams are
/// keyed by their symbols joined with a space.
pub fn extract_ngrams<S: AsRef<str>>(seq: &[S], n_min: usize, n_max: usize) -> BTreeMap<String, usize> {
    let mut counts = BTreeMap::new();
    for n in n_min.max(1)..=n_max {
        for w in seq.windows(n) {
            let key = w.iter().map(|s| s.as_ref()).collect::<Vec<_>>().join(" ");
            *counts.entry(key).or_insert(0) += 1;
        }
    }
    counts
}

/// A feature vector with sorted, distinct indices below `dim`.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct SparseVector {
    pub dim: usize,
    pub entries: Vec<(u32, f64)>,
}

impl SparseVector {
    pub fn from_dense(v: &[f64]) -> Self {
        Self {
            dim: v.len(),
            entries: v
                .iter()
                .enumerate()
                .filter(|(_, &x)| x != 0.0)
                .map(|(i, &x)| (i as u32, x))
                .collect(),
        }
    }

    pub fn to_dense(&self) -> Vec<f64> {
        let mut v = vec![0.0; self.dim];
        for &(i, x) in &self.entries {
            v[i as usize] = x;
        }
        v
    }

    pub fn dot(&self, w: &[f64]) -> f64 {
        self.entries.iter().map(|&(i, x)| x * w[i as usize]).sum()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NgramConfig {
    pub n_min: usize,
    pub n_max: usize,
    pub max_features: usize,
    pub idf: bool,
}

impl Default for NgramConfig {
    fn default() -> Self {
        Self {
            n_min: 1,
            n_max: 3,
            max_features: 50_000,
            idf: false,
        }
    }
}

/// Gram → column map fitted on training sequences. Columns are ordered by
/// descending corpus frequency, ties lexicographic; the cap keeps a prefix of
/// that order.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NgramVocabulary {
    pub config: NgramConfig,
    pub grams: Vec<String>,
    /// Number of training sequences containing each gram.
    pub document_frequency: Vec<usize>,
    pub num_documents: usize,
    #[serde(skip)]
    index: HashMap<String, usize>,
}

impl NgramVocabulary {
    pub fn fit<S: AsRef<str> + Sync>(sequences: &[Vec<S>], config: NgramConfig) -> Result<Self> {
        if config.n_min == 0 || config.n_max < config.n_min || config.max_features == 0 {
            return Err(Error::Config("n-gram range must satisfy 1 ≤ n_min ≤ n_max".into()));
        }
        let per_doc: Vec<BTreeMap<String, usize>> = sequences
            .par_iter()
            .map(|s| extract_ngrams(s, config.n_min, config.n_max))
            .collect();
        let mut totals: HashMap<&str, (usize, usize)> = HashMap::new();
        for doc in &per_doc {
            for (g, &c) in doc {
                let e = totals.entry(g.as_str()).or_default();
                e.0 += c;
                e.1 += 1;
            }
        }
        let mut ranked: Vec<(&str, usize, usize)> = totals.into_iter().map(|(g, (c, d))| (g, c, d)).collect();
        ranked.sort_unstable_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(b.0)));
        ranked.truncate(config.max_features);
        let mut vocab = Self {
            config,
            grams: ranked.iter().map(|r| r.0.to_string()).collect(),
            document_frequency: ranked.iter().map(|r| r.2).collect(),
            num_documents: sequences.len(),
            index: HashMap::new(),
        };
        vocab.reindex();
        Ok(vocab)
    }

    /// Rebuilds the lookup table after deserialization.
    pub fn reindex(&mut self) {
        self.index = self.grams.iter().enumerate().map(|(i, g)| (g.clone(), i)).collect();
    }

    pub fn len(&self) -> usize {
        self.grams.len()
    }

    pub fn is_empty(&self) -> bool {
        self.grams.is_empty()
    }

    pub fn column(&self, gram: &str) -> Option<usize> {
        self.index.get(gram).copied()
    }

    fn idf(&self, col: usize) -> f64 {
        ((1.0 + self.num_documents as f64) / (1.0 + self.document_frequency[col] as f64)).ln() + 1.0
    }

    /// Term frequencies (count over the number of non-boundary symbols),
    /// optionally IDF-weighted. Out-of-vocabulary grams are dropped.
    pub fn featurize<S: AsRef<str>>(&self, seq: &[S]) -> SparseVector {
        let len = seq.iter().filter(|s| s.as_ref() != BOUNDARY).count().max(1) as f64;
        let mut entries: Vec<(u32, f64)> = extract_ngrams(seq, self.config.n_min, self.config.n_max)
            .into_iter()
            .filter_map(|(g, c)| self.column(&g).map(|i| (i, c)))
            .map(|(i, c)| {
                let tf = c as f64 / len;
                (i as u32, if self.config.idf { tf * self.idf(i) } else { tf })
            })
            .collect();
        entries.sort_unstable_by_key(|e| e.0);
        SparseVector {
            dim: self.len(),
            entries,
        }
    }

    pub fn featurize_all<S: AsRef<str> + Sync>(&self, sequences: &[Vec<S>]) -> Vec<SparseVector> {
        sequences.par_iter().map(|s| self.featurize(s)).collect()
    }
}
