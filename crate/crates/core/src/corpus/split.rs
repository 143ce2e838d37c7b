use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::numkernel::Rng;
use crate::tagger::{TaggedSentence, WORD_PAD, WORD_UNK};

use super::document::Segment;

#[derive(Clone, Debug, Default, Serialize, Deserialize)]
pub struct DatasetSplit {
    pub train: Vec<Segment>,
    pub validation: Vec<Segment>,
    pub test: Vec<Segment>,
    pub seed: u64,
}

/// Seeded segment-level train/validation split. The validation share is
/// `round(fraction · n)`, at least one segment when `n ≥ 2`; both halves
/// keep the input order.
pub fn split_train_validation(
    segments: Vec<Segment>,
    test: Vec<Segment>,
    validation_fraction: f64,
    seed: u64,
) -> DatasetSplit {
    let n = segments.len();
    let mut k = (validation_fraction * n as f64).round() as usize;
    if n >= 2 {
        k = k.clamp(1, n - 1);
    } else {
        k = 0;
    }
    let mut order: Vec<usize> = (0..n).collect();
    Rng::seeded(seed).fork(0x5e9).shuffle(&mut order);
    let mut is_val = vec![false; n];
    for &i in &order[..k] {
        is_val[i] = true;
    }
    let (mut train, mut validation) = (Vec::with_capacity(n - k), Vec::with_capacity(k));
    for (seg, v) in segments.into_iter().zip(is_val) {
        if v {
            validation.push(seg);
        } else {
            train.push(seg);
        }
    }
    DatasetSplit {
        train,
        validation,
        test,
        seed,
    }
}

/// Lowercased word vocabulary: ids 0 and 1 are PAD and UNK, real words
/// start at 2 in descending frequency order (ties lexicographic).
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Vocabulary {
    pub words: Vec<String>,
    #[serde(skip)]
    index: HashMap<String, u32>,
}

impl Vocabulary {
    pub fn build<'a>(tokens: impl IntoIterator<Item = &'a str>, cap: usize) -> Self {
        let mut counts: HashMap<String, usize> = HashMap::new();
        for t in tokens {
            *counts.entry(t.to_lowercase()).or_default() += 1;
        }
        let mut ranked: Vec<(String, usize)> = counts.into_iter().collect();
        ranked.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
        ranked.truncate(cap);
        Self::from_words(ranked.into_iter().map(|(w, _)| w).collect())
    }

    pub fn from_words(words: Vec<String>) -> Self {
        let index = words
            .iter()
            .enumerate()
            .map(|(i, w)| (w.clone(), i as u32 + 2))
            .collect();
        Self { words, index }
    }

    /// Rebuilds the lookup after deserialization.
    pub fn reindex(&mut self) {
        *self = Self::from_words(std::mem::take(&mut self.words));
    }

    /// Table rows needed: vocabulary plus PAD and UNK.
    pub fn table_rows(&self) -> usize {
        self.words.len() + 2
    }

    pub fn id(&self, word: &str) -> u32 {
        self.index
            .get(&word.to_lowercase())
            .copied()
            .unwrap_or(WORD_UNK)
    }

    pub fn word(&self, id: u32) -> Option<&str> {
        (id >= 2).then(|| self.words.get(id as usize - 2).map(String::as_str)).flatten()
    }

    /// Fills `word_ids` from the sentence's tokens; must run before padding.
    pub fn assign(&self, sent: &mut TaggedSentence) {
        let mut ids: Vec<u32> = sent.tokens.iter().map(|t| self.id(t)).collect();
        ids.resize(sent.tag_ids.len(), WORD_PAD);
        sent.word_ids = Some(ids);
    }
}
