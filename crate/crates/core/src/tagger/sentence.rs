use serde::{Deserialize, Serialize};

use super::tagset::PAD;

/// Word-id of the padding row in a word embedding table.
pub const WORD_PAD: u32 = 0;
/// Word-id of the out-of-vocabulary row.
pub const WORD_UNK: u32 = 1;

/// A sentence as tag ids (and optionally word ids).
///
/// Before [`pad_or_truncate`] the id vectors have one entry per token; after
/// it they have exactly `N` slots with PAD from `true_length` on.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TaggedSentence {
    pub tag_ids: Vec<u32>,
    pub word_ids: Option<Vec<u32>>,
    pub true_length: usize,
    /// Surface tokens of the real positions (at most `true_length`).
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub tokens: Vec<String>,
}

impl TaggedSentence {
    pub fn new(tokens: Vec<String>, tag_ids: Vec<u32>) -> Self {
        debug_assert_eq!(tokens.len(), tag_ids.len());
        Self {
            true_length: tag_ids.len(),
            tag_ids,
            word_ids: None,
            tokens,
        }
    }

    /// All-PAD sentence of `n` slots used to fill a short segment.
    pub fn filler(n: usize, with_words: bool) -> Self {
        Self {
            tag_ids: vec![PAD; n],
            word_ids: with_words.then(|| vec![WORD_PAD; n]),
            true_length: 0,
            tokens: Vec::new(),
        }
    }

    pub fn is_filler(&self) -> bool {
        self.true_length == 0
    }

    pub fn slots(&self) -> usize {
        self.tag_ids.len()
    }

    pub fn text(&self) -> String {
        self.tokens.join(" ")
    }
}

/// Forces a sentence to exactly `n` slots: keeps the head, pads the tail.
pub fn pad_or_truncate(sent: &TaggedSentence, n: usize) -> TaggedSentence {
    assert!(n >= 1, "sentence width must be positive");
    let keep = sent.true_length.min(n);
    let mut tag_ids: Vec<u32> = sent.tag_ids.iter().take(keep).copied().collect();
    tag_ids.resize(n, PAD);
    let word_ids = sent.word_ids.as_ref().map(|w| {
        let mut w: Vec<u32> = w.iter().take(keep).copied().collect();
        w.resize(n, WORD_PAD);
        w
    });
    TaggedSentence {
        tag_ids,
        word_ids,
        true_length: keep,
        tokens: sent.tokens.iter().take(keep).cloned().collect(),
    }
}
