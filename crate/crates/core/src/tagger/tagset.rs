use std::collections::HashMap;
use std::sync::OnceLock;

use sha2::{Digest, Sha256};

/// The part-of-speech inventory in its canonical order. Indices are stable
/// across runs and are what the embedding tables are keyed by.
pub const TAGS: [&str; 48] = [
    "CC", "CD", "DT", "EX", "FW", "IN", "JJ", "JJR", "JJS", "LS", "MD", "NN", "NNS", "NNP",
    "NNPS", "PDT", "POS", "PRP", "PRP$", "RB", "RBR", "RBS", "RP", "SYM", "TO", "UH", "VB",
    "VBD", "VBG", "VBN", "VBP", "VBZ", "WDT", "WP", "WP$", "WRB", ",", ":", "...", ";", "?",
    "!", ".", "$", "(", ")", "``", "''",
];

/// Number of real (non-PAD, non-UNK) tags.
pub const NUM_REAL_TAGS: usize = TAGS.len();
pub const PAD: u32 = NUM_REAL_TAGS as u32;
pub const UNK: u32 = NUM_REAL_TAGS as u32 + 1;
/// Rows in a tag embedding table.
pub const TAG_VOCAB: usize = NUM_REAL_TAGS + 2;

pub const PAD_STR: &str = "<PAD>";
pub const UNK_STR: &str = "<UNK>";

/// Punctuation tokens that are their own tag.
const PUNCT_TAGS: [&str; 12] = [",", ":", "...", ";", "?", "!", ".", "$", "(", ")", "``", "''"];

/// Static conversions from foreign tag conventions into [`TAGS`].
const FOREIGN: [(&str, &str); 14] = [
    ("-LRB-", "("),
    ("-RRB-", ")"),
    ("-LCB-", "("),
    ("-RCB-", ")"),
    ("#", "SYM"),
    ("--", ":"),
    ("HYPH", ":"),
    ("NFP", "SYM"),
    ("AFX", "JJ"),
    ("XX", "FW"),
    ("GW", "FW"),
    ("ADD", "NN"),
    ("\"", "''"),
    ("…", "..."),
];

#[derive(Debug)]
pub struct TagSet {
    index: HashMap<&'static str, u32>,
}

impl TagSet {
    pub fn standard() -> &'static TagSet {
        static SET: OnceLock<TagSet> = OnceLock::new();
        SET.get_or_init(|| {
            let mut index: HashMap<&'static str, u32> = TAGS
                .iter()
                .enumerate()
                .map(|(i, &t)| (t, i as u32))
                .collect();
            index.insert(PAD_STR, PAD);
            index.insert(UNK_STR, UNK);
            TagSet { index }
        })
    }

    pub fn len(&self) -> usize {
        TAG_VOCAB
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Exact lookup of a canonical tag string.
    pub fn id(&self, tag: &str) -> Option<u32> {
        self.index.get(tag).copied()
    }

    /// Canonical lookup, then the static foreign mapping; anything else is `None`.
    pub fn map_foreign(&self, tag: &str) -> Option<u32> {
        self.id(tag).or_else(|| {
            FOREIGN
                .iter()
                .find(|(from, _)| *from == tag)
                .and_then(|(_, to)| self.id(to))
        })
    }

    /// Lenient lookup: unmappable tags become UNK.
    pub fn id_or_unk(&self, tag: &str) -> u32 {
        self.map_foreign(tag).unwrap_or(UNK)
    }

    pub fn name(&self, id: u32) -> &'static str {
        match id {
            PAD => PAD_STR,
            UNK => UNK_STR,
            i => TAGS.get(i as usize).copied().unwrap_or(UNK_STR),
        }
    }

    /// Tag id for a token that is itself a punctuation tag, if any.
    pub fn punctuation_tag(&self, token: &str) -> Option<u32> {
        let token = if token == "…" { "..." } else { token };
        PUNCT_TAGS
            .contains(&token)
            .then(|| self.id(token))
            .flatten()
    }

    /// Hex SHA-256 over the ordered inventory; recorded in model checkpoints.
    pub fn hash(&self) -> String {
        let mut h = Sha256::new();
        for id in 0..TAG_VOCAB as u32 {
            h.update(self.name(id).as_bytes());
            h.update([0u8]);
        }
        hex::encode(h.finalize())
    }
}
