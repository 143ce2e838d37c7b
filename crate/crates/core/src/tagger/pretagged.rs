//! `token/TAG` files: one sentence per line, space separated.

use std::fs;
use std::path::Path;

use crate::error::{Error, Result};

use super::sentence::TaggedSentence;
use super::tagset::{TagSet, UNK};

#[derive(Debug, Default)]
pub struct Pretagged {
    pub sentences: Vec<TaggedSentence>,
    /// Tokens whose tag string was not in the inventory and became UNK.
    pub unknown_tags: usize,
}

pub fn parse_pretagged(text: &str) -> Result<Pretagged> {
    let tagset = TagSet::standard();
    let mut out = Pretagged::default();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let mut tokens = Vec::new();
        let mut tags = Vec::new();
        for item in line.split_whitespace() {
            let (tok, tag) = item
                .rsplit_once('/')
                .filter(|(tok, tag)| !tok.is_empty() && !tag.is_empty())
                .ok_or_else(|| Error::MalformedPretagged {
                    line: lineno + 1,
                    token: item.to_string(),
                })?;
            let id = tagset.id_or_unk(tag);
            if id == UNK {
                out.unknown_tags += 1;
            }
            tokens.push(tok.to_string());
            tags.push(id);
        }
        out.sentences.push(TaggedSentence::new(tokens, tags));
    }
    Ok(out)
}

/// Reads a pretagged file. Unknown tag strings become UNK and are counted in
/// a warning.
pub fn load_pretagged(path: impl AsRef<Path>) -> Result<Vec<TaggedSentence>> {
    let path = path.as_ref();
    let parsed = parse_pretagged(&fs::read_to_string(path)?)?;
    if parsed.unknown_tags > 0 {
        log::warn!(
            "{}: {} token(s) carried tags outside the inventory and were mapped to UNK",
            path.display(),
            parsed.unknown_tags
        );
    }
    Ok(parsed.sentences)
}

/// Serializes real positions back into `token/TAG` lines.
pub fn to_pretagged(sentences: &[TaggedSentence]) -> String {
    let tagset = TagSet::standard();
    let mut out = String::new();
    for s in sentences.iter().filter(|s| !s.is_filler()) {
        let line: Vec<String> = s
            .tokens
            .iter()
            .zip(&s.tag_ids)
            .map(|(tok, &id)| format!("{tok}/{}", tagset.name(id)))
            .collect();
        out.push_str(&line.join(" "));
        out.push('\n');
    }
    out
}
