//! Whitespace tokenization with detachment of punctuation that is its own tag.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

use super::sentences::is_abbreviation_token;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TokenizedSentence {
    pub tokens: Vec<String>,
    pub length: usize,
}

const CLITICS: [&str; 7] = ["n't", "'s", "'re", "'ve", "'ll", "'d", "'m"];

fn normalize_quotes(chunk: &str) -> String {
    chunk
        .replace(['’', '‘'], "'")
        .replace('“', "``")
        .replace('”', "''")
        .replace('…', "...")
}

/// Splits one whitespace-delimited chunk. `last` marks the final chunk of
/// the sentence, where a trailing period is always detached.
fn split_chunk(chunk: &str, last: bool, out: &mut Vec<String>) {
    let mut s = normalize_quotes(chunk);
    let mut front = Vec::new();
    loop {
        if let Some(rest) = s.strip_prefix("``") {
            front.push("``".to_string());
            s = rest.to_string();
        } else if let Some(rest) = s.strip_prefix('"') {
            front.push("``".to_string());
            s = rest.to_string();
        } else if let Some(rest) = s.strip_prefix('`') {
            front.push("``".to_string());
            s = rest.to_string();
        } else if let Some(c @ ('(' | '[' | '$')) = s.chars().next() {
            front.push(if c == '[' { "(".into() } else { c.to_string() });
            s = s[1..].to_string();
        } else {
            break;
        }
    }

    let mut back = Vec::new();
    loop {
        if let Some(rest) = s.strip_suffix("...") {
            back.push("...".to_string());
            s = rest.to_string();
        } else if let Some(rest) = s.strip_suffix("''") {
            back.push("''".to_string());
            s = rest.to_string();
        } else if let Some(rest) = s.strip_suffix('"') {
            back.push("''".to_string());
            s = rest.to_string();
        } else if let Some(c @ (',' | ':' | ';' | '?' | '!' | ')' | ']')) = s.chars().last() {
            back.push(if c == ']' { ")".into() } else { c.to_string() });
            s.pop();
        } else if s.ends_with('.') && s.len() > 1 {
            let base = &s[..s.len() - 1];
            let keep = !last && (is_abbreviation_token(base) || base.contains('.'));
            if keep {
                break;
            }
            back.push(".".to_string());
            s.pop();
        } else {
            break;
        }
    }

    out.extend(front);
    if !s.is_empty() {
        split_dashes(&s, out);
    }
    out.extend(back.into_iter().rev());
}

fn split_dashes(s: &str, out: &mut Vec<String>) {
    let s = s.replace('—', "--");
    let mut parts = s.split("--").peekable();
    while let Some(p) = parts.next() {
        if !p.is_empty() {
            split_clitic(p, out);
        }
        if parts.peek().is_some() {
            out.push("--".to_string());
        }
    }
}

fn split_clitic(word: &str, out: &mut Vec<String>) {
    let lower = word.to_lowercase();
    for c in CLITICS {
        if lower.len() > c.len() && lower.ends_with(c) {
            let cut = word.len() - c.len();
            if word.is_char_boundary(cut) {
                out.push(word[..cut].to_string());
                out.push(word[cut..].to_string());
                return;
            }
        }
    }
    out.push(word.to_string());
}

/// Splits on whitespace, then detaches the punctuation marks that are tags
/// in their own right (`, : ; ? ! . $ ( )`, quotes, ellipsis) and the
/// usual English clitics.
pub fn tokenize(sentence: &str) -> Result<TokenizedSentence> {
    let chunks: Vec<&str> = sentence.split_whitespace().collect();
    if chunks.is_empty() {
        return Err(Error::SentenceEmpty);
    }
    let mut tokens = Vec::new();
    for (i, chunk) in chunks.iter().enumerate() {
        split_chunk(chunk, i + 1 == chunks.len(), &mut tokens);
    }
    tokens.retain(|t| !t.is_empty());
    if tokens.is_empty() {
        return Err(Error::SentenceEmpty);
    }
    Ok(TokenizedSentence {
        length: tokens.len(),
        tokens,
    })
}
