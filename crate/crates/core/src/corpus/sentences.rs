//! Rule-based sentence boundary detection.

use std::collections::HashSet;
use std::sync::OnceLock;

const ABBREVIATIONS: &str = include_str!("../../data/abbreviations.txt");

fn abbreviations() -> &'static HashSet<String> {
    static SET: OnceLock<HashSet<String>> = OnceLock::new();
    SET.get_or_init(|| {
        ABBREVIATIONS
            .lines()
            .map(str::trim)
            .filter(|l| !l.is_empty() && !l.starts_with('#'))
            .map(str::to_string)
            .collect()
    })
}

fn is_terminal(c: char) -> bool {
    matches!(c, '.' | '!' | '?' | '…')
}

fn is_closer(c: char) -> bool {
    matches!(c, '"' | '\'' | ')' | ']' | '”' | '’' | '»')
}

fn is_opener(c: char) -> bool {
    matches!(c, '"' | '\'' | '“' | '‘' | '(' | '[' | '`' | '«')
}

/// The word ending just before the period at byte `dot`, lowercased and
/// stripped of leading punctuation.
fn word_before(text: &str, dot: usize) -> String {
    let head = &text[..dot];
    let start = head
        .char_indices()
        .rev()
        .find(|(_, c)| c.is_whitespace())
        .map_or(0, |(i, c)| i + c.len_utf8());
    head[start..]
        .trim_start_matches(|c: char| !c.is_alphanumeric())
        .to_lowercase()
}

/// True if `token` (without its trailing period) is a known abbreviation
/// or a single-letter initial.
pub(crate) fn is_abbreviation_token(token: &str) -> bool {
    is_abbreviation(&token.trim_start_matches(|c: char| !c.is_alphanumeric()).to_lowercase())
}

fn is_abbreviation(word: &str) -> bool {
    if word.is_empty() {
        return false;
    }
    // single-letter initials: "J. Smith"
    let mut chars = word.chars();
    if let (Some(c), None) = (chars.next(), chars.next()) {
        if c.is_alphabetic() {
            return true;
        }
    }
    abbreviations().contains(word)
}

/// Splits `text` into sentences.
///
/// A boundary follows a run of `. ! ? …` (plus any closing quotes or
/// brackets) when the next non-space character is uppercase, a digit, or
/// an opening quote. A single period after a listed abbreviation or an
/// initial is not a boundary. Blank lines always end a sentence.
pub fn split_sentences(text: &str) -> Vec<String> {
    let mut out = Vec::new();
    for para in text.split("\n\n").flat_map(|p| p.split("\r\n\r\n")) {
        split_paragraph(para, &mut out);
    }
    out
}

fn split_paragraph(text: &str, out: &mut Vec<String>) {
    let chars: Vec<(usize, char)> = text.char_indices().collect();
    let mut start = 0;
    let mut i = 0;
    while i < chars.len() {
        let (pos, c) = chars[i];
        if !is_terminal(c) {
            i += 1;
            continue;
        }
        let run_start = i;
        let mut j = i;
        while j < chars.len() && is_terminal(chars[j].1) {
            j += 1;
        }
        let single_dot = c == '.' && j - run_start == 1;
        while j < chars.len() && is_closer(chars[j].1) {
            j += 1;
        }
        let end = chars.get(j).map_or(text.len(), |&(p, _)| p);
        let followed_by_space = j >= chars.len() || chars[j].1.is_whitespace();
        let mut k = j;
        while k < chars.len() && chars[k].1.is_whitespace() {
            k += 1;
        }
        let next_ok = k >= chars.len() || {
            let n = chars[k].1;
            n.is_uppercase() || n.is_ascii_digit() || is_opener(n)
        };
        let guarded = single_dot && is_abbreviation(&word_before(text, pos));
        if followed_by_space && next_ok && !guarded {
            push_trimmed(&text[start..end], out);
            start = end;
        }
        i = j.max(i + 1);
    }
    push_trimmed(&text[start..], out);
}

fn push_trimmed(s: &str, out: &mut Vec<String>) {
    let s = s.split_whitespace().collect::<Vec<_>>().join(" ");
    if !s.is_empty() {
        out.push(s);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_periods() {
        assert_eq!(split_sentences("A cat. A dog."), vec!["A cat.", "A dog."]);
    }

    #[test]
    fn abbreviation_guard() {
        assert_eq!(split_sentences("Mr. Smith ran."), vec!["Mr. Smith ran."]);
        assert_eq!(
            split_sentences("J. R. Smith left. He ran."),
            vec!["J. R. Smith left.", "He ran."]
        );
    }

    #[test]
    fn empty_input() {
        assert!(split_sentences("").is_empty());
        assert!(split_sentences("   \n ").is_empty());
    }

    #[test]
    fn lowercase_continuation_is_not_a_boundary() {
        assert_eq!(split_sentences("It cost 5 p. per day."), vec!["It cost 5 p. per day."]);
        assert_eq!(split_sentences("Wait... and see."), vec!["Wait... and see."]);
    }

    #[test]
    fn quotes_and_mixed_terminals() {
        assert_eq!(
            split_sentences("\"Stop!\" she cried. \"Why?!\" He left."),
            vec!["\"Stop!\" she cried.", "\"Why?!\"", "He left."]
        );
    }

    #[test]
    fn paragraph_break_is_a_boundary() {
        assert_eq!(
            split_sentences("Chapter one\n\nIt was dark"),
            vec!["Chapter one", "It was dark"]
        );
    }

    #[test]
    fn coverage_modulo_whitespace() {
        let text = "One. Two!  Three?\nFour… Five";
        let joined: String = split_sentences(text).concat();
        let squash = |s: &str| s.chars().filter(|c| !c.is_whitespace()).collect::<String>();
        assert_eq!(squash(&joined), squash(text));
    }
}
