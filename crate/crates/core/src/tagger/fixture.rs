//! Small probabilistic grammar over an ambiguous lexicon that emits gold
//! `(tokens, tags)` pairs. Used to train and score the tagger without an
//! external treebank; many words carry several tags so context matters.

use crate::error::Result;
use crate::numkernel::Rng;

use super::perceptron::{train_tagger, PerceptronTagger};

const LEXICON: &[(&str, &[&str])] = &[
    ("DT", &["the", "a", "this", "that", "every", "some", "no", "an"]),
    ("NN", &["dog", "cat", "man", "house", "run", "walk", "light", "book", "water", "time", "letter", "city", "back", "garden", "record", "street"]),
    ("NNS", &["dogs", "cats", "men", "houses", "walks", "books", "letters", "runs", "records", "streets"]),
    ("NNP", &["John", "Mary", "London", "Smith", "Paris", "Elizabeth", "Darcy"]),
    ("JJ", &["old", "young", "bright", "light", "dark", "quiet", "back", "long", "small"]),
    ("VB", &["run", "walk", "read", "see", "write", "book", "record", "light", "water"]),
    ("VBD", &["ran", "walked", "read", "saw", "wrote", "said", "booked", "recorded", "lit"]),
    ("VBN", &["seen", "written", "walked", "read", "booked", "recorded"]),
    ("VBG", &["running", "walking", "reading", "writing", "recording"]),
    ("VBZ", &["runs", "walks", "reads", "sees", "writes", "books", "records"]),
    ("VBP", &["run", "walk", "read", "see", "write", "record"]),
    ("PRP", &["he", "she", "they", "it", "we", "I"]),
    ("PRP$", &["his", "her", "their", "its", "our"]),
    ("RB", &["quickly", "slowly", "never", "often", "back", "very", "out"]),
    ("IN", &["in", "on", "with", "at", "from", "of", "by", "that"]),
    ("MD", &["will", "would", "can", "must", "could"]),
    ("TO", &["to"]),
    ("CC", &["and", "but", "or"]),
    ("CD", &["two", "three", "seven", "1990", "12"]),
    ("WDT", &["which", "that"]),
    ("WP", &["who", "what"]),
    ("WRB", &["when", "where", "how"]),
    ("EX", &["there"]),
    ("RP", &["up", "out"]),
    ("POS", &["'s"]),
];

struct Gen<'a> {
    rng: &'a mut Rng,
    tokens: Vec<String>,
    tags: Vec<String>,
}

impl Gen<'_> {
    fn word(&mut self, tag: &str) {
        let words = LEXICON
            .iter()
            .find(|(t, _)| *t == tag)
            .map(|(_, w)| *w)
            .unwrap_or_else(|| panic!("no lexicon entry for {tag}"));
        let w = words[self.rng.below(words.len())];
        self.tokens.push(w.to_string());
        self.tags.push(tag.to_string());
    }

    fn lit(&mut self, tok: &str, tag: &str) {
        self.tokens.push(tok.to_string());
        self.tags.push(tag.to_string());
    }

    fn coin(&mut self, p: f64) -> bool {
        self.rng.unit() < p
    }

    fn np(&mut self, plural: bool) {
        match self.rng.below(5) {
            0 if !plural => self.word("NNP"),
            1 if !plural => {
                self.word("NNP");
                self.word("POS");
                self.word("NN");
            }
            2 => {
                self.word("PRP$");
                self.word(if plural { "NNS" } else { "NN" });
            }
            3 if plural => {
                self.word("CD");
                self.word("NNS");
            }
            _ => {
                if plural {
                    if self.coin(0.5) {
                        self.lit("the", "DT");
                    }
                } else {
                    self.word("DT");
                }
                if self.coin(0.4) {
                    self.word("JJ");
                }
                self.word(if plural { "NNS" } else { "NN" });
            }
        }
        if self.coin(0.15) {
            self.pp();
        }
    }

    fn pp(&mut self) {
        self.word("IN");
        let plural = self.coin(0.3);
        match self.rng.below(3) {
            0 => self.word("NNP"),
            _ if plural => {
                self.lit("the", "DT");
                self.word("NNS");
            }
            _ => {
                self.word("DT");
                self.word("NN");
            }
        }
    }

    fn vp(&mut self, subject_plural: bool) {
        match self.rng.below(7) {
            0 | 1 => {
                self.word("VBD");
                let pl = self.coin(0.3);
                self.np(pl);
            }
            2 => {
                self.word("MD");
                if self.coin(0.3) {
                    self.word("RB");
                }
                self.word("VB");
                self.np(false);
            }
            3 => {
                self.word(if subject_plural { "VBP" } else { "VBZ" });
                let pl = self.coin(0.5);
                self.np(pl);
            }
            4 => {
                self.word("VBD");
                self.lit("to", "TO");
                self.word("VB");
                self.np(false);
            }
            5 => {
                self.lit(if subject_plural { "were" } else { "was" }, "VBD");
                self.word("VBG");
                if self.coin(0.5) {
                    self.word("RP");
                }
                self.pp();
            }
            _ => {
                self.lit(if subject_plural { "have" } else { "has" }, if subject_plural { "VBP" } else { "VBZ" });
                self.word("VBN");
                self.np(false);
            }
        }
        if self.coin(0.2) {
            self.word("RB");
        }
    }

    fn clause(&mut self) {
        let plural = self.coin(0.35);
        if self.coin(0.3) {
            let p = ["he", "she", "it", "they", "we"][self.rng.below(5)];
            self.lit(p, "PRP");
            self.vp(matches!(p, "they" | "we"));
        } else {
            self.np(plural);
            if self.coin(0.15) {
                let rel = if self.coin(0.5) { "WDT" } else { "WP" };
                self.word(rel);
                self.word("VBD");
                self.np(false);
            }
            self.vp(plural);
        }
    }

    fn sentence(&mut self) {
        match self.rng.below(10) {
            0 => {
                self.lit("There", "EX");
                self.lit("was", "VBD");
                self.np(false);
                self.pp();
                self.lit(".", ".");
            }
            1 => {
                self.word("WRB");
                self.word("MD");
                self.word("PRP");
                self.word("VB");
                self.np(false);
                self.lit("?", "?");
            }
            2 => {
                let p = ["He", "She", "They"][self.rng.below(3)];
                self.lit(p, "PRP");
                self.lit("said", "VBD");
                self.lit(",", ",");
                self.lit("``", "``");
                self.clause();
                self.lit("''", "''");
                self.lit(".", ".");
            }
            3 => {
                self.clause();
                self.lit(",", ",");
                self.word("CC");
                self.clause();
                self.lit(".", ".");
            }
            _ => {
                self.clause();
                let end = if self.coin(0.1) { "!" } else { "." };
                self.lit(end, end);
            }
        }
    }
}

/// `n` gold-tagged sentences from the fixture grammar.
pub fn tagged_fixture(n: usize, seed: u64) -> Vec<(Vec<String>, Vec<String>)> {
    let mut rng = Rng::seeded(seed);
    (0..n)
        .map(|_| {
            let mut g = Gen {
                rng: &mut rng,
                tokens: Vec::new(),
                tags: Vec::new(),
            };
            g.sentence();
            if let Some(first) = g.tokens.first_mut() {
                let mut c = first.chars();
                if let Some(h) = c.next() {
                    *first = h.to_uppercase().chain(c).collect();
                }
            }
            (g.tokens, g.tags)
        })
        .collect()
}

/// Sentences, epochs and seed of [`fixture_tagger`].
pub const FIXTURE_TAGGER: (usize, usize, u64) = (2000, 5, 0);

/// A tagger trained on the fixture grammar. Adequate for the fixture and
/// synthetic corpora only; real text wants a tagger trained on real data or
/// pretagged input.
pub fn fixture_tagger() -> Result<PerceptronTagger> {
    let (n, epochs, seed) = FIXTURE_TAGGER;
    train_tagger(&tagged_fixture(n, seed), epochs, seed)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tagger::TagSet;

    #[test]
    fn fixture_tags_are_in_inventory() {
        let ts = TagSet::standard();
        for (toks, tags) in tagged_fixture(300, 4) {
            assert_eq!(toks.len(), tags.len());
            assert!(!toks.is_empty());
            for t in &tags {
                assert!(ts.id(t).is_some(), "{t}");
            }
        }
    }

    #[test]
    fn fixture_is_seeded() {
        assert_eq!(tagged_fixture(20, 1), tagged_fixture(20, 1));
        assert_ne!(tagged_fixture(20, 1), tagged_fixture(20, 2));
    }
}
