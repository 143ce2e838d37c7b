//! Synthetic authors: POS-bigram Markov chains with pseudo-words.
//!
//! All authors share one random base chain over a small tag alphabet. Each
//! author adds `strength` to the probability mass of a few signature bigrams
//! (DT→NN-heavy for the first author, PRP→VBD-heavy for the second, random
//! pairs after that), so `strength` moves the task from indistinguishable
//! (0) to trivially separable (large).

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::corpus::{segment_document, Segment};
use crate::error::{Error, Result};
use crate::numkernel::Rng;
use crate::tagger::{pad_or_truncate, to_pretagged, TagSet, TaggedSentence};

/// Tags the chains walk over; sentences always end in `.`.
const ALPHABET: [&str; 15] = [
    "DT", "NN", "NNS", "JJ", "IN", "PRP", "VBD", "VBZ", "VB", "RB", "CC", "TO", "MD", "NNP", ",",
];

const SIGNATURES: [[(&str, &str); 4]; 2] = [
    [("DT", "NN"), ("JJ", "NN"), ("IN", "DT"), ("NN", "IN")],
    [("PRP", "VBD"), ("VBD", "RB"), ("CC", "PRP"), ("RB", "PRP")],
];

/// Pseudo-words per tag.
const LEXICON: usize = 6;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SynthConfig {
    pub authors: usize,
    pub documents_per_author: usize,
    pub sentences_per_document: usize,
    /// Extra transition mass on each signature bigram.
    pub strength: f64,
    pub min_len: usize,
    pub max_len: usize,
    pub seed: u64,
}

impl Default for SynthConfig {
    fn default() -> Self {
        Self {
            authors: 2,
            documents_per_author: 10,
            sentences_per_document: 400,
            strength: 1.0,
            min_len: 4,
            max_len: 20,
            seed: 0,
        }
    }
}

#[derive(Clone, Debug)]
pub struct SynthDocument {
    pub author_id: usize,
    pub doc_id: String,
    pub sentences: Vec<TaggedSentence>,
}

#[derive(Clone, Debug)]
pub struct SynthCorpus {
    pub authors: Vec<String>,
    pub documents: Vec<SynthDocument>,
}

/// Row-stochastic transition matrix over `ALPHABET` plus a start row.
struct Chain {
    start: Vec<f64>,
    rows: Vec<Vec<f64>>,
}

fn index(tag: &str) -> usize {
    ALPHABET.iter().position(|&t| t == tag).expect("tag in alphabet")
}

fn normalize(v: &mut [f64]) {
    let s: f64 = v.iter().sum();
    v.iter_mut().for_each(|x| *x /= s);
}

fn base_chain(rng: &mut Rng) -> Chain {
    let k = ALPHABET.len();
    let mut draw = || {
        let mut row: Vec<f64> = (0..k).map(|_| rng.uniform::<f64>(0.1, 1.0).powi(2)).collect();
        normalize(&mut row);
        row
    };
    let start = draw();
    let rows = (0..k).map(|_| draw()).collect();
    Chain { start, rows }
}

fn author_chain(base: &Chain, signature: &[(usize, usize)], strength: f64) -> Chain {
    let mut start = base.start.clone();
    let mut rows = base.rows.clone();
    for &(a, b) in signature {
        rows[a][b] += strength;
        start[a] += strength / signature.len() as f64;
    }
    rows.iter_mut().for_each(|r| normalize(r));
    normalize(&mut start);
    Chain { start, rows }
}

fn signature(author: usize, rng: &mut Rng) -> Vec<(usize, usize)> {
    match SIGNATURES.get(author) {
        Some(s) => s.iter().map(|&(a, b)| (index(a), index(b))).collect(),
        None => (0..4)
            .map(|_| (rng.below(ALPHABET.len()), rng.below(ALPHABET.len())))
            .collect(),
    }
}

fn word(tag: &str, k: usize) -> String {
    match tag {
        "," | "." => tag.to_string(),
        _ => format!("{}{k}", tag.to_lowercase()),
    }
}

fn sentence(chain: &Chain, cfg: &SynthConfig, rng: &mut Rng) -> TaggedSentence {
    let tagset = TagSet::standard();
    let len = cfg.min_len + rng.below(cfg.max_len - cfg.min_len + 1);
    let mut tags = Vec::with_capacity(len);
    let mut cur = rng.categorical(&chain.start);
    tags.push(cur);
    while tags.len() + 1 < len {
        cur = rng.categorical(&chain.rows[cur]);
        tags.push(cur);
    }
    let mut tokens: Vec<String> = tags.iter().map(|&t| word(ALPHABET[t], rng.below(LEXICON))).collect();
    let mut ids: Vec<u32> = tags.iter().map(|&t| tagset.id(ALPHABET[t]).expect("standard tag")).collect();
    tokens.push(".".into());
    ids.push(tagset.id(".").expect("standard tag"));
    TaggedSentence::new(tokens, ids)
}

pub fn generate(cfg: &SynthConfig) -> Result<SynthCorpus> {
    if cfg.authors < 2 || cfg.documents_per_author == 0 || cfg.sentences_per_document == 0 {
        return Err(Error::Config("synthetic corpus needs ≥ 2 authors and non-empty documents".into()));
    }
    if cfg.min_len < 2 || cfg.max_len < cfg.min_len || !(cfg.strength >= 0.0) {
        return Err(Error::Config("synthetic sentence lengths or strength out of range".into()));
    }
    let root = Rng::seeded(cfg.seed);
    let base = base_chain(&mut root.fork(0));
    let mut sig_rng = root.fork(1);
    let mut documents = Vec::new();
    let authors: Vec<String> = (0..cfg.authors).map(|a| format!("author{a:02}")).collect();
    for (a, name) in authors.iter().enumerate() {
        let chain = author_chain(&base, &signature(a, &mut sig_rng), cfg.strength);
        let mut rng = root.fork(100 + a as u64);
        for d in 0..cfg.documents_per_author {
            let sentences = (0..cfg.sentences_per_document)
                .map(|_| sentence(&chain, cfg, &mut rng))
                .collect();
            documents.push(SynthDocument {
                author_id: a,
                doc_id: format!("{name}/doc{d:03}"),
                sentences,
            });
        }
    }
    Ok(SynthCorpus { authors, documents })
}

impl SynthCorpus {
    /// Segments of `m` sentences padded or truncated to `n` slots, in
    /// document order.
    pub fn segments(&self, m: usize, n: usize) -> Result<Vec<Segment>> {
        let mut out = Vec::new();
        for doc in &self.documents {
            let padded: Vec<TaggedSentence> = doc.sentences.iter().map(|s| pad_or_truncate(s, n)).collect();
            out.extend(segment_document(&doc.doc_id, doc.author_id, &padded, m)?);
        }
        Ok(out)
    }

    /// Writes `root/<author>/<doc>.txt` in `token/TAG` form.
    pub fn write_dir(&self, root: impl AsRef<Path>) -> Result<()> {
        let root = root.as_ref();
        for doc in &self.documents {
            let path = root.join(format!("{}.txt", doc.doc_id));
            fs::create_dir_all(path.parent().expect("doc id has an author directory"))?;
            fs::write(path, to_pretagged(&doc.sentences))?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn deterministic_and_well_formed() {
        let cfg = SynthConfig {
            documents_per_author: 2,
            sentences_per_document: 30,
            ..SynthConfig::default()
        };
        let a = generate(&cfg).unwrap();
        let b = generate(&cfg).unwrap();
        assert_eq!(a.documents.len(), 4);
        for (x, y) in a.documents.iter().zip(&b.documents) {
            assert_eq!(x.sentences, y.sentences);
            for s in &x.sentences {
                assert!((cfg.min_len..=cfg.max_len).contains(&s.true_length));
                assert_eq!(s.tokens.len(), s.tag_ids.len());
            }
        }
    }

    #[test]
    fn signature_bigrams_are_more_frequent() {
        let cfg = SynthConfig {
            documents_per_author: 1,
            sentences_per_document: 500,
            ..SynthConfig::default()
        };
        let c = generate(&cfg).unwrap();
        let ts = TagSet::standard();
        let count = |doc: &SynthDocument, a: &str, b: &str| {
            let (a, b) = (ts.id(a).unwrap(), ts.id(b).unwrap());
            doc.sentences
                .iter()
                .map(|s| s.tag_ids.windows(2).filter(|w| w[0] == a && w[1] == b).count())
                .sum::<usize>()
        };
        let (d0, d1) = (&c.documents[0], &c.documents[1]);
        assert!(count(d0, "DT", "NN") > 2 * count(d1, "DT", "NN"));
        assert!(count(d1, "PRP", "VBD") > 2 * count(d0, "PRP", "VBD"));
    }
}
