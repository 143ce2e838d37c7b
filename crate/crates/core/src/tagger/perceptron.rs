//! Greedy left-to-right averaged perceptron tagger.

use std::collections::{BTreeMap, HashMap};
use std::fs;
use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numkernel::Rng;

use super::sentence::TaggedSentence;
use super::tagset::{TagSet, NUM_REAL_TAGS, TAGS, UNK};

pub const TAGGER_MAGIC: &str = "STTAG1";

type Scores = [f64; NUM_REAL_TAGS];

const START: [&str; 2] = ["-START-", "-START2-"];
const END: [&str; 2] = ["-END-", "-END2-"];

#[derive(Clone, Debug, Default)]
pub struct PerceptronTagger {
    weights: HashMap<String, Scores>,
}

#[derive(Serialize, Deserialize)]
struct TaggerFile {
    format: String,
    tags: Vec<String>,
    weights: BTreeMap<String, BTreeMap<String, f64>>,
}

fn normalize(word: &str) -> String {
    let first = word.chars().next();
    if word.contains('-') && first != Some('-') {
        "!HYPHEN".to_string()
    } else if word.len() == 4 && word.chars().all(|c| c.is_ascii_digit()) {
        "!YEAR".to_string()
    } else if first.is_some_and(|c| c.is_ascii_digit()) {
        "!DIGITS".to_string()
    } else {
        word.to_lowercase()
    }
}

fn suffix(word: &str) -> &str {
    let start = word
        .char_indices()
        .rev()
        .nth(2)
        .map_or(0, |(i, _)| i);
    &word[start..]
}

fn shape(word: &str) -> String {
    let mut out = String::new();
    for c in word.chars() {
        let s = if c.is_uppercase() {
            'X'
        } else if c.is_lowercase() {
            'x'
        } else if c.is_ascii_digit() {
            'd'
        } else {
            c
        };
        if !out.ends_with(s) {
            out.push(s);
        }
    }
    out
}

/// Feature strings for position `i` of `context`, which carries two
/// sentinels on each side (so the token is `context[i + 2]`).
fn features(i: usize, word: &str, context: &[String], prev: &str, prev2: &str) -> Vec<String> {
    let i = i + 2;
    let first: String = word.chars().take(1).collect();
    vec![
        "bias".to_string(),
        format!("i suffix {}", suffix(word)),
        format!("i pref1 {first}"),
        format!("i shape {}", shape(word)),
        format!("i-1 tag {prev}"),
        format!("i-2 tag {prev2}"),
        format!("i tag+i-2 tag {prev} {prev2}"),
        format!("i word {}", context[i]),
        format!("i-1 tag+i word {prev} {}", context[i]),
        format!("i-1 word {}", context[i - 1]),
        format!("i-1 suffix {}", suffix(&context[i - 1])),
        format!("i-2 word {}", context[i - 2]),
        format!("i+1 word {}", context[i + 1]),
        format!("i+1 suffix {}", suffix(&context[i + 1])),
        format!("i+2 word {}", context[i + 2]),
    ]
}

fn context_for(tokens: &[String]) -> Vec<String> {
    START
        .iter()
        .map(|s| s.to_string())
        .chain(tokens.iter().map(|t| normalize(t)))
        .chain(END.iter().map(|s| s.to_string()))
        .collect()
}

fn argmax(scores: &Scores) -> usize {
    let mut best = 0;
    for (i, &s) in scores.iter().enumerate() {
        if s > scores[best] {
            best = i;
        }
    }
    best
}

fn score(weights: &HashMap<String, Scores>, feats: &[String]) -> Scores {
    let mut scores = [0.0; NUM_REAL_TAGS];
    for f in feats {
        if let Some(w) = weights.get(f) {
            for (s, &x) in scores.iter_mut().zip(w) {
                *s += x;
            }
        }
    }
    scores
}

/// Online learner state: live weights plus the running sums needed to
/// average them over every update step.
#[derive(Default)]
struct Trainer {
    weights: HashMap<String, Scores>,
    totals: HashMap<String, Scores>,
    stamps: HashMap<String, [u64; NUM_REAL_TAGS]>,
    instances: u64,
}

impl Trainer {
    fn bump(&mut self, feat: &str, class: usize, delta: f64) {
        let w = self
            .weights
            .entry(feat.to_string())
            .or_insert([0.0; NUM_REAL_TAGS]);
        let total = self
            .totals
            .entry(feat.to_string())
            .or_insert([0.0; NUM_REAL_TAGS]);
        let stamp = self
            .stamps
            .entry(feat.to_string())
            .or_insert([0; NUM_REAL_TAGS]);
        total[class] += (self.instances - stamp[class]) as f64 * w[class];
        stamp[class] = self.instances;
        w[class] += delta;
    }

    fn update(&mut self, truth: usize, guess: usize, feats: &[String]) {
        self.instances += 1;
        if truth == guess {
            return;
        }
        for f in feats {
            self.bump(f, truth, 1.0);
            self.bump(f, guess, -1.0);
        }
    }

    fn averaged(mut self) -> HashMap<String, Scores> {
        let n = self.instances.max(1) as f64;
        let mut out = HashMap::with_capacity(self.weights.len());
        for (feat, w) in self.weights.drain() {
            let total = &self.totals[&feat];
            let stamp = &self.stamps[&feat];
            let mut avg = [0.0; NUM_REAL_TAGS];
            let mut any = false;
            for c in 0..NUM_REAL_TAGS {
                let t = total[c] + (self.instances - stamp[c]) as f64 * w[c];
                avg[c] = t / n;
                any |= avg[c] != 0.0;
            }
            if any {
                out.insert(feat, avg);
            }
        }
        out
    }
}

/// Trains a tagger on `(tokens, gold tags)` pairs. Gold tags are mapped
/// through the static foreign-tag table; positions whose gold tag is UNK
/// are not learned from.
pub fn train_tagger(
    corpus: &[(Vec<String>, Vec<String>)],
    epochs: usize,
    seed: u64,
) -> Result<PerceptronTagger> {
    if corpus.is_empty() {
        return Err(Error::NoTrainingData);
    }
    let tagset = TagSet::standard();
    let prepared: Vec<(Vec<String>, Vec<String>, Vec<u32>)> = corpus
        .iter()
        .map(|(tokens, tags)| {
            let ids = tags.iter().map(|t| tagset.id_or_unk(t)).collect();
            (tokens.clone(), context_for(tokens), ids)
        })
        .collect();

    let mut trainer = Trainer::default();
    let mut rng = Rng::seeded(seed);
    let mut order: Vec<usize> = (0..prepared.len()).collect();
    for _ in 0..epochs {
        for &si in &order {
            let (tokens, context, gold) = &prepared[si];
            let mut prev = START[0].to_string();
            let mut prev2 = START[1].to_string();
            for (i, tok) in tokens.iter().enumerate() {
                let guess = match tagset.punctuation_tag(tok) {
                    Some(id) => id as usize,
                    None => {
                        let feats = features(i, tok, context, &prev, &prev2);
                        let guess = argmax(&score(&trainer.weights, &feats));
                        if gold[i] != UNK {
                            trainer.update(gold[i] as usize, guess, &feats);
                        }
                        guess
                    }
                };
                prev2 = std::mem::replace(&mut prev, TAGS[guess].to_string());
            }
        }
        rng.shuffle(&mut order);
    }
    Ok(PerceptronTagger {
        weights: trainer.averaged(),
    })
}

impl PerceptronTagger {
    /// One tag per token. Punctuation tokens that are themselves tags map to
    /// that tag without consulting the weights.
    pub fn tag_sentence(&self, tokens: &[String]) -> TaggedSentence {
        let tagset = TagSet::standard();
        let context = context_for(tokens);
        let mut prev = START[0].to_string();
        let mut prev2 = START[1].to_string();
        let mut ids = Vec::with_capacity(tokens.len());
        for (i, tok) in tokens.iter().enumerate() {
            let id = match tagset.punctuation_tag(tok) {
                Some(id) => id as usize,
                None => argmax(&score(
                    &self.weights,
                    &features(i, tok, &context, &prev, &prev2),
                )),
            };
            prev2 = std::mem::replace(&mut prev, TAGS[id].to_string());
            ids.push(id as u32);
        }
        TaggedSentence::new(tokens.to_vec(), ids)
    }

    pub fn feature_count(&self) -> usize {
        self.weights.len()
    }

    pub fn to_bytes(&self) -> Result<Vec<u8>> {
        let weights = self
            .weights
            .iter()
            .map(|(f, w)| {
                let per_tag = w
                    .iter()
                    .enumerate()
                    .filter(|(_, &x)| x != 0.0)
                    .map(|(i, &x)| (TAGS[i].to_string(), x))
                    .collect();
                (f.clone(), per_tag)
            })
            .collect();
        let file = TaggerFile {
            format: TAGGER_MAGIC.to_string(),
            tags: TAGS.iter().map(|t| t.to_string()).collect(),
            weights,
        };
        let mut out = format!("{TAGGER_MAGIC}\n").into_bytes();
        serde_json::to_writer(&mut out, &file)?;
        Ok(out)
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        let body = bytes
            .strip_prefix(format!("{TAGGER_MAGIC}\n").as_bytes())
            .ok_or_else(|| Error::BadCheckpoint(format!("missing {TAGGER_MAGIC} header")))?;
        let file: TaggerFile = serde_json::from_slice(body)?;
        if file.tags.iter().map(String::as_str).ne(TAGS.iter().copied()) {
            return Err(Error::BadCheckpoint("tag inventory differs".into()));
        }
        let tagset = TagSet::standard();
        let mut weights = HashMap::with_capacity(file.weights.len());
        for (feat, per_tag) in file.weights {
            let mut w = [0.0; NUM_REAL_TAGS];
            for (tag, x) in per_tag {
                let id = tagset
                    .id(&tag)
                    .filter(|&i| (i as usize) < NUM_REAL_TAGS)
                    .ok_or_else(|| Error::BadCheckpoint(format!("unknown tag {tag}")))?;
                w[id as usize] = x;
            }
            weights.insert(feat, w);
        }
        Ok(Self { weights })
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let mut f = fs::File::create(path)?;
        f.write_all(&self.to_bytes()?)?;
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_bytes(&fs::read(path)?)
    }
}
