//! One-vs-rest linear SVM: per class, stochastic subgradient descent on
//! `λ/2‖w‖² + mean max(0, 1 − y(w·x + b))` with step `1/(λt)`. The returned
//! weights average the iterates of the second half of the epochs; the bias
//! is then set to the exact minimizer of the mean hinge for those weights.

use std::fs;
use std::io::{Cursor, Read};
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numkernel::Rng;

use super::ngram::{NgramKind, NgramVocabulary, SparseVector};

pub const SVM_MAGIC: &[u8; 6] = b"STSVM1";

/// The bias learns at this fraction of the weight step.
const BIAS_RATE: f64 = 0.01;
/// Fold the weight scale back into the weights below this.
const MIN_SCALE: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SvmConfig {
    pub lambda: f64,
    pub epochs: usize,
    pub seed: u64,
}

impl Default for SvmConfig {
    fn default() -> Self {
        Self {
            lambda: 1e-4,
            epochs: 20,
            seed: 0,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct LinearSvm {
    /// Row `c` holds the weights of class `c` against the rest.
    pub weights: Vec<Vec<f64>>,
    pub bias: Vec<f64>,
    pub config: SvmConfig,
}

/// `w = scale · v`, with the running sum of `w` over steps kept lazily: each
/// coordinate is brought up to date only when it is touched.
struct Averaged {
    v: Vec<f64>,
    scale: f64,
    /// Σ of `scale` over all steps so far.
    scale_sum: f64,
    /// `scale_sum` when each coordinate was last brought up to date.
    seen: Vec<f64>,
    acc: Vec<f64>,
    bias: f64,
    bias_acc: f64,
    steps: usize,
    averaging: bool,
}

impl Averaged {
    fn new(dim: usize) -> Self {
        Self {
            v: vec![0.0; dim],
            scale: 1.0,
            scale_sum: 0.0,
            seen: vec![0.0; dim],
            acc: vec![0.0; dim],
            bias: 0.0,
            bias_acc: 0.0,
            steps: 0,
            averaging: false,
        }
    }

    fn touch(&mut self, j: usize) {
        self.acc[j] += self.v[j] * (self.scale_sum - self.seen[j]);
        self.seen[j] = self.scale_sum;
    }

    fn flush(&mut self) {
        for j in 0..self.v.len() {
            self.touch(j);
        }
    }

    fn margin(&self, x: &SparseVector) -> f64 {
        self.scale * x.dot(&self.v) + self.bias
    }

    fn step(&mut self, x: &SparseVector, y: f64, eta: f64, lambda: f64) {
        let violated = y * self.margin(x) < 1.0;
        self.scale *= 1.0 - eta * lambda;
        if self.scale < MIN_SCALE {
            self.flush();
            let s = self.scale;
            self.v.iter_mut().for_each(|w| *w *= s);
            self.scale = 1.0;
        }
        if violated {
            for &(j, xj) in &x.entries {
                let j = j as usize;
                self.touch(j);
                self.v[j] += eta * y * xj / self.scale;
            }
            self.bias += BIAS_RATE * eta * y;
        }
        if self.averaging {
            self.scale_sum += self.scale;
            self.bias_acc += self.bias;
            self.steps += 1;
        }
    }

    fn finish(mut self) -> (Vec<f64>, f64) {
        self.flush();
        let n = self.steps.max(1) as f64;
        (self.acc.iter().map(|a| a / n).collect(), self.bias_acc / n)
    }
}

/// Minimizer of `Σ max(0, 1 − yᵢ(sᵢ + b))` over `b`. Each term has a single
/// kink at `b = yᵢ − sᵢ`, and the slope climbs from `−#positives` by one per
/// kink, so the minimum sits between the P-th and (P+1)-th sorted kinks.
fn best_bias(scores: &[f64], y: &[f64]) -> Option<f64> {
    let positives = y.iter().filter(|&&v| v > 0.0).count();
    if positives == 0 || positives == y.len() {
        return None;
    }
    let mut kinks: Vec<f64> = scores.iter().zip(y).map(|(s, y)| y - s).collect();
    kinks.sort_unstable_by(f64::total_cmp);
    Some(0.5 * (kinks[positives - 1] + kinks[positives]))
}

fn train_binary(features: &[SparseVector], y: &[f64], dim: usize, cfg: &SvmConfig, rng: &mut Rng) -> (Vec<f64>, f64) {
    let mut state = Averaged::new(dim);
    let mut order: Vec<usize> = (0..features.len()).collect();
    // t starts past 1 so that the first decay factor 1 − 1/t is not zero.
    let mut t = 1.0;
    for epoch in 0..cfg.epochs {
        state.averaging = epoch >= cfg.epochs / 2;
        rng.shuffle(&mut order);
        for &i in &order {
            t += 1.0;
            state.step(&features[i], y[i], 1.0 / (cfg.lambda * t), cfg.lambda);
        }
    }
    let (w, b) = state.finish();
    let scores: Vec<f64> = features.iter().map(|x| x.dot(&w)).collect();
    let b = best_bias(&scores, y).unwrap_or(b);
    (w, b)
}

/// Trains one binary classifier per class (in parallel).
pub fn train_svm_ovr(features: &[SparseVector], labels: &[usize], classes: usize, cfg: &SvmConfig) -> Result<LinearSvm> {
    if features.is_empty() || features.len() != labels.len() {
        return Err(Error::NoTrainingData);
    }
    if !(cfg.lambda > 0.0) || cfg.epochs == 0 {
        return Err(Error::Config("SVM needs λ > 0 and at least one epoch".into()));
    }
    if let Some(&bad) = labels.iter().find(|&&l| l >= classes) {
        return Err(Error::BadLabel { label: bad, classes });
    }
    if labels.iter().all(|&l| l == labels[0]) {
        return Err(Error::DegenerateLabels);
    }
    let dim = features[0].dim;
    if let Some(f) = features.iter().find(|f| f.dim != dim) {
        return Err(Error::ShapeMismatch {
            left: (1, f.dim),
            right: (1, dim),
        });
    }
    let root = Rng::seeded(cfg.seed);
    let (weights, bias) = (0..classes)
        .into_par_iter()
        .map(|c| {
            let y: Vec<f64> = labels.iter().map(|&l| if l == c { 1.0 } else { -1.0 }).collect();
            train_binary(features, &y, dim, cfg, &mut root.fork(c as u64))
        })
        .unzip();
    Ok(LinearSvm {
        weights,
        bias,
        config: cfg.clone(),
    })
}

impl LinearSvm {
    pub fn classes(&self) -> usize {
        self.bias.len()
    }

    pub fn dim(&self) -> usize {
        self.weights.first().map_or(0, Vec::len)
    }

    pub fn scores(&self, x: &SparseVector) -> Result<Vec<f64>> {
        if x.dim != self.dim() || x.entries.last().is_some_and(|e| e.0 as usize >= x.dim) {
            return Err(Error::ShapeMismatch {
                left: (1, x.dim),
                right: (self.classes(), self.dim()),
            });
        }
        Ok(self.weights.iter().zip(&self.bias).map(|(w, b)| x.dot(w) + b).collect())
    }
}

/// Highest-scoring class (lowest index on ties) and all class scores.
pub fn predict_svm(model: &LinearSvm, x: &SparseVector) -> Result<(usize, Vec<f64>)> {
    let scores = model.scores(x)?;
    let mut best = 0;
    for (c, &s) in scores.iter().enumerate() {
        if s > scores[best] {
            best = c;
        }
    }
    Ok((best, scores))
}

/// A fitted baseline: vocabulary plus classifier.
#[derive(Clone, Debug, PartialEq)]
pub struct NgramSvm {
    pub kind: NgramKind,
    pub vocabulary: NgramVocabulary,
    pub svm: LinearSvm,
    pub authors: Vec<String>,
}

#[derive(Serialize, Deserialize)]
struct Header {
    kind: NgramKind,
    vocabulary: NgramVocabulary,
    config: SvmConfig,
    authors: Vec<String>,
    classes: usize,
    dim: usize,
}

impl NgramSvm {
    /// `STSVM1`, u64 LE header length, JSON header, then class-major f64 LE
    /// weights followed by the biases.
    pub fn to_bytes(&self) -> Result<Vec<u8>> {
        let header = serde_json::to_vec(&Header {
            kind: self.kind,
            vocabulary: self.vocabulary.clone(),
            config: self.svm.config.clone(),
            authors: self.authors.clone(),
            classes: self.svm.classes(),
            dim: self.svm.dim(),
        })?;
        let mut out = Vec::with_capacity(header.len() + 8 * (self.svm.classes() * (self.svm.dim() + 1)) + 14);
        out.extend_from_slice(SVM_MAGIC);
        out.extend_from_slice(&(header.len() as u64).to_le_bytes());
        out.extend_from_slice(&header);
        for x in self.svm.weights.iter().flatten().chain(&self.svm.bias) {
            out.extend_from_slice(&x.to_le_bytes());
        }
        Ok(out)
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        let bad = |m: &str| Error::BadCheckpoint(m.to_string());
        let mut r = Cursor::new(bytes);
        let mut magic = [0u8; 6];
        r.read_exact(&mut magic).map_err(|_| bad("truncated"))?;
        if &magic != SVM_MAGIC {
            return Err(bad("not an STSVM1 file"));
        }
        let mut len = [0u8; 8];
        r.read_exact(&mut len).map_err(|_| bad("truncated"))?;
        let len = usize::try_from(u64::from_le_bytes(len)).map_err(|_| bad("header too large"))?;
        let mut header = vec![0u8; len];
        r.read_exact(&mut header).map_err(|_| bad("truncated header"))?;
        let mut h: Header = serde_json::from_slice(&header)?;
        h.vocabulary.reindex();
        if h.vocabulary.len() != h.dim {
            return Err(bad("vocabulary size does not match weight width"));
        }
        let mut rest = Vec::new();
        r.read_to_end(&mut rest)?;
        if rest.len() != 8 * h.classes * (h.dim + 1) {
            return Err(bad("weight block has the wrong length"));
        }
        let vals: Vec<f64> = rest
            .chunks_exact(8)
            .map(|c| f64::from_le_bytes(c.try_into().expect("8 bytes")))
            .collect();
        let (w, b) = vals.split_at(h.classes * h.dim);
        let weights = if h.dim == 0 {
            vec![Vec::new(); h.classes]
        } else {
            w.chunks(h.dim).map(<[f64]>::to_vec).collect()
        };
        Ok(Self {
            kind: h.kind,
            vocabulary: h.vocabulary,
            svm: LinearSvm {
                weights,
                bias: b.to_vec(),
                config: h.config,
            },
            authors: h.authors,
        })
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        crate::model::write_atomic(path.as_ref(), &self.to_bytes()?)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_bytes(&fs::read(path)?)
    }
}
