//! Regularized cross-entropy.
//!
//! ```text
//! J(θ) = −(1/B) Σ_b log max(ỹ_b[y_b], 1e-12) + λ·R(θ)
//! R(θ) = Σ θ²      (squared L2, default)
//!      = sqrt(Σ θ²) (plain L2)
//! ```
//!
//! `θ` covers weight matrices, the attention context vector and, when it is
//! trainable, the embedding table minus its PAD row. Biases are not penalized.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{BlockKind, Params, SyntacticModel, PROB_FLOOR};
use crate::scalar::Scalar;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Penalty {
    #[default]
    SquaredL2,
    L2,
}

impl std::str::FromStr for Penalty {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "squared-l2" | "l2sq" => Ok(Self::SquaredL2),
            "l2" => Ok(Self::L2),
            _ => Err(Error::Config(format!("unknown penalty `{s}`"))),
        }
    }
}

/// `−log max(p[label], 1e-12)`
pub fn cross_entropy<T: Scalar>(probs: &[T], label: usize) -> Result<T> {
    if label >= probs.len() {
        return Err(Error::BadLabel {
            label,
            classes: probs.len(),
        });
    }
    Ok(-probs[label].max(T::of(PROB_FLOOR)).ln())
}

pub fn mean_cross_entropy<T: Scalar>(probs: &[Vec<T>], labels: &[usize]) -> Result<T> {
    if probs.is_empty() || probs.len() != labels.len() {
        return Err(Error::NoTrainingData);
    }
    let mut total = T::zero();
    for (p, &y) in probs.iter().zip(labels) {
        total += cross_entropy(p, y)?;
    }
    Ok(total / T::of(probs.len() as f64))
}

/// `R(θ)` over the given penalized values.
pub fn penalty_value<T: Scalar>(theta: &[T], kind: Penalty) -> T {
    let sq = theta.iter().fold(T::zero(), |acc, &x| acc + x * x);
    match kind {
        Penalty::SquaredL2 => sq,
        Penalty::L2 => sq.sqrt(),
    }
}

pub fn regularized_loss<T: Scalar>(
    probs: &[Vec<T>],
    labels: &[usize],
    lambda: T,
    theta: &[T],
    kind: Penalty,
) -> Result<T> {
    Ok(mean_cross_entropy(probs, labels)? + lambda * penalty_value(theta, kind))
}

/// Blocks of `model` that are penalized, with the row to skip (PAD) if any.
fn penalized<T: Scalar>(model: &SyntacticModel<T>) -> Vec<(usize, Option<usize>)> {
    model
        .params
        .layout()
        .into_iter()
        .enumerate()
        .filter_map(|(i, (_, kind))| match kind {
            BlockKind::Weight => Some((i, None)),
            BlockKind::Embedding if model.hyper.train_embeddings => Some((i, Some(model.hyper.pad_row()))),
            _ => None,
        })
        .collect()
}

/// Copies out every penalized value of the model.
pub fn penalized_values<T: Scalar>(model: &SyntacticModel<T>) -> Vec<T> {
    let blocks = model.params.matrices();
    let mut out = Vec::new();
    for (i, skip) in penalized(model) {
        let m = blocks[i];
        for r in 0..m.rows() {
            if Some(r) != skip {
                out.extend_from_slice(m.row(r));
            }
        }
    }
    out
}

/// Adds `λ·∇R(θ)` to `grad` and returns `λ·R(θ)`.
pub fn add_penalty_gradient<T: Scalar>(
    model: &SyntacticModel<T>,
    lambda: T,
    kind: Penalty,
    grad: &mut Params<T>,
) -> T {
    if lambda == T::zero() {
        return T::zero();
    }
    let blocks = penalized(model);
    let params = model.params.matrices();
    let sq = blocks.iter().fold(T::zero(), |acc, &(i, skip)| {
        let m = params[i];
        (0..m.rows())
            .filter(|&r| Some(r) != skip)
            .flat_map(|r| m.row(r))
            .fold(acc, |a, &x| a + x * x)
    });
    let (value, scale) = match kind {
        Penalty::SquaredL2 => (sq, lambda + lambda),
        Penalty::L2 if sq > T::zero() => (sq.sqrt(), lambda / sq.sqrt()),
        Penalty::L2 => (T::zero(), T::zero()),
    };
    let mut grads = grad.matrices_mut();
    for &(i, skip) in &blocks {
        let (m, g) = (params[i], &mut grads[i]);
        if g.is_empty() {
            continue;
        }
        for r in 0..m.rows() {
            if Some(r) != skip {
                for (gv, &x) in g.row_mut(r).iter_mut().zip(m.row(r)) {
                    *gv += scale * x;
                }
            }
        }
    }
    lambda * value
}

/// Rescales `grad` so its global L2 norm is at most `max_norm`. Returns the
/// norm before clipping.
pub fn clip_global_norm<T: Scalar>(grad: &mut Params<T>, max_norm: Option<f64>) -> f64 {
    let norm = grad
        .matrices()
        .iter()
        .flat_map(|m| m.data())
        .fold(0.0f64, |acc, &x| acc + x.as_f64() * x.as_f64())
        .sqrt();
    if let Some(max) = max_norm {
        if norm > max {
            grad.scale(T::of(max / norm));
        }
    }
    norm
}
