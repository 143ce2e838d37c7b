//! Nadam (Adam with a Nesterov look-ahead on the first moment).
//!
//! With step `t` incremented before the update:
//!
//! ```text
//! m ← β₁·m + (1−β₁)·g
//! v ← β₂·v + (1−β₂)·g²
//! m̂ = β₁·m / (1 − β₁^(t+1)) + (1−β₁)·g / (1 − β₁^t)
//! v̂ = v / (1 − β₂^t)
//! θ ← θ − η·m̂ / (√v̂ + ε)
//! ```

use crate::error::{Error, Result};
use crate::model::{Params, SyntacticModel};
use crate::scalar::Scalar;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NadamHyper {
    pub learning_rate: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
}

impl Default for NadamHyper {
    fn default() -> Self {
        Self {
            learning_rate: 0.002,
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
        }
    }
}

/// First and second moments shaped like the gradient buffers, plus the
/// number of steps taken.
#[derive(Clone, Debug, PartialEq)]
pub struct NadamState<T> {
    pub m: Params<T>,
    pub v: Params<T>,
    pub t: u64,
}

impl<T: Scalar> NadamState<T> {
    pub fn new(model: &SyntacticModel<T>) -> Self {
        Self {
            m: model.zero_grad(),
            v: model.zero_grad(),
            t: 0,
        }
    }
}

/// One update of `params` in place. Empty gradient blocks (frozen
/// parameters) are skipped. A non-finite gradient aborts before anything is
/// modified.
pub fn nadam_step<T: Scalar>(
    params: &mut Params<T>,
    grads: &Params<T>,
    state: &mut NadamState<T>,
    hp: &NadamHyper,
) -> Result<()> {
    for ((name, _), g) in params.layout().into_iter().zip(grads.matrices()) {
        if !g.is_finite() {
            return Err(Error::NonFiniteGradient(name));
        }
    }
    state.t += 1;
    let t = state.t as f64;
    let (b1, b2) = (hp.beta1, hp.beta2);
    let c_m = T::of(b1 / (1.0 - b1.powf(t + 1.0)));
    let c_g = T::of((1.0 - b1) / (1.0 - b1.powf(t)));
    let c_v = T::of(1.0 / (1.0 - b2.powf(t)));
    let (b1, b2) = (T::of(b1), T::of(b2));
    let (one_b1, one_b2) = (T::one() - b1, T::one() - b2);
    let lr = T::of(hp.learning_rate);
    let eps = T::of(hp.epsilon);
    let blocks = params
        .matrices_mut()
        .into_iter()
        .zip(grads.matrices())
        .zip(state.m.matrices_mut().into_iter().zip(state.v.matrices_mut()));
    for ((p, g), (m, v)) in blocks {
        if g.is_empty() {
            continue;
        }
        let it = p
            .data_mut()
            .iter_mut()
            .zip(g.data())
            .zip(m.data_mut().iter_mut().zip(v.data_mut()));
        for ((p, &g), (m, v)) in it {
            *m = b1 * *m + one_b1 * g;
            *v = b2 * *v + one_b2 * g * g;
            let m_hat = c_m * *m + c_g * g;
            let v_hat = c_v * *v;
            *p -= lr * m_hat / (v_hat.sqrt() + eps);
        }
    }
    Ok(())
}
