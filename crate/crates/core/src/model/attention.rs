//! Sentence-level attention and the softmax classifier.
//!
//! ```text
//! u_i = tanh(h_i·W_s + b_s)
//! α   = softmax(u_i · u_s)
//! V   = Σ α_i h_i
//! ỹ   = softmax(V·W_c + b_c)
//! ```

use crate::numkernel::{axpy, dot, mat_vec_acc, outer_acc, softmax, vec_mat, vec_mat_acc, Matrix};
use crate::scalar::Scalar;

use super::params::{AttentionParams, ClassifierParams};

#[derive(Clone, Debug)]
pub struct AttentionTrace<T> {
    /// `M × a`
    pub u: Matrix<T>,
    pub alpha: Vec<T>,
}

/// Returns `(V, α)` plus the projections needed for the backward pass.
pub fn attend<T: Scalar>(h: &Matrix<T>, p: &AttentionParams<T>) -> (Vec<T>, AttentionTrace<T>) {
    let a = p.w.cols();
    let mut u = Matrix::zeros(h.rows(), a);
    let mut scores = Vec::with_capacity(h.rows());
    for i in 0..h.rows() {
        let row = u.row_mut(i);
        row.copy_from_slice(p.b.data());
        vec_mat_acc(h.row(i), &p.w, row);
        row.iter_mut().for_each(|v| *v = v.tanh());
        scores.push(dot(row, p.context.data()));
    }
    let alpha = softmax(&scores);
    let mut v = vec![T::zero(); h.cols()];
    for (i, &w) in alpha.iter().enumerate() {
        axpy(w, h.row(i), &mut v);
    }
    (v, AttentionTrace { u, alpha })
}

/// Gradient of `V` back to `H`; parameter gradients accumulate into `grad`.
pub fn attend_backward<T: Scalar>(
    h: &Matrix<T>,
    p: &AttentionParams<T>,
    trace: &AttentionTrace<T>,
    dv: &[T],
    grad: &mut AttentionParams<T>,
) -> Matrix<T> {
    let m = h.rows();
    let mut dh = h.zeros_like();
    let dalpha: Vec<T> = (0..m).map(|i| dot(dv, h.row(i))).collect();
    let mean = dot(&trace.alpha, &dalpha);
    let one = T::one();
    for i in 0..m {
        let ai = trace.alpha[i];
        axpy(ai, dv, dh.row_mut(i));
        let de = ai * (dalpha[i] - mean);
        let u = trace.u.row(i);
        axpy(de, u, grad.context.data_mut());
        let dpre: Vec<T> = u
            .iter()
            .zip(p.context.data())
            .map(|(&ui, &c)| de * c * (one - ui * ui))
            .collect();
        outer_acc(&mut grad.w, h.row(i), &dpre);
        for (g, &v) in grad.b.data_mut().iter_mut().zip(&dpre) {
            *g += v;
        }
        mat_vec_acc(&p.w, &dpre, dh.row_mut(i));
    }
    dh
}

/// Class probabilities for a segment vector.
pub fn classify<T: Scalar>(v: &[T], p: &ClassifierParams<T>) -> Vec<T> {
    softmax(&logits(v, p))
}

/// `V·W_c + b_c`
pub fn logits<T: Scalar>(v: &[T], p: &ClassifierParams<T>) -> Vec<T> {
    let mut out = vec_mat(v, &p.w);
    for (l, &b) in out.iter_mut().zip(p.b.data()) {
        *l += b;
    }
    out
}

/// Backward from `dlogits`; returns `dV`.
pub fn classify_backward<T: Scalar>(
    v: &[T],
    p: &ClassifierParams<T>,
    dlogits: &[T],
    grad: &mut ClassifierParams<T>,
) -> Vec<T> {
    outer_acc(&mut grad.w, v, dlogits);
    for (g, &d) in grad.b.data_mut().iter_mut().zip(dlogits) {
        *g += d;
    }
    let mut dv = vec![T::zero(); v.len()];
    mat_vec_acc(&p.w, dlogits, &mut dv);
    dv
}
