//! Valid 1-d convolutions over the rows of a sentence matrix, followed by
//! temporal max-pooling.

use crate::numkernel::{mat_vec_acc, outer_acc, vec_mat_acc, Matrix};
use crate::scalar::Scalar;

use super::params::{ConvBank, ConvLayer};

/// Activations of one bank: the input to every layer and its relu output.
#[derive(Clone, Debug)]
pub struct ConvTrace<T> {
    /// `outputs[l]` is the relu output of layer `l`, `(len_l) × k`.
    pub outputs: Vec<Matrix<T>>,
    /// Row of the last layer's output that won the max for each filter.
    pub argmax: Vec<usize>,
}

/// `relu(window_j · W + b)` for every window of `width` consecutive rows.
/// Windows are contiguous in row-major storage.
pub fn conv_forward<T: Scalar>(layer: &ConvLayer<T>, width: usize, x: &Matrix<T>) -> Matrix<T> {
    let c = x.cols();
    let k = layer.w.cols();
    let n = x.rows() + 1 - width;
    let mut out = Matrix::zeros(n, k);
    for j in 0..n {
        let row = out.row_mut(j);
        row.copy_from_slice(layer.b.data());
        vec_mat_acc(&x.data()[j * c..(j + width) * c], &layer.w, row);
        row.iter_mut().for_each(|v| *v = v.max(T::zero()));
    }
    out
}

/// Runs every layer of a bank over `x` and max-pools the last output.
/// Returns the pooled `k`-vector.
pub fn bank_forward<T: Scalar>(bank: &ConvBank<T>, x: &Matrix<T>) -> (Vec<T>, ConvTrace<T>) {
    let mut outputs: Vec<Matrix<T>> = Vec::with_capacity(bank.layers.len());
    for layer in &bank.layers {
        let input = outputs.last().unwrap_or(x);
        outputs.push(conv_forward(layer, bank.width, input));
    }
    let (pooled, argmax) = outputs.last().expect("bank has layers").colmax_with_index();
    (pooled, ConvTrace { outputs, argmax })
}

/// Backward through pooling and every layer. `dpooled` is the gradient of
/// the pooled vector; returns the gradient w.r.t. `x`.
pub fn bank_backward<T: Scalar>(
    bank: &ConvBank<T>,
    x: &Matrix<T>,
    trace: &ConvTrace<T>,
    dpooled: &[T],
    grad: &mut ConvBank<T>,
) -> Matrix<T> {
    let last = trace.outputs.last().expect("bank has layers");
    let mut dy = last.zeros_like();
    for (f, (&row, &g)) in trace.argmax.iter().zip(dpooled).enumerate() {
        dy.set(row, f, g);
    }
    let r = bank.width;
    for l in (0..bank.layers.len()).rev() {
        let input = if l == 0 { x } else { &trace.outputs[l - 1] };
        let out = &trace.outputs[l];
        let c = input.cols();
        let mut dx = input.zeros_like();
        let (layer, glayer) = (&bank.layers[l], &mut grad.layers[l]);
        for j in 0..out.rows() {
            let mut dz: Vec<T> = dy.row(j).to_vec();
            for (g, &o) in dz.iter_mut().zip(out.row(j)) {
                if o <= T::zero() {
                    *g = T::zero();
                }
            }
            if dz.iter().all(|&v| v == T::zero()) {
                continue;
            }
            outer_acc(&mut glayer.w, &input.data()[j * c..(j + r) * c], &dz);
            for (gb, &v) in glayer.b.data_mut().iter_mut().zip(&dz) {
                *gb += v;
            }
            mat_vec_acc(&layer.w, &dz, &mut dx.data_mut()[j * c..(j + r) * c]);
        }
        dy = dx;
    }
    dy
}
