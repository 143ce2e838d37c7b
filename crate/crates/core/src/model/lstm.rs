//! One LSTM direction over a sequence of row inputs, with BPTT.
//!
//! ```text
//! z = x·W_x + h_{t-1}·W_h + b        (gates i, f, g, o along the columns)
//! c_t = σ(f)·c_{t-1} + σ(i)·tanh(g)
//! h_t = σ(o)·tanh(c_t)
//! ```

use crate::numkernel::{mat_vec_acc, outer_acc, sigmoid, vec_mat_acc, Matrix};
use crate::scalar::Scalar;

use super::params::LstmParams;

/// Activations of one direction over `len` steps, stored in step order.
#[derive(Clone, Debug)]
pub struct LstmTrace<T> {
    pub reverse: bool,
    pub len: usize,
    /// Post-activation gates, `len × 4d`.
    gates: Vec<T>,
    /// Cell states, `len × d`.
    cells: Vec<T>,
    /// Hidden states, `len × d`.
    hidden: Vec<T>,
}

impl<T: Scalar> LstmTrace<T> {
    /// Position in the input that step `s` reads.
    fn position(&self, s: usize) -> usize {
        if self.reverse {
            self.len - 1 - s
        } else {
            s
        }
    }

    /// Hidden state at input position `p`.
    pub fn hidden_at(&self, p: usize, d: usize) -> &[T] {
        let s = if self.reverse { self.len - 1 - p } else { p };
        &self.hidden[s * d..(s + 1) * d]
    }
}

/// Runs over input rows `0..len` (backwards when `reverse`).
/// `input(p)` returns the row at position `p`.
pub fn lstm_forward<'a, T: Scalar>(
    p: &LstmParams<T>,
    len: usize,
    reverse: bool,
    input: impl Fn(usize) -> &'a [T],
) -> LstmTrace<T> {
    let d = p.hidden();
    let mut trace = LstmTrace {
        reverse,
        len,
        gates: vec![T::zero(); len * 4 * d],
        cells: vec![T::zero(); len * d],
        hidden: vec![T::zero(); len * d],
    };
    let mut z = vec![T::zero(); 4 * d];
    for s in 0..len {
        z.copy_from_slice(p.b.data());
        vec_mat_acc(input(trace.position(s)), &p.w_x, &mut z);
        if s > 0 {
            let (prev, _) = trace.hidden.split_at(s * d);
            vec_mat_acc(&prev[(s - 1) * d..], &p.w_h, &mut z);
        }
        let gates = &mut trace.gates[s * 4 * d..(s + 1) * 4 * d];
        for j in 0..d {
            gates[j] = sigmoid(z[j]);
            gates[d + j] = sigmoid(z[d + j]);
            gates[2 * d + j] = z[2 * d + j].tanh();
            gates[3 * d + j] = sigmoid(z[3 * d + j]);
        }
        for j in 0..d {
            let c_prev = if s > 0 { trace.cells[(s - 1) * d + j] } else { T::zero() };
            let c = gates[d + j] * c_prev + gates[j] * gates[2 * d + j];
            trace.cells[s * d + j] = c;
            trace.hidden[s * d + j] = gates[3 * d + j] * c.tanh();
        }
    }
    trace
}

/// Backpropagates `dh(p)` (loss gradient w.r.t. the hidden state at input
/// position `p`) through the trace. Parameter gradients accumulate into
/// `grad`; input gradients are added through `dx(p, row)`.
pub fn lstm_backward<'a, T: Scalar>(
    p: &LstmParams<T>,
    trace: &LstmTrace<T>,
    input: impl Fn(usize) -> &'a [T],
    dh: impl Fn(usize) -> &'a [T],
    grad: &mut LstmParams<T>,
    mut dx: Option<&mut dyn FnMut(usize, &[T])>,
) {
    let d = p.hidden();
    let mut dh_next = vec![T::zero(); d];
    let mut dc_next = vec![T::zero(); d];
    let mut dz = vec![T::zero(); 4 * d];
    let mut dx_row = vec![T::zero(); p.input()];
    let one = T::one();
    for s in (0..trace.len).rev() {
        let pos = trace.position(s);
        let gates = &trace.gates[s * 4 * d..(s + 1) * 4 * d];
        let ext = dh(pos);
        for j in 0..d {
            let (i, f, g, o) = (gates[j], gates[d + j], gates[2 * d + j], gates[3 * d + j]);
            let c = trace.cells[s * d + j];
            let c_prev = if s > 0 { trace.cells[(s - 1) * d + j] } else { T::zero() };
            let tc = c.tanh();
            let dh_j = ext[j] + dh_next[j];
            let dc = dc_next[j] + dh_j * o * (one - tc * tc);
            dz[j] = dc * g * i * (one - i);
            dz[d + j] = dc * c_prev * f * (one - f);
            dz[2 * d + j] = dc * i * (one - g * g);
            dz[3 * d + j] = dh_j * tc * o * (one - o);
            dc_next[j] = dc * f;
        }
        let x = input(pos);
        outer_acc(&mut grad.w_x, x, &dz);
        for (gb, &v) in grad.b.data_mut().iter_mut().zip(&dz) {
            *gb += v;
        }
        dh_next.fill(T::zero());
        if s > 0 {
            outer_acc(&mut grad.w_h, &trace.hidden[(s - 1) * d..s * d], &dz);
            mat_vec_acc(&p.w_h, &dz, &mut dh_next);
        }
        if let Some(sink) = dx.as_deref_mut() {
            dx_row.fill(T::zero());
            mat_vec_acc(&p.w_x, &dz, &mut dx_row);
            sink(pos, &dx_row);
        }
    }
}

/// Per-position concatenation `[→h; ←h]` of two traces, `len × 2d`.
pub fn bilstm_states<T: Scalar>(
    fwd: &LstmTrace<T>,
    bwd: &LstmTrace<T>,
    d: usize,
) -> Matrix<T> {
    let len = fwd.len;
    Matrix::from_fn(len, 2 * d, |p, j| {
        if j < d {
            fwd.hidden_at(p, d)[j]
        } else {
            bwd.hidden_at(p, d)[j - d]
        }
    })
}
