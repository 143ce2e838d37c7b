//! Slice-level primitives used by the hand-written forward and backward passes.

use crate::scalar::Scalar;

use super::Matrix;

#[inline]
pub fn sigmoid<T: Scalar>(x: T) -> T {
    // split by sign so exp never overflows
    if x >= T::zero() {
        T::one() / (T::one() + (-x).exp())
    } else {
        let e = x.exp();
        e / (T::one() + e)
    }
}

#[inline]
pub fn tanh<T: Scalar>(x: T) -> T {
    x.tanh()
}

#[inline]
pub fn relu<T: Scalar>(x: T) -> T {
    x.max(T::zero())
}

pub fn relu_in_place<T: Scalar>(v: &mut [T]) {
    v.iter_mut().for_each(|x| *x = relu(*x));
}

/// Numerically stable softmax (max subtracted before exponentiation).
pub fn softmax<T: Scalar>(v: &[T]) -> Vec<T> {
    if v.is_empty() {
        return Vec::new();
    }
    let max = v.iter().copied().fold(T::neg_infinity(), T::max);
    let mut out: Vec<T> = v.iter().map(|&x| (x - max).exp()).collect();
    let sum: T = out.iter().copied().sum();
    out.iter_mut().for_each(|x| *x /= sum);
    out
}

/// `log(softmax(v))` without forming the probabilities.
pub fn log_softmax<T: Scalar>(v: &[T]) -> Vec<T> {
    let max = v.iter().copied().fold(T::neg_infinity(), T::max);
    let lse = v.iter().map(|&x| (x - max).exp()).sum::<T>().ln() + max;
    v.iter().map(|&x| x - lse).collect()
}

#[inline]
pub fn dot<T: Scalar>(a: &[T], b: &[T]) -> T {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).fold(T::zero(), |acc, (&x, &y)| acc + x * y)
}

/// `y += alpha * x`
#[inline]
pub fn axpy<T: Scalar>(alpha: T, x: &[T], y: &mut [T]) {
    debug_assert_eq!(x.len(), y.len());
    for (yi, &xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}

/// Row vector times matrix: `x · m`.
pub fn vec_mat<T: Scalar>(x: &[T], m: &Matrix<T>) -> Vec<T> {
    let mut out = vec![T::zero(); m.cols()];
    vec_mat_acc(x, m, &mut out);
    out
}

/// `out += x · m`
pub fn vec_mat_acc<T: Scalar>(x: &[T], m: &Matrix<T>, out: &mut [T]) {
    debug_assert_eq!(x.len(), m.rows());
    debug_assert_eq!(out.len(), m.cols());
    for (k, &xk) in x.iter().enumerate() {
        if xk != T::zero() {
            axpy(xk, m.row(k), out);
        }
    }
}

/// `out += m · y` (backpropagates a row-vector product through `m`).
pub fn mat_vec_acc<T: Scalar>(m: &Matrix<T>, y: &[T], out: &mut [T]) {
    debug_assert_eq!(y.len(), m.cols());
    debug_assert_eq!(out.len(), m.rows());
    for (k, o) in out.iter_mut().enumerate() {
        *o += dot(m.row(k), y);
    }
}

/// `grad += xᵀ · dy` for a single row `x`.
pub fn outer_acc<T: Scalar>(grad: &mut Matrix<T>, x: &[T], dy: &[T]) {
    debug_assert_eq!(grad.rows(), x.len());
    debug_assert_eq!(grad.cols(), dy.len());
    for (k, &xk) in x.iter().enumerate() {
        if xk != T::zero() {
            axpy(xk, dy, grad.row_mut(k));
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn softmax_of_zeros_is_uniform() {
        let p = softmax(&[0.0f64; 14]);
        for x in p {
            assert!((x - 1.0 / 14.0).abs() < 1e-15);
        }
    }

    #[test]
    fn softmax_survives_large_logits() {
        let p = softmax(&[1000.0f64, 0.0]);
        assert!((p[0] - 1.0).abs() < 1e-12);
        assert!((0.0..1e-300).contains(&p[1]));
        assert!(p.iter().all(|x| x.is_finite()));
    }

    #[test]
    fn sigmoid_is_stable_at_extremes() {
        assert_eq!(sigmoid(-1000.0f64), 0.0);
        assert_eq!(sigmoid(1000.0f64), 1.0);
        assert!((sigmoid(0.0f32) - 0.5).abs() < 1e-7);
    }

    #[test]
    fn log_softmax_matches_log_of_softmax() {
        let v = [0.3, -1.2, 2.5, 0.0];
        let a = log_softmax(&v);
        let b: Vec<f64> = softmax(&v).into_iter().map(f64::ln).collect();
        for (x, y) in a.iter().zip(&b) {
            assert!((x - y).abs() < 1e-12);
        }
    }

    #[test]
    fn vec_mat_and_transposed_product_agree() {
        let m = Matrix::from_fn(3, 2, |i, j| (i as f64) - 2.0 * j as f64);
        let x = [1.0, 2.0, -1.0];
        assert_eq!(vec_mat(&x, &m), m.transpose().matmul(&Matrix::new(3, 1, x.to_vec()).unwrap()).unwrap().into_data());
        let mut back = vec![0.0; 3];
        mat_vec_acc(&m, &[1.0, 1.0], &mut back);
        assert_eq!(back, vec![-2.0, 0.0, 2.0]);
    }

    proptest! {
        #[test]
        fn softmax_is_shift_invariant(v in prop::collection::vec(-50.0f64..50.0, 1..20), c in -100.0f64..100.0) {
            let a = softmax(&v);
            let shifted: Vec<f64> = v.iter().map(|x| x + c).collect();
            let b = softmax(&shifted);
            for (x, y) in a.iter().zip(&b) {
                prop_assert!((x - y).abs() < 1e-12);
            }
        }

        #[test]
        fn softmax_sums_to_one(v in prop::collection::vec(-1000.0f64..1000.0, 1..40)) {
            let p = softmax(&v);
            prop_assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-6);
            prop_assert!(p.iter().all(|x| *x >= 0.0));
        }
    }
}
