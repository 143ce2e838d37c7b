use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Central-difference estimate of `∇f(θ)`:
/// `(f(θ + ε eᵢ) − f(θ − ε eᵢ)) / 2ε` for every coordinate.
///
/// `f` must be deterministic. At 64-bit precision `eps` should lie in
/// `[1e-6, 1e-4]`.
pub fn finite_difference_gradient<T, F>(mut f: F, theta: &[T], eps: T) -> Result<Vec<T>>
where
    T: Scalar,
    F: FnMut(&[T]) -> T,
{
    let mut probe = theta.to_vec();
    let two_eps = eps + eps;
    let mut grad = Vec::with_capacity(theta.len());
    for i in 0..theta.len() {
        let orig = probe[i];
        probe[i] = orig + eps;
        let plus = f(&probe);
        probe[i] = orig - eps;
        let minus = f(&probe);
        probe[i] = orig;
        if !plus.is_finite() || !minus.is_finite() {
            return Err(Error::NonFiniteLoss);
        }
        grad.push((plus - minus) / two_eps);
    }
    Ok(grad)
}

/// `|a − b| / max(|a|, |b|, 1e-8)`
pub fn relative_error(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(1e-8)
}

pub fn max_relative_error(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(&x, &y)| relative_error(x, y))
        .fold(0.0, f64::max)
}
