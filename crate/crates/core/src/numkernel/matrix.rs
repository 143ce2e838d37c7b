use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Dense row-major matrix.
#[derive(Clone, PartialEq, Serialize, Deserialize)]
pub struct Matrix<T> {
    rows: usize,
    cols: usize,
    data: Vec<T>,
}

impl<T: Scalar> Matrix<T> {
    pub fn new(rows: usize, cols: usize, data: Vec<T>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::ShapeMismatch {
                left: (rows, cols),
                right: (data.len(), 1),
            });
        }
        Ok(Self { rows, cols, data })
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![T::zero(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        Self::from_fn(n, n, |i, j| if i == j { T::one() } else { T::zero() })
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> T) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Self { rows, cols, data }
    }

    /// Builds a matrix from equally long rows.
    pub fn from_rows(rows: &[Vec<T>]) -> Result<Self> {
        let cols = rows.first().map_or(0, Vec::len);
        let mut data = Vec::with_capacity(rows.len() * cols);
        for r in rows {
            if r.len() != cols {
                return Err(Error::ShapeMismatch {
                    left: (1, cols),
                    right: (1, r.len()),
                });
            }
            data.extend_from_slice(r);
        }
        Ok(Self {
            rows: rows.len(),
            cols,
            data,
        })
    }

    /// A single-row matrix.
    pub fn row_vector(v: Vec<T>) -> Self {
        Self {
            rows: 1,
            cols: v.len(),
            data: v,
        }
    }

    pub fn zeros_like(&self) -> Self {
        Self::zeros(self.rows, self.cols)
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.data.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    #[inline]
    pub fn data(&self) -> &[T] {
        &self.data
    }

    #[inline]
    pub fn data_mut(&mut self) -> &mut [T] {
        &mut self.data
    }

    pub fn into_data(self) -> Vec<T> {
        self.data
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> T {
        self.data[i * self.cols + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: T) {
        self.data[i * self.cols + j] = v;
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[T] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    #[inline]
    pub fn row_mut(&mut self, i: usize) -> &mut [T] {
        &mut self.data[i * self.cols..(i + 1) * self.cols]
    }

    /// Contiguous block of rows `start..end`, row-major.
    #[inline]
    pub fn rows_slice(&self, start: usize, end: usize) -> &[T] {
        &self.data[start * self.cols..end * self.cols]
    }

    pub fn fill(&mut self, v: T) {
        self.data.iter_mut().for_each(|x| *x = v);
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self.get(j, i))
    }

    pub fn map(&self, f: impl Fn(T) -> T) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|&x| f(x)).collect(),
        }
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|x| x.is_finite())
    }

    pub fn cast<U: Scalar>(&self) -> Matrix<U> {
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|x| U::of(x.as_f64())).collect(),
        }
    }

    fn check_same_shape(&self, other: &Self) -> Result<()> {
        if self.shape() != other.shape() {
            return Err(Error::ShapeMismatch {
                left: self.shape(),
                right: other.shape(),
            });
        }
        Ok(())
    }

    /// `self · other`.
    pub fn matmul(&self, other: &Self) -> Result<Self> {
        if self.cols != other.rows {
            return Err(Error::ShapeMismatch {
                left: self.shape(),
                right: other.shape(),
            });
        }
        let mut out = Self::zeros(self.rows, other.cols);
        let n = other.cols;
        for i in 0..self.rows {
            let a_row = self.row(i);
            let o_row = &mut out.data[i * n..(i + 1) * n];
            for (k, &a) in a_row.iter().enumerate() {
                if a == T::zero() {
                    continue;
                }
                let b_row = &other.data[k * n..(k + 1) * n];
                for (o, &b) in o_row.iter_mut().zip(b_row) {
                    *o += a * b;
                }
            }
        }
        Ok(out)
    }

    /// Adds `bias` to every row.
    pub fn add_bias(&self, bias: &[T]) -> Result<Self> {
        if bias.len() != self.cols {
            return Err(Error::ShapeMismatch {
                left: self.shape(),
                right: (1, bias.len()),
            });
        }
        let mut out = self.clone();
        for i in 0..out.rows {
            for (x, &b) in out.row_mut(i).iter_mut().zip(bias) {
                *x += b;
            }
        }
        Ok(out)
    }

    pub fn add_assign(&mut self, other: &Self) -> Result<()> {
        self.check_same_shape(other)?;
        for (a, &b) in self.data.iter_mut().zip(&other.data) {
            *a += b;
        }
        Ok(())
    }

    pub fn scale(&mut self, s: T) {
        self.data.iter_mut().for_each(|x| *x *= s);
    }

    pub fn relu(&self) -> Self {
        self.map(|x| x.max(T::zero()))
    }

    pub fn tanh(&self) -> Self {
        self.map(T::tanh)
    }

    pub fn sigmoid(&self) -> Self {
        self.map(super::ops::sigmoid)
    }

    /// Maximum of each row, as a `rows × 1` column.
    pub fn rowmax(&self) -> Self {
        let data = (0..self.rows)
            .map(|i| {
                self.row(i)
                    .iter()
                    .copied()
                    .fold(T::neg_infinity(), T::max)
            })
            .collect();
        Self {
            rows: self.rows,
            cols: 1,
            data,
        }
    }

    /// Maximum of each column and the first row index attaining it.
    pub fn colmax_with_index(&self) -> (Vec<T>, Vec<usize>) {
        let mut best = vec![T::neg_infinity(); self.cols];
        let mut arg = vec![0; self.cols];
        for i in 0..self.rows {
            for (j, &v) in self.row(i).iter().enumerate() {
                if v > best[j] {
                    best[j] = v;
                    arg[j] = i;
                }
            }
        }
        (best, arg)
    }

    /// Horizontal concatenation of equally tall matrices.
    pub fn concat(parts: &[&Self]) -> Result<Self> {
        let rows = parts.first().map_or(0, |m| m.rows);
        if let Some(bad) = parts.iter().find(|m| m.rows != rows) {
            return Err(Error::ShapeMismatch {
                left: (rows, 0),
                right: bad.shape(),
            });
        }
        let cols = parts.iter().map(|m| m.cols).sum();
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for m in parts {
                data.extend_from_slice(m.row(i));
            }
        }
        Ok(Self { rows, cols, data })
    }

    /// Inverse of [`Matrix::concat`]: splits columns into blocks of the given widths.
    pub fn split_cols(&self, widths: &[usize]) -> Result<Vec<Self>> {
        if widths.iter().sum::<usize>() != self.cols {
            return Err(Error::ShapeMismatch {
                left: self.shape(),
                right: (self.rows, widths.iter().sum()),
            });
        }
        let mut out: Vec<Self> = widths.iter().map(|&w| Self::zeros(self.rows, w)).collect();
        for i in 0..self.rows {
            let mut offset = 0;
            for (m, &w) in out.iter_mut().zip(widths) {
                m.row_mut(i).copy_from_slice(&self.row(i)[offset..offset + w]);
                offset += w;
            }
        }
        Ok(out)
    }
}

impl<T: fmt::Debug> fmt::Debug for Matrix<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "Matrix {}x{} [", self.rows, self.cols)?;
        for i in 0..self.rows.min(8) {
            writeln!(f, "  {:?}", &self.data[i * self.cols..(i + 1) * self.cols])?;
        }
        if self.rows > 8 {
            writeln!(f, "  ...")?;
        }
        write!(f, "]")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_matmul_is_identity() {
        let b = Matrix::from_fn(3, 4, |i, j| (i * 4 + j) as f64 - 5.0);
        assert_eq!(Matrix::identity(3).matmul(&b).unwrap(), b);
        assert_eq!(b.matmul(&Matrix::identity(4)).unwrap(), b);
    }

    #[test]
    fn matmul_small() {
        let a = Matrix::new(2, 2, vec![1.0, 2.0, 3.0, 4.0]).unwrap();
        let b = Matrix::new(2, 1, vec![5.0, 6.0]).unwrap();
        assert_eq!(a.matmul(&b).unwrap().data(), &[17.0, 39.0]);
    }

    #[test]
    fn matmul_shape_mismatch_names_both_shapes() {
        let a = Matrix::<f64>::zeros(2, 3);
        let b = Matrix::<f64>::zeros(2, 3);
        match a.matmul(&b) {
            Err(Error::ShapeMismatch { left, right }) => {
                assert_eq!(left, (2, 3));
                assert_eq!(right, (2, 3));
            }
            other => panic!("expected ShapeMismatch, got {other:?}"),
        }
    }

    #[test]
    fn relu_clamps_negatives() {
        let m = Matrix::row_vector(vec![-1.0, 0.0, 2.0]);
        assert_eq!(m.relu().data(), &[0.0, 0.0, 2.0]);
    }

    #[test]
    fn rowmax_single_column_is_identity() {
        let m = Matrix::new(3, 1, vec![4.0, -2.0, 7.5]).unwrap();
        assert_eq!(m.rowmax(), m);
    }

    #[test]
    fn add_bias_broadcasts() {
        let m = Matrix::<f32>::zeros(2, 2).add_bias(&[1.0, 2.0]).unwrap();
        assert_eq!(m.data(), &[1.0, 2.0, 1.0, 2.0]);
        assert!(Matrix::<f32>::zeros(2, 2).add_bias(&[1.0]).is_err());
    }

    #[test]
    fn colmax_reports_first_argmax() {
        let m = Matrix::new(3, 2, vec![1.0, 5.0, 3.0, 5.0, 2.0, 0.0]).unwrap();
        let (v, i) = m.colmax_with_index();
        assert_eq!(v, vec![3.0, 5.0]);
        assert_eq!(i, vec![1, 0]);
    }

    #[test]
    fn concat_then_split_round_trips() {
        let a = Matrix::from_fn(2, 2, |i, j| (i + j) as f32);
        let b = Matrix::from_fn(2, 3, |i, j| (i * j) as f32 + 0.5);
        let c = Matrix::concat(&[&a, &b]).unwrap();
        assert_eq!(c.shape(), (2, 5));
        let parts = c.split_cols(&[2, 3]).unwrap();
        assert_eq!(parts[0], a);
        assert_eq!(parts[1], b);
    }
}
