use std::fmt;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// Symmetric matrix stored as its packed lower triangle, so that entry
/// `(i, j)` and `(j, i)` are literally the same stored value.
#[derive(Clone, PartialEq)]
pub struct SymMatrix {
    dim: usize,
    packed: Vec<f64>,
}

#[inline]
fn packed_index(i: usize, j: usize) -> usize {
    let (hi, lo) = if i >= j { (i, j) } else { (j, i) };
    hi * (hi + 1) / 2 + lo
}

impl SymMatrix {
    pub fn zeros(dim: usize) -> Self {
        SymMatrix {
            dim,
            packed: vec![0.0; dim * (dim + 1) / 2],
        }
    }

    pub fn identity(dim: usize) -> Self {
        Self::from_fn(dim, |i, j| if i == j { 1.0 } else { 0.0 })
    }

    /// `f` is evaluated on the lower triangle only (`i >= j`).
    pub fn from_fn(dim: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut packed = Vec::with_capacity(dim * (dim + 1) / 2);
        for i in 0..dim {
            for j in 0..=i {
                packed.push(f(i, j));
            }
        }
        SymMatrix { dim, packed }
    }

    pub fn diagonal(values: &[f64]) -> Self {
        Self::from_fn(values.len(), |i, j| if i == j { values[i] } else { 0.0 })
    }

    /// Accepts a square matrix whose entries are symmetric up to `tol`
    /// (relative to its largest entry); the two triangles are averaged.
    pub fn from_dense(m: &DMatrix<f64>, tol: f64) -> Result<Self> {
        if m.nrows() != m.ncols() {
            return Err(Error::DimensionMismatch(format!(
                "symmetric matrix must be square, got {}x{}",
                m.nrows(),
                m.ncols()
            )));
        }
        let scale = 1.0 + m.amax();
        for i in 0..m.nrows() {
            for j in 0..i {
                if !m[(i, j)].is_finite() {
                    return Err(Error::NonFinite { row: i, col: j });
                }
                if (m[(i, j)] - m[(j, i)]).abs() > tol * scale {
                    return Err(Error::InvalidArgument(format!(
                        "matrix is not symmetric at ({i}, {j})"
                    )));
                }
            }
        }
        Ok(Self::from_dense_symmetrized(m))
    }

    /// Averages the two triangles without checking.
    pub fn from_dense_symmetrized(m: &DMatrix<f64>) -> Self {
        Self::from_fn(m.nrows(), |i, j| 0.5 * (m[(i, j)] + m[(j, i)]))
    }

    pub fn from_packed(dim: usize, packed: Vec<f64>) -> Result<Self> {
        if packed.len() != dim * (dim + 1) / 2 {
            return Err(Error::DimensionMismatch(format!(
                "packed length {} does not match dimension {dim}",
                packed.len()
            )));
        }
        Ok(SymMatrix { dim, packed })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.packed[packed_index(i, j)]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.packed[packed_index(i, j)] = v;
    }

    #[inline]
    pub fn add_to(&mut self, i: usize, j: usize, v: f64) {
        self.packed[packed_index(i, j)] += v;
    }

    pub fn packed(&self) -> &[f64] {
        &self.packed
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        DMatrix::from_fn(self.dim, self.dim, |i, j| self.get(i, j))
    }

    pub fn trace(&self) -> f64 {
        (0..self.dim).map(|i| self.get(i, i)).sum()
    }

    /// Trace inner product with another symmetric matrix.
    pub fn dot(&self, other: &SymMatrix) -> f64 {
        assert_eq!(self.dim, other.dim);
        let mut acc = 0.0;
        for i in 0..self.dim {
            for j in 0..=i {
                let w = if i == j { 1.0 } else { 2.0 };
                acc += w * self.get(i, j) * other.get(i, j);
            }
        }
        acc
    }

    pub fn dot_dense(&self, other: &DMatrix<f64>) -> f64 {
        let mut acc = 0.0;
        for j in 0..self.dim {
            for i in 0..self.dim {
                acc += self.get(i, j) * other[(i, j)];
            }
        }
        acc
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.dot(self).sqrt()
    }

    pub fn mul_vec(&self, v: &DVector<f64>) -> DVector<f64> {
        DVector::from_fn(self.dim, |i, _| {
            (0..self.dim).map(|j| self.get(i, j) * v[j]).sum()
        })
    }

    /// Quadratic form `v^T M v`.
    pub fn quad_form(&self, v: &[f64]) -> f64 {
        let mut acc = 0.0;
        for i in 0..self.dim {
            acc += self.get(i, i) * v[i] * v[i];
            for j in 0..i {
                acc += 2.0 * self.get(i, j) * v[i] * v[j];
            }
        }
        acc
    }

    pub fn scaled(&self, alpha: f64) -> SymMatrix {
        SymMatrix {
            dim: self.dim,
            packed: self.packed.iter().map(|v| alpha * v).collect(),
        }
    }

    pub fn max_abs_diff(&self, other: &SymMatrix) -> f64 {
        self.packed
            .iter()
            .zip(&other.packed)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }
}

impl fmt::Debug for SymMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "SymMatrix{}{:?}", self.dim, self.to_dense())
    }
}
