//! Vectorization, Kronecker and block helpers.
//!
//! Two stacking conventions coexist: `vec_t` concatenates rows (it is
//! `vec(X^T)`), `vec` concatenates columns. Quadratic forms in the lifted
//! relaxations act on `vec_t` unless a problem says otherwise.

use nalgebra::DMatrix;

use super::dense::DenseMatrix;
use crate::error::{dim_err, Result};

/// Rows of `x` concatenated; equals `vec(x^T)`.
pub fn vec_t(x: &DMatrix<f64>) -> Vec<f64> {
    let (n, m) = x.shape();
    let mut out = Vec::with_capacity(n * m);
    for i in 0..n {
        for j in 0..m {
            out.push(x[(i, j)]);
        }
    }
    out
}

/// Columns of `x` concatenated.
pub fn vec(x: &DMatrix<f64>) -> Vec<f64> {
    x.as_slice().to_vec()
}

/// Inverse of [`vec_t`].
pub fn unvec_t(v: &[f64], n: usize, m: usize) -> Result<DMatrix<f64>> {
    if v.len() != n * m {
        return Err(dim_err(format!("vector of length {} is not {n}x{m}", v.len())));
    }
    Ok(DMatrix::from_row_slice(n, m, v))
}

/// Inverse of [`vec`].
pub fn unvec(v: &[f64], n: usize, m: usize) -> Result<DMatrix<f64>> {
    if v.len() != n * m {
        return Err(dim_err(format!("vector of length {} is not {n}x{m}", v.len())));
    }
    Ok(DMatrix::from_column_slice(n, m, v))
}

/// Position in `vec(Y^T)` of the coordinate stored at `p` in `vec(Y)`,
/// for an `n x n` matrix `Y`. This is the permutation behind `K_{n,n}`.
#[inline]
pub fn commutation_index(n: usize, p: usize) -> usize {
    let (j, i) = (p / n, p % n);
    i * n + j
}

/// The `n^2 x n^2` commutation matrix `K` with `K vec(Y) = vec(Y^T)`.
pub fn commutation_matrix(n: usize) -> DenseMatrix {
    let nn = n * n;
    let mut k = DMatrix::zeros(nn, nn);
    for p in 0..nn {
        k[(p, commutation_index(n, p))] = 1.0;
    }
    DenseMatrix::from(k)
}

/// `I_m ⊗ s`: block diagonal with `m` copies of `s`.
pub fn kron_identity_left(m: usize, s: &DMatrix<f64>) -> DenseMatrix {
    let (r, c) = s.shape();
    let mut out = DMatrix::zeros(m * r, m * c);
    for b in 0..m {
        out.view_mut((b * r, b * c), (r, c)).copy_from(s);
    }
    DenseMatrix::from(out)
}

/// A matrix viewed as a grid of equally sized blocks; `block(i, j)` is the
/// `(i, j)` block `W^{(i,j)}`.
#[derive(Clone, Copy, Debug)]
pub struct BlockView<'a> {
    base: &'a DMatrix<f64>,
    block_rows: usize,
    block_cols: usize,
    block_height: usize,
    block_width: usize,
}

impl<'a> BlockView<'a> {
    pub fn new(
        base: &'a DMatrix<f64>,
        block_rows: usize,
        block_cols: usize,
        block_height: usize,
        block_width: usize,
    ) -> Result<Self> {
        if block_rows * block_height != base.nrows() || block_cols * block_width != base.ncols() {
            return Err(dim_err(format!(
                "{block_rows}x{block_cols} grid of {block_height}x{block_width} blocks does not tile a {}x{} matrix",
                base.nrows(),
                base.ncols()
            )));
        }
        Ok(BlockView {
            base,
            block_rows,
            block_cols,
            block_height,
            block_width,
        })
    }

    /// Square grid of square blocks of side `side`.
    pub fn square(base: &'a DMatrix<f64>, side: usize) -> Result<Self> {
        if side == 0 || base.nrows() % side != 0 || base.ncols() % side != 0 {
            return Err(dim_err(format!(
                "block side {side} does not divide a {}x{} matrix",
                base.nrows(),
                base.ncols()
            )));
        }
        Self::new(base, base.nrows() / side, base.ncols() / side, side, side)
    }

    pub fn block_rows(&self) -> usize {
        self.block_rows
    }

    pub fn block_cols(&self) -> usize {
        self.block_cols
    }

    pub fn block(&self, i: usize, j: usize) -> DMatrix<f64> {
        self.base
            .view(
                (i * self.block_height, j * self.block_width),
                (self.block_height, self.block_width),
            )
            .into_owned()
    }
}

/// `Σ_i W^{(i,i)}` over the diagonal blocks of a block view.
pub fn block_diag_sum(w: &BlockView<'_>) -> Result<DMatrix<f64>> {
    if w.block_height != w.block_width || w.block_rows != w.block_cols {
        return Err(dim_err(
            "block trace needs a square grid of square blocks".to_string(),
        ));
    }
    let mut acc = DMatrix::zeros(w.block_height, w.block_width);
    for i in 0..w.block_rows {
        acc += w.block(i, i);
    }
    Ok(acc)
}
