//! Scaled symmetric vectorization.
//!
//! Lower triangle, column by column, off-diagonal entries multiplied by
//! `sqrt(2)` so that `<M, N> = svec(M) . svec(N)`.

use std::f64::consts::SQRT_2;

use nalgebra::DMatrix;

use crate::error::{dim_err, Result};
use crate::linalg::SymMatrix;

#[inline]
pub fn svec_len(side: usize) -> usize {
    side * (side + 1) / 2
}

/// Position of entry `(i, j)` inside the svec of a `side x side` matrix.
#[inline]
pub fn svec_index(side: usize, i: usize, j: usize) -> usize {
    let (r, c) = if i >= j { (i, j) } else { (j, i) };
    // entries in columns before c, then the offset inside column c
    c * (2 * side + 1 - c) / 2 + (r - c)
}

/// Inverse of [`svec_index`].
pub fn svec_position(side: usize, k: usize) -> (usize, usize) {
    let mut c = 0;
    let mut start = 0;
    while start + (side - c) <= k {
        start += side - c;
        c += 1;
    }
    (c + (k - start), c)
}

/// Side length for a packed length, if it is triangular.
pub fn side_for_len(len: usize) -> Option<usize> {
    let side = ((((8 * len + 1) as f64).sqrt() - 1.0) / 2.0).round() as usize;
    (svec_len(side) == len).then_some(side)
}

pub fn svec(m: &SymMatrix) -> Vec<f64> {
    let n = m.dim();
    let mut out = Vec::with_capacity(svec_len(n));
    for j in 0..n {
        out.push(m.get(j, j));
        for i in j + 1..n {
            out.push(SQRT_2 * m.get(i, j));
        }
    }
    out
}

pub fn smat(v: &[f64]) -> Result<SymMatrix> {
    let n = side_for_len(v.len())
        .ok_or_else(|| dim_err(format!("{} is not a triangular number", v.len())))?;
    let mut m = SymMatrix::zeros(n);
    let mut k = 0;
    for j in 0..n {
        m.set(j, j, v[k]);
        k += 1;
        for i in j + 1..n {
            m.set(i, j, v[k] / SQRT_2);
            k += 1;
        }
    }
    Ok(m)
}

/// Unpacks an svec slice into a full dense matrix (both triangles).
pub(crate) fn smat_into(v: &[f64], side: usize, out: &mut DMatrix<f64>) {
    let mut k = 0;
    for j in 0..side {
        out[(j, j)] = v[k];
        k += 1;
        for i in j + 1..side {
            let e = v[k] / SQRT_2;
            out[(i, j)] = e;
            out[(j, i)] = e;
            k += 1;
        }
    }
}

/// Packs the lower triangle of a dense symmetric matrix into svec form.
pub(crate) fn svec_from(m: &DMatrix<f64>, side: usize, out: &mut [f64]) {
    let mut k = 0;
    for j in 0..side {
        out[k] = m[(j, j)];
        k += 1;
        for i in j + 1..side {
            out[k] = SQRT_2 * m[(i, j)];
            k += 1;
        }
    }
}
