use nalgebra::{DMatrix, DVector, SymmetricEigen};

use super::dense::DenseMatrix;
use super::sym::SymMatrix;
use crate::error::{dim_err, Error, Result};

/// Singular values below this fraction of the largest are treated as zero
/// by [`pseudoinverse`].
pub const PINV_RELATIVE_CUTOFF: f64 = 1e-9;

/// Eigenpairs of a symmetric matrix, eigenvalues ascending.
#[derive(Clone, Debug)]
pub struct SymEigen {
    pub values: DVector<f64>,
    /// Orthonormal eigenvectors as columns, in the order of `values`.
    pub vectors: DMatrix<f64>,
}

impl SymEigen {
    pub fn reconstruct(&self) -> DMatrix<f64> {
        let scaled = &self.vectors * DMatrix::from_diagonal(&self.values);
        scaled * self.vectors.transpose()
    }
}

/// Symmetric eigendecomposition of a dense matrix assumed symmetric.
///
/// Householder tridiagonalization followed by implicit symmetric QR, with an
/// iteration budget of `100 * dim`. Deterministic for identical input.
pub fn eig_sym_dense(m: DMatrix<f64>) -> Result<SymEigen> {
    let dim = m.nrows();
    if dim == 0 {
        return Ok(SymEigen {
            values: DVector::zeros(0),
            vectors: DMatrix::zeros(0, 0),
        });
    }
    let budget = 100 * dim;
    let eig = SymmetricEigen::try_new(m, f64::EPSILON, budget)
        .ok_or(Error::EigenNoConvergence { dim, budget })?;
    let mut order: Vec<usize> = (0..dim).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values = DVector::from_fn(dim, |k, _| eig.eigenvalues[order[k]]);
    let vectors = DMatrix::from_fn(dim, dim, |i, k| eig.eigenvectors[(i, order[k])]);
    Ok(SymEigen { values, vectors })
}

pub fn eig_sym(m: &SymMatrix) -> Result<SymEigen> {
    eig_sym_dense(m.to_dense())
}

/// Frobenius-nearest PSD matrix, computed in place on a dense symmetric
/// matrix. Clips negative eigenvalues to zero.
pub fn psd_project_dense(m: &mut DMatrix<f64>) -> Result<()> {
    let dim = m.nrows();
    if dim == 0 {
        return Ok(());
    }
    if dim == 1 {
        m[(0, 0)] = m[(0, 0)].max(0.0);
        return Ok(());
    }
    let eig = eig_sym_dense(m.clone())?;
    let first_pos = eig.values.iter().position(|&l| l > 0.0).unwrap_or(dim);
    if first_pos == 0 {
        return Ok(());
    }
    m.fill(0.0);
    if first_pos == dim {
        return Ok(());
    }
    let kept = dim - first_pos;
    let v = eig.vectors.columns(first_pos, kept);
    let mut scaled = v.into_owned();
    for (c, mut col) in scaled.column_iter_mut().enumerate() {
        col *= eig.values[first_pos + c];
    }
    m.gemm(1.0, &scaled, &v.transpose(), 0.0);
    // Exact symmetry for downstream packing.
    for i in 0..dim {
        for j in 0..i {
            let a = 0.5 * (m[(i, j)] + m[(j, i)]);
            m[(i, j)] = a;
            m[(j, i)] = a;
        }
    }
    Ok(())
}

pub fn psd_project(m: &SymMatrix) -> Result<SymMatrix> {
    let mut d = m.to_dense();
    psd_project_dense(&mut d)?;
    Ok(SymMatrix::from_dense_symmetrized(&d))
}

/// Smallest eigenvalue of a symmetric matrix.
pub fn min_eigenvalue(m: &DMatrix<f64>) -> Result<f64> {
    if m.nrows() == 0 {
        return Ok(0.0);
    }
    let sym = 0.5 * (m + m.transpose());
    Ok(eig_sym_dense(sym)?.values[0])
}

/// Sweep cap for [`thin_svd`]; convergence is quadratic and takes well
/// under 20 sweeps at the sizes used here.
const JACOBI_SWEEPS: usize = 60;

/// Thin SVD `a = u diag(s) v^T`, `s` descending, by one-sided Jacobi
/// rotations on the columns.
///
/// Chosen over bidiagonal QR because it keeps full working precision when
/// singular values cluster. Columns of `u` belonging to zero singular
/// values are completed to an orthonormal set from the standard basis.
fn thin_svd(a: &DMatrix<f64>) -> (DMatrix<f64>, Vec<f64>, DMatrix<f64>) {
    let (n, m) = a.shape();
    if n < m {
        let (u, s, v) = thin_svd(&a.transpose());
        return (v, s, u);
    }
    let mut w = a.clone();
    let mut v = DMatrix::identity(m, m);
    for _ in 0..JACOBI_SWEEPS {
        let mut rotated = false;
        for p in 0..m {
            for q in p + 1..m {
                let alpha = w.column(p).norm_squared();
                let beta = w.column(q).norm_squared();
                let gamma = w.column(p).dot(&w.column(q));
                if gamma == 0.0 || gamma.abs() <= f64::EPSILON * (alpha * beta).sqrt() {
                    continue;
                }
                rotated = true;
                let zeta = (beta - alpha) / (2.0 * gamma);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                for mat in [&mut w, &mut v] {
                    for i in 0..mat.nrows() {
                        let (xp, xq) = (mat[(i, p)], mat[(i, q)]);
                        mat[(i, p)] = c * xp - s * xq;
                        mat[(i, q)] = s * xp + c * xq;
                    }
                }
            }
        }
        if !rotated {
            break;
        }
    }

    let norms: Vec<f64> = w.column_iter().map(|c| c.norm()).collect();
    let mut order: Vec<usize> = (0..m).collect();
    order.sort_by(|&x, &y| norms[y].total_cmp(&norms[x]));
    let top = norms.iter().cloned().fold(0.0, f64::max);
    let mut u = DMatrix::zeros(n, m);
    let mut vs = DMatrix::zeros(m, m);
    let mut s = Vec::with_capacity(m);
    let mut filled = Vec::new();
    for (k, &src) in order.iter().enumerate() {
        vs.set_column(k, &v.column(src));
        let sigma = norms[src];
        s.push(sigma);
        if sigma > f64::EPSILON * top * m as f64 && sigma > 0.0 {
            u.set_column(k, &(w.column(src) / sigma));
        } else {
            filled.push(k);
        }
    }
    complete_columns(&mut u, &filled);
    (u, s, vs)
}

/// Fills the listed columns of `u` with unit vectors orthogonal to every
/// other column, drawn from the standard basis by Gram-Schmidt.
fn complete_columns(u: &mut DMatrix<f64>, empty: &[usize]) {
    let n = u.nrows();
    let mut basis = 0;
    for &k in empty {
        while basis < n {
            let mut cand = DVector::zeros(n);
            cand[basis] = 1.0;
            basis += 1;
            for _ in 0..2 {
                for j in 0..u.ncols() {
                    if j != k {
                        let proj = u.column(j).dot(&cand);
                        cand.axpy(-proj, &u.column(j), 1.0);
                    }
                }
            }
            let nrm = cand.norm();
            if nrm > 1e-8 {
                u.set_column(k, &(cand / nrm));
                break;
            }
        }
    }
}

/// Moore-Penrose pseudoinverse via SVD with a relative rank cutoff of
/// [`PINV_RELATIVE_CUTOFF`].
pub fn pseudoinverse(m: &DMatrix<f64>) -> DMatrix<f64> {
    let (r, c) = m.shape();
    if r == 0 || c == 0 {
        return DMatrix::zeros(c, r);
    }
    let (u, s, v) = thin_svd(m);
    let cutoff = PINV_RELATIVE_CUTOFF * s[0];
    let mut out = DMatrix::zeros(c, r);
    for (k, &sk) in s.iter().enumerate() {
        if sk > cutoff && sk > 0.0 {
            out.ger(1.0 / sk, &v.column(k), &u.column(k), 1.0);
        }
    }
    out
}

pub fn pseudoinverse_dense(m: &DenseMatrix) -> DenseMatrix {
    DenseMatrix::from(pseudoinverse(m.as_matrix()))
}

/// Rank-`r` truncated SVD with a deterministic sign convention: the
/// largest-magnitude entry of each column of `u` is nonnegative (lowest
/// index wins ties).
#[derive(Clone, Debug)]
pub struct TruncatedSvd {
    pub u: DMatrix<f64>,
    pub s: Vec<f64>,
    pub v: DMatrix<f64>,
}

impl TruncatedSvd {
    pub fn reconstruct(&self) -> DMatrix<f64> {
        let mut us = self.u.clone();
        for (k, mut col) in us.column_iter_mut().enumerate() {
            col *= self.s[k];
        }
        us * self.v.transpose()
    }
}

pub fn truncated_svd(a: &DMatrix<f64>, r: usize) -> Result<TruncatedSvd> {
    let (n, m) = a.shape();
    if r == 0 || r > n.min(m) {
        return Err(dim_err(format!(
            "rank {r} is outside [1, {}] for a {n}x{m} matrix",
            n.min(m)
        )));
    }
    let (uf, sf, vf) = thin_svd(a);
    let mut u = uf.columns(0, r).into_owned();
    let mut v = vf.columns(0, r).into_owned();
    for k in 0..r {
        let col = u.column(k);
        let mut best = 0;
        for i in 1..n {
            if col[i].abs() > col[best].abs() {
                best = i;
            }
        }
        if col[best] < 0.0 {
            u.column_mut(k).neg_mut();
            v.column_mut(k).neg_mut();
        }
    }
    let s = sf[..r].to_vec();
    Ok(TruncatedSvd { u, s, v })
}
