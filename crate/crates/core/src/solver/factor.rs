//! Dense Cholesky factorization of the normal equations `A A^T` with
//! dependent-row detection.

use super::csr::Csr;

/// Lower-triangular factor stored row-major. Rows of `A` found to be
/// linearly dependent on earlier rows are dropped: their pivot is zero and
/// their multiplier is forced to zero in solves, which turns the solve into
/// a least-squares projection onto the span of the independent rows.
pub(crate) struct NormalFactor {
    m: usize,
    l: Vec<f64>,
    dropped: Vec<bool>,
}

/// Relative pivot below which a row counts as dependent.
const PIVOT_TOL: f64 = 1e-10;

impl NormalFactor {
    pub fn new(a: &Csr) -> NormalFactor {
        let m = a.rows();
        let mut g = vec![0.0; m * m];
        // accumulate the lower triangle column by column of A
        let cols = a.transpose();
        for j in 0..cols.rows() {
            let (idx, val) = cols.row(j);
            for p in 0..idx.len() {
                let (r1, v1) = (idx[p], val[p]);
                for q in 0..=p {
                    let r2 = idx[q];
                    let (hi, lo) = if r1 >= r2 { (r1, r2) } else { (r2, r1) };
                    g[hi * m + lo] += v1 * val[q];
                }
            }
        }
        let diag: Vec<f64> = (0..m).map(|i| g[i * m + i]).collect();
        let mut dropped = vec![false; m];
        for i in 0..m {
            for j in 0..i {
                if dropped[j] {
                    g[i * m + j] = 0.0;
                    continue;
                }
                let (ri, rj) = (i * m, j * m);
                let s: f64 = dot(&g[ri..ri + j], &g[rj..rj + j]);
                g[ri + j] = (g[ri + j] - s) / g[rj + j];
            }
            let ri = i * m;
            let s: f64 = dot(&g[ri..ri + i], &g[ri..ri + i]);
            let d = g[ri + i] - s;
            if d <= PIVOT_TOL * diag[i].max(f64::MIN_POSITIVE) {
                dropped[i] = true;
                g[ri..ri + i].iter_mut().for_each(|v| *v = 0.0);
                g[ri + i] = 0.0;
            } else {
                g[ri + i] = d.sqrt();
            }
        }
        NormalFactor { m, l: g, dropped }
    }

    #[cfg(test)]
    pub fn dropped_rows(&self) -> usize {
        self.dropped.iter().filter(|&&d| d).count()
    }

    /// Solves `L L^T z = r` in place, with dropped rows giving zero.
    pub fn solve_in_place(&self, r: &mut [f64]) {
        let m = self.m;
        for i in 0..m {
            if self.dropped[i] {
                r[i] = 0.0;
                continue;
            }
            let row = &self.l[i * m..i * m + i];
            let s = dot(row, &r[..i]);
            r[i] = (r[i] - s) / self.l[i * m + i];
        }
        for i in (0..m).rev() {
            if self.dropped[i] {
                r[i] = 0.0;
                continue;
            }
            let zi = r[i] / self.l[i * m + i];
            r[i] = zi;
            let row = &self.l[i * m..i * m + i];
            for (rk, lk) in r[..i].iter_mut().zip(row) {
                *rk -= lk * zi;
            }
        }
    }
}

#[inline]
fn dot(a: &[f64], b: &[f64]) -> f64 {
    let mut acc = [0.0; 4];
    let chunks = a.len() / 4;
    for k in 0..chunks {
        let o = 4 * k;
        acc[0] += a[o] * b[o];
        acc[1] += a[o + 1] * b[o + 1];
        acc[2] += a[o + 2] * b[o + 2];
        acc[3] += a[o + 3] * b[o + 3];
    }
    let mut s = (acc[0] + acc[1]) + (acc[2] + acc[3]);
    for k in 4 * chunks..a.len() {
        s += a[k] * b[k];
    }
    s
}
