/// Compressed sparse rows.
#[derive(Clone, Debug)]
pub(crate) struct Csr {
    cols: usize,
    ptr: Vec<usize>,
    idx: Vec<usize>,
    val: Vec<f64>,
}

impl Csr {
    pub fn from_rows(cols: usize, rows: Vec<(Vec<usize>, Vec<f64>)>) -> Csr {
        let mut ptr = Vec::with_capacity(rows.len() + 1);
        let mut idx = Vec::new();
        let mut val = Vec::new();
        ptr.push(0);
        for (i, v) in rows {
            idx.extend(i);
            val.extend(v);
            ptr.push(idx.len());
        }
        Csr { cols, ptr, idx, val }
    }

    pub fn rows(&self) -> usize {
        self.ptr.len() - 1
    }

    pub fn row(&self, r: usize) -> (&[usize], &[f64]) {
        let (a, b) = (self.ptr[r], self.ptr[r + 1]);
        (&self.idx[a..b], &self.val[a..b])
    }

    /// `out = A x`
    pub fn mul(&self, x: &[f64], out: &mut [f64]) {
        for (r, o) in out.iter_mut().enumerate() {
            let (idx, val) = self.row(r);
            *o = idx.iter().zip(val).map(|(&i, &v)| v * x[i]).sum();
        }
    }

    /// `out += A^T y`
    pub fn mul_transpose_add(&self, y: &[f64], out: &mut [f64]) {
        for (r, &yr) in y.iter().enumerate() {
            if yr == 0.0 {
                continue;
            }
            let (idx, val) = self.row(r);
            for (&i, &v) in idx.iter().zip(val) {
                out[i] += v * yr;
            }
        }
    }

    pub fn transpose(&self) -> Csr {
        let mut counts = vec![0usize; self.cols + 1];
        for &i in &self.idx {
            counts[i + 1] += 1;
        }
        for k in 0..self.cols {
            counts[k + 1] += counts[k];
        }
        let mut next = counts.clone();
        let mut idx = vec![0; self.idx.len()];
        let mut val = vec![0.0; self.val.len()];
        for r in 0..self.rows() {
            let (ri, rv) = self.row(r);
            for (&c, &v) in ri.iter().zip(rv) {
                let p = next[c];
                idx[p] = r;
                val[p] = v;
                next[c] += 1;
            }
        }
        Csr {
            cols: self.rows(),
            ptr: counts,
            idx,
            val,
        }
    }
}
