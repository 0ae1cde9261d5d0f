use std::fmt;

use indexmap::IndexMap;
use nalgebra::DMatrix;

use super::svec::{svec_index, svec_len, svec_position};
use crate::error::{Error, Result};

/// One block of the cone product.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Cone {
    Free(usize),
    NonNeg(usize),
    /// `(t, w)` with `||w|| <= t`; the length includes `t`.
    SecondOrder(usize),
    /// Side length of a symmetric matrix block.
    Psd(usize),
}

impl Cone {
    /// Number of scalar variables the block contributes.
    pub fn scalar_len(&self) -> usize {
        match *self {
            Cone::Free(l) | Cone::NonNeg(l) | Cone::SecondOrder(l) => l,
            Cone::Psd(side) => svec_len(side),
        }
    }

    pub fn kind_name(&self) -> &'static str {
        match self {
            Cone::Free(_) => "free",
            Cone::NonNeg(_) => "nonneg",
            Cone::SecondOrder(_) => "second-order",
            Cone::Psd(_) => "psd",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ConeBlock {
    pub label: String,
    pub cone: Cone,
    /// Index of the block's first scalar variable.
    pub offset: usize,
}

/// Handle on a scalar variable: its value is `coef * x[var]`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Term {
    pub var: usize,
    pub coef: f64,
}

/// Sparse affine expression over the scalarized variables.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct LinExpr {
    pub terms: Vec<(usize, f64)>,
    pub constant: f64,
}

impl LinExpr {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn term(t: Term) -> Self {
        let mut e = Self::new();
        e.add(t, 1.0);
        e
    }

    pub fn add(&mut self, t: Term, coef: f64) -> &mut Self {
        if coef != 0.0 && t.coef != 0.0 {
            self.terms.push((t.var, coef * t.coef));
        }
        self
    }

    pub fn with(mut self, t: Term, coef: f64) -> Self {
        self.add(t, coef);
        self
    }

    pub fn add_constant(&mut self, c: f64) -> &mut Self {
        self.constant += c;
        self
    }

    /// Merges repeated variables and drops zero coefficients.
    pub fn canonical(&self) -> Vec<(usize, f64)> {
        let mut t = self.terms.clone();
        t.sort_by_key(|&(v, _)| v);
        let mut out: Vec<(usize, f64)> = Vec::with_capacity(t.len());
        for (v, c) in t {
            match out.last_mut() {
                Some(last) if last.0 == v => last.1 += c,
                _ => out.push((v, c)),
            }
        }
        out.retain(|&(_, c)| c != 0.0);
        out
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        self.constant + self.terms.iter().map(|&(v, c)| c * x[v]).sum::<f64>()
    }
}

/// Sparse equality row `a . x = rhs`, indices strictly increasing.
#[derive(Clone, Debug, PartialEq)]
pub struct SparseRow {
    pub idx: Vec<usize>,
    pub val: Vec<f64>,
}

impl SparseRow {
    pub fn dot(&self, x: &[f64]) -> f64 {
        self.idx.iter().zip(&self.val).map(|(&i, &v)| v * x[i]).sum()
    }
}

/// A named logical matrix assembled from scalar variables, used to decode
/// solutions back into the caller's matrices.
#[derive(Clone, Debug, PartialEq)]
pub struct MatrixView {
    pub rows: usize,
    pub cols: usize,
    /// Row-major; `None` entries are identically zero.
    pub entries: Vec<Option<Term>>,
}

impl MatrixView {
    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> Option<Term>) -> Self {
        let mut entries = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                entries.push(f(i, j));
            }
        }
        MatrixView { rows, cols, entries }
    }

    pub fn term(&self, i: usize, j: usize) -> Option<Term> {
        self.entries[i * self.cols + j]
    }

    pub fn read(&self, x: &[f64]) -> DMatrix<f64> {
        DMatrix::from_fn(self.rows, self.cols, |i, j| {
            self.term(i, j).map_or(0.0, |t| t.coef * x[t.var])
        })
    }

    pub fn transposed(&self) -> MatrixView {
        MatrixView::from_fn(self.cols, self.rows, |i, j| self.term(j, i))
    }
}

/// Cone-constrained linear program in equality standard form:
///
/// ```text
///   minimize  c . x + constant
///   subject to A x = b,  x in K_1 x ... x K_p
/// ```
///
/// Variables of a PSD block are the lower-triangle entries `M_ij` of the
/// matrix itself (not svec-scaled); a row coefficient `a` on an off-diagonal
/// variable contributes `a * M_ij`. The solver applies the `sqrt(2)` scaling
/// internally.
#[derive(Clone, Default, PartialEq)]
pub struct ConicProgram {
    blocks: Vec<ConeBlock>,
    block_index: IndexMap<String, usize>,
    num_vars: usize,
    c: Vec<f64>,
    rows: Vec<SparseRow>,
    b: Vec<f64>,
    views: IndexMap<String, MatrixView>,
    objective_constant: f64,
    slack_count: usize,
}

pub(crate) const SLACK_PREFIX: &str = "slack#";

impl ConicProgram {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add_block(&mut self, label: &str, cone: Cone) -> Result<usize> {
        if self.block_index.contains_key(label) {
            return Err(Error::DuplicateLabel(label.to_string()));
        }
        let len = cone.scalar_len();
        if len == 0 {
            return Err(Error::InvalidArgument(format!(
                "block `{label}` must have positive size"
            )));
        }
        let id = self.blocks.len();
        self.blocks.push(ConeBlock {
            label: label.to_string(),
            cone,
            offset: self.num_vars,
        });
        self.block_index.insert(label.to_string(), id);
        self.num_vars += len;
        self.c.resize(self.num_vars, 0.0);
        Ok(id)
    }

    pub fn add_psd_block(&mut self, label: &str, side: usize) -> Result<usize> {
        self.add_block(label, Cone::Psd(side))
    }

    pub fn add_nonneg_block(&mut self, label: &str, len: usize) -> Result<usize> {
        self.add_block(label, Cone::NonNeg(len))
    }

    pub fn add_free_block(&mut self, label: &str, len: usize) -> Result<usize> {
        self.add_block(label, Cone::Free(len))
    }

    pub fn add_soc_block(&mut self, label: &str, len: usize) -> Result<usize> {
        self.add_block(label, Cone::SecondOrder(len))
    }

    pub fn block_id(&self, label: &str) -> Result<usize> {
        self.block_index
            .get(label)
            .copied()
            .ok_or_else(|| Error::UnknownLabel(label.to_string()))
    }

    pub fn block(&self, id: usize) -> &ConeBlock {
        &self.blocks[id]
    }

    pub fn blocks(&self) -> &[ConeBlock] {
        &self.blocks
    }

    /// Entry `(i, j)` of PSD block `id`.
    pub fn entry(&self, id: usize, i: usize, j: usize) -> Term {
        let blk = &self.blocks[id];
        match blk.cone {
            Cone::Psd(side) => {
                assert!(i < side && j < side, "entry ({i},{j}) outside block `{}`", blk.label);
                Term {
                    var: blk.offset + svec_index(side, i, j),
                    coef: 1.0,
                }
            }
            other => panic!("block `{}` is {} not psd", blk.label, other.kind_name()),
        }
    }

    /// Scalar `k` of a vector-shaped block.
    pub fn scalar(&self, id: usize, k: usize) -> Term {
        let blk = &self.blocks[id];
        assert!(k < blk.cone.scalar_len(), "index {k} outside block `{}`", blk.label);
        Term {
            var: blk.offset + k,
            coef: 1.0,
        }
    }

    /// Adds `expr == rhs`.
    pub fn add_equality(&mut self, expr: &LinExpr, rhs: f64) -> Result<()> {
        let terms = expr.canonical();
        let rhs = rhs - expr.constant;
        if let Some(&(v, _)) = terms.iter().find(|&&(v, _)| v >= self.num_vars) {
            return Err(Error::InvalidArgument(format!("row references unknown variable {v}")));
        }
        if terms.is_empty() {
            if rhs.abs() > 1e-12 {
                return Err(Error::InvalidArgument(format!(
                    "empty row with nonzero right-hand side {rhs}"
                )));
            }
            return Ok(());
        }
        let (idx, val) = terms.into_iter().unzip();
        self.rows.push(SparseRow { idx, val });
        self.b.push(rhs);
        Ok(())
    }

    /// Adds `expr <= rhs` as `expr + s == rhs` with a fresh slack `s >= 0`.
    pub fn add_inequality(&mut self, expr: &LinExpr, rhs: f64) -> Result<()> {
        let label = format!("{SLACK_PREFIX}{}", self.slack_count);
        self.slack_count += 1;
        let id = self.add_nonneg_block(&label, 1)?;
        let s = self.scalar(id, 0);
        let row = expr.clone().with(s, 1.0);
        self.add_equality(&row, rhs)
    }

    /// Adds `expr >= rhs`.
    pub fn add_inequality_ge(&mut self, expr: &LinExpr, rhs: f64) -> Result<()> {
        let neg = LinExpr {
            terms: expr.terms.iter().map(|&(v, c)| (v, -c)).collect(),
            constant: -expr.constant,
        };
        self.add_inequality(&neg, -rhs)
    }

    /// Adds `coef * term` to the objective.
    pub fn add_objective(&mut self, t: Term, coef: f64) {
        self.c[t.var] += coef * t.coef;
    }

    pub fn add_objective_expr(&mut self, e: &LinExpr) {
        for &(v, c) in &e.terms {
            self.c[v] += c;
        }
        self.objective_constant += e.constant;
    }

    pub fn add_objective_constant(&mut self, c: f64) {
        self.objective_constant += c;
    }

    /// Adds `<coeffs, block>` to the objective. PSD blocks take a full
    /// symmetric coefficient matrix; vector blocks take a column vector.
    pub fn set_objective_term(&mut self, label: &str, coeffs: &DMatrix<f64>) -> Result<()> {
        let id = self.block_id(label)?;
        let blk = self.blocks[id].clone();
        match blk.cone {
            Cone::Psd(side) => {
                if coeffs.shape() != (side, side) {
                    return Err(Error::DimensionMismatch(format!(
                        "objective for `{label}` must be {side}x{side}"
                    )));
                }
                for j in 0..side {
                    for i in 0..side {
                        self.add_objective(self.entry(id, i, j), coeffs[(i, j)]);
                    }
                }
            }
            cone => {
                let len = cone.scalar_len();
                if coeffs.len() != len || coeffs.ncols() != 1 {
                    return Err(Error::DimensionMismatch(format!(
                        "objective for `{label}` must be a vector of length {len}"
                    )));
                }
                for k in 0..len {
                    self.add_objective(self.scalar(id, k), coeffs[k]);
                }
            }
        }
        Ok(())
    }

    pub fn define_view(&mut self, label: &str, view: MatrixView) -> Result<()> {
        if self.views.contains_key(label) {
            return Err(Error::DuplicateLabel(label.to_string()));
        }
        self.views.insert(label.to_string(), view);
        Ok(())
    }

    /// View over a rectangular region of a PSD block.
    pub fn region_view(&self, id: usize, row0: usize, col0: usize, rows: usize, cols: usize) -> MatrixView {
        MatrixView::from_fn(rows, cols, |i, j| Some(self.entry(id, row0 + i, col0 + j)))
    }

    /// Replaces an existing view, keeping its position.
    pub fn replace_view(&mut self, label: &str, view: MatrixView) -> Result<()> {
        match self.views.get_mut(label) {
            Some(v) => {
                *v = view;
                Ok(())
            }
            None => Err(Error::UnknownLabel(label.to_string())),
        }
    }

    pub fn view(&self, label: &str) -> Result<&MatrixView> {
        self.views
            .get(label)
            .ok_or_else(|| Error::UnknownLabel(label.to_string()))
    }

    pub fn has_view(&self, label: &str) -> bool {
        self.views.contains_key(label)
    }

    pub fn views(&self) -> impl Iterator<Item = (&String, &MatrixView)> {
        self.views.iter()
    }

    pub fn num_vars(&self) -> usize {
        self.num_vars
    }

    pub fn num_rows(&self) -> usize {
        self.rows.len()
    }

    pub fn objective(&self) -> &[f64] {
        &self.c
    }

    pub fn objective_constant(&self) -> f64 {
        self.objective_constant
    }

    pub fn rows(&self) -> &[SparseRow] {
        &self.rows
    }

    pub fn rhs(&self) -> &[f64] {
        &self.b
    }

    pub fn has_cone(&self, pred: impl Fn(&Cone) -> bool) -> bool {
        self.blocks.iter().any(|b| pred(&b.cone))
    }

    /// True when variable `v` is an off-diagonal entry of a PSD block.
    pub fn is_offdiagonal(&self, v: usize) -> bool {
        let id = self.block_of(v);
        let blk = &self.blocks[id];
        match blk.cone {
            Cone::Psd(side) => {
                let (i, j) = svec_position(side, v - blk.offset);
                i != j
            }
            _ => false,
        }
    }

    /// Block containing scalar variable `v`.
    pub fn block_of(&self, v: usize) -> usize {
        self.blocks.partition_point(|b| b.offset <= v) - 1
    }

    /// Per-variable weights of the svec metric in entry coordinates:
    /// 2 for off-diagonal PSD entries, 1 otherwise.
    pub fn entry_metric(&self) -> Vec<f64> {
        let mut w = vec![1.0; self.num_vars];
        for blk in &self.blocks {
            if let Cone::Psd(side) = blk.cone {
                let mut k = blk.offset;
                for j in 0..side {
                    k += 1;
                    for _ in j + 1..side {
                        w[k] = 2.0;
                        k += 1;
                    }
                }
            }
        }
        w
    }

    /// Writes a matrix into the variables behind a view.
    pub fn assign_view(&self, label: &str, value: &DMatrix<f64>, x: &mut [f64]) -> Result<()> {
        let view = self.view(label)?;
        if value.shape() != (view.rows, view.cols) {
            return Err(Error::DimensionMismatch(format!(
                "view `{label}` is {}x{}, value is {}x{}",
                view.rows,
                view.cols,
                value.nrows(),
                value.ncols()
            )));
        }
        for i in 0..view.rows {
            for j in 0..view.cols {
                if let Some(t) = view.term(i, j) {
                    x[t.var] = value[(i, j)] / t.coef;
                }
            }
        }
        Ok(())
    }

    /// True for the nonneg slacks created by [`ConicProgram::add_inequality`].
    pub fn is_slack_block(&self, id: usize) -> bool {
        self.blocks[id].label.starts_with(SLACK_PREFIX)
    }

    /// Sets every inequality slack so its row holds with equality, given
    /// the values of all other variables.
    pub fn fill_slacks(&self, x: &mut [f64]) {
        for (row, &rhs) in self.rows.iter().zip(&self.b) {
            let slack = row
                .idx
                .iter()
                .position(|&v| self.is_slack_block(self.block_of(v)));
            if let Some(k) = slack {
                let rest: f64 = row
                    .idx
                    .iter()
                    .zip(&row.val)
                    .enumerate()
                    .filter(|&(q, _)| q != k)
                    .map(|(_, (&v, &a))| a * x[v])
                    .sum();
                x[row.idx[k]] = (rhs - rest) / row.val[k];
            }
        }
    }

    pub(crate) fn raw_parts_mut(
        &mut self,
    ) -> (&mut Vec<f64>, &mut Vec<SparseRow>, &mut Vec<f64>, &mut f64) {
        (&mut self.c, &mut self.rows, &mut self.b, &mut self.objective_constant)
    }

    pub(crate) fn push_row_unchecked(&mut self, row: SparseRow, rhs: f64) {
        self.rows.push(row);
        self.b.push(rhs);
    }
}

impl ConicProgram {
    /// Rewrites every second-order cone `(t, w)` as the arrow PSD block
    /// `[[t, w^T], [w, t I]]`, keeping labels, variable meaning and views.
    pub fn lower_second_order_cones(&self) -> ConicProgram {
        let mut out = ConicProgram::new();
        out.slack_count = self.slack_count;
        // old variable -> new variable; entry coordinates make every
        // substitution coefficient equal to one.
        let mut map = vec![0usize; self.num_vars];
        let mut arrows = Vec::new();
        for blk in &self.blocks {
            match blk.cone {
                Cone::SecondOrder(len) => {
                    let id = out
                        .add_psd_block(&blk.label, len)
                        .expect("labels are unique in the source program");
                    for k in 0..len {
                        map[blk.offset + k] = out.entry(id, k, 0).var;
                    }
                    arrows.push((id, len));
                }
                cone => {
                    let id = out
                        .add_block(&blk.label, cone)
                        .expect("labels are unique in the source program");
                    let off = out.blocks[id].offset;
                    for k in 0..cone.scalar_len() {
                        map[blk.offset + k] = off + k;
                    }
                }
            }
        }
        for (v, &cv) in self.c.iter().enumerate() {
            out.c[map[v]] += cv;
        }
        out.objective_constant = self.objective_constant;
        for (row, &rhs) in self.rows.iter().zip(&self.b) {
            let mut e = LinExpr::new();
            for (&v, &a) in row.idx.iter().zip(&row.val) {
                e.terms.push((map[v], a));
            }
            let (idx, val) = e.canonical().into_iter().unzip();
            out.push_row_unchecked(SparseRow { idx, val }, rhs);
        }
        for (id, len) in arrows {
            for i in 1..len {
                let diag = LinExpr::term(out.entry(id, i, i)).with(out.entry(id, 0, 0), -1.0);
                out.add_equality(&diag, 0.0).expect("valid row");
                for j in 1..i {
                    out.add_equality(&LinExpr::term(out.entry(id, i, j)), 0.0)
                        .expect("valid row");
                }
            }
        }
        for (label, view) in &self.views {
            let remapped = MatrixView {
                rows: view.rows,
                cols: view.cols,
                entries: view
                    .entries
                    .iter()
                    .map(|t| t.map(|t| Term { var: map[t.var], coef: t.coef }))
                    .collect(),
            };
            out.views.insert(label.clone(), remapped);
        }
        out
    }
}

impl fmt::Debug for ConicProgram {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ConicProgram")
            .field("blocks", &self.blocks.len())
            .field("vars", &self.num_vars)
            .field("rows", &self.rows.len())
            .finish()
    }
}
