//! Generic lifted relaxations, their strengthening cuts, the perspective
//! baseline, and reconstruction of eliminated blocks.
//!
//! Every builder names its decision matrices through program views:
//! `X` (n x m), `x` (the stacked vector the quadratics act on), `Y`,
//! `I_minus_Y`, and where present `Wxx`, `Wxy`, `Wyy`, `y` (= vec(Y)),
//! `theta`, `arrow`, `coupling`.

mod cuts;
mod lifted;
mod mprt;
mod reconstruct;

pub use cuts::{
    add_rlt_inequalities, add_symmetry_constraints, add_triangle_inequalities,
    add_x_symmetry_constraints, triangle_triplets, RltSystem,
};
pub use lifted::{build_compact_lifted, build_full_lifted};
pub use mprt::build_mprt;
pub use reconstruct::{full_lifted_violation, reconstruct_eliminated, LiftedPoint};

use crate::conic::{ConicProgram, LinExpr, MatrixView, Term};
use crate::error::Result;
use crate::linalg::{DenseMatrix, SymMatrix};
use crate::problem::{FrobeniusSplit, LowRankQuadraticProblem, MaskedQuadratic, QuadConstraint, VecOrientation};

/// Default number of triplets for triangle cuts.
pub const DEFAULT_TRIPLET_BUDGET: usize = 200;

/// Optional cut families appended to the full lifted relaxation.
#[derive(Clone, Debug, PartialEq)]
pub struct StrengtheningOptions {
    /// Transposition symmetry of the lifted `Y` blocks.
    pub symmetry_y: bool,
    /// Extra symmetry when `X` is required to be symmetric (`n = m`).
    pub symmetry_x: bool,
    pub triangle: bool,
    pub triplet_budget: usize,
    pub rlt: Option<RltSystem>,
}

impl Default for StrengtheningOptions {
    fn default() -> Self {
        StrengtheningOptions {
            symmetry_y: false,
            symmetry_x: false,
            triangle: false,
            triplet_budget: DEFAULT_TRIPLET_BUDGET,
            rlt: None,
        }
    }
}

impl StrengtheningOptions {
    pub fn with_symmetry() -> Self {
        StrengtheningOptions {
            symmetry_y: true,
            ..Self::default()
        }
    }
}

pub(crate) const ARROW: &str = "arrow";
pub(crate) const COUPLING: &str = "coupling";
pub(crate) const Y_BLOCK: &str = "Y";
pub(crate) const Y_COMPLEMENT: &str = "I_minus_Y";

/// Column-stacked problems are built as row-stacked problems in `X^T`.
pub(crate) fn row_form(p: &LowRankQuadraticProblem) -> (LowRankQuadraticProblem, bool) {
    match p.orientation {
        VecOrientation::RowStacked => (p.clone(), false),
        VecOrientation::ColumnStacked => (transpose_problem(p), true),
    }
}

fn transpose_problem(p: &LowRankQuadraticProblem) -> LowRankQuadraticProblem {
    LowRankQuadraticProblem {
        n: p.m,
        m: p.n,
        h: p.h.clone(),
        d: p.d.transpose(),
        constraints: p
            .constraints
            .iter()
            .map(|c| QuadConstraint {
                q: c.q.clone(),
                e: c.e.transpose(),
                b: c.b,
            })
            .collect(),
        lambda: p.lambda,
        k: p.k,
        constant: p.constant,
        orientation: VecOrientation::RowStacked,
        split: p.split.as_ref().map(|s| FrobeniusSplit {
            gamma: s.gamma,
            h: MaskedQuadratic {
                mask: s.h.mask.iter().map(|&(i, j)| (j, i)).collect(),
                targets: s.h.targets.transpose(),
                scale: s.h.scale,
            },
        }),
    }
}

/// Restores the caller's orientation of the `X` view.
pub(crate) fn finish_orientation(prog: &mut ConicProgram, transposed: bool) -> Result<()> {
    if transposed {
        let xt = prog.view("X")?.transposed();
        prog.replace_view("X", xt)?;
    }
    Ok(())
}

/// PSD block with its top-left entry fixed to one.
pub(crate) fn add_arrow(prog: &mut ConicProgram, label: &str, side: usize) -> Result<usize> {
    let id = prog.add_psd_block(label, side)?;
    prog.add_equality(&LinExpr::term(prog.entry(id, 0, 0)), 1.0)?;
    let view = prog.region_view(id, 0, 0, side, side);
    prog.define_view(label, view)?;
    Ok(id)
}

/// `Y` in the convex hull of rank-`k` projections: `I - Y` PSD (via a
/// complement block), `tr(Y) <= k`, and `lambda tr(Y)` in the objective.
/// `Y` itself must already be PSD through the block it lives in.
pub(crate) fn add_projection_hull(prog: &mut ConicProgram, y: &MatrixView, k: usize, lambda: f64) -> Result<()> {
    let n = y.rows;
    let z = prog.add_psd_block(Y_COMPLEMENT, n)?;
    for j in 0..n {
        for i in j..n {
            let e = LinExpr::term(prog.entry(z, i, j)).with(term(y, i, j), 1.0);
            prog.add_equality(&e, if i == j { 1.0 } else { 0.0 })?;
        }
    }
    let mut tr = LinExpr::new();
    for i in 0..n {
        tr.add(term(y, i, i), 1.0);
    }
    prog.add_inequality(&tr, k as f64)?;
    if lambda != 0.0 {
        for i in 0..n {
            prog.add_objective(term(y, i, i), lambda);
        }
    }
    let zv = prog.region_view(z, 0, 0, n, n);
    prog.define_view(Y_COMPLEMENT, zv)?;
    prog.define_view("Y", y.clone())?;
    Ok(())
}

/// A view entry that is known to be a variable.
pub(crate) fn term(v: &MatrixView, i: usize, j: usize) -> Term {
    v.term(i, j).expect("relaxation views have no structural zeros")
}

/// `<H, W>` for symmetric `H` and a symmetric view `W`.
pub(crate) fn quadratic_expr(h: &SymMatrix, w: &MatrixView) -> LinExpr {
    let mut e = LinExpr::new();
    for q in 0..h.dim() {
        for p in q..h.dim() {
            let c = h.get(p, q);
            if c != 0.0 {
                e.add(term(w, p, q), if p == q { c } else { 2.0 * c });
            }
        }
    }
    e
}

/// `<D, X>`.
pub(crate) fn linear_expr(d: &DenseMatrix, x: &MatrixView) -> LinExpr {
    let mut e = LinExpr::new();
    for i in 0..d.rows() {
        for j in 0..d.cols() {
            e.add(term(x, i, j), d.get(i, j));
        }
    }
    e
}

pub(crate) fn merge(mut a: LinExpr, b: LinExpr) -> LinExpr {
    a.terms.extend(b.terms);
    a.constant += b.constant;
    a
}

/// Objective and quadratic constraints shared by the lifted forms.
pub(crate) fn add_problem_terms(
    prog: &mut ConicProgram,
    p: &LowRankQuadraticProblem,
    wxx: &MatrixView,
    x: &MatrixView,
) -> Result<()> {
    let obj = merge(quadratic_expr(&p.h, wxx), linear_expr(&p.d, x));
    prog.add_objective_expr(&obj);
    prog.add_objective_constant(p.constant);
    for c in &p.constraints {
        let row = merge(quadratic_expr(&c.q, wxx), linear_expr(&c.e, x));
        prog.add_inequality(&row, c.b)?;
    }
    Ok(())
}
