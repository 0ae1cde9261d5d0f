//! Matrix completion: encoder, row-block reduced relaxation, mask grouping
//! and mask coarsening.

use std::collections::HashSet;

use indexmap::IndexMap;

use crate::conic::{ConicProgram, LinExpr, MatrixView};
use crate::error::{Error, Result};
use crate::linalg::{DenseMatrix, SymMatrix};
use crate::problem::{masked, FrobeniusSplit, LowRankQuadraticProblem, MaskedQuadratic, ObservedMatrix};
use crate::relax::{add_projection_hull, term, COUPLING};

fn check_gamma(gamma: Option<f64>) -> Result<f64> {
    match gamma {
        None => Ok(0.0),
        Some(g) if g > 0.0 && g.is_finite() => Ok(1.0 / (2.0 * g)),
        Some(g) => Err(Error::InvalidArgument(format!("gamma must be positive, got {g}"))),
    }
}

fn check_scale(loss_scale: f64) -> Result<()> {
    if loss_scale > 0.0 && loss_scale.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!(
            "loss scale must be positive, got {loss_scale}"
        )))
    }
}

/// ```text
///   lambda rank(X) + (1/2 gamma) ||X||_F^2 + s * sum_Omega (X_ij - A_ij)^2
/// ```
/// as a row-stacked quadratic problem: `H` is block diagonal with blocks
/// `s diag(mask_i) + I / (2 gamma)`, `D = -2 s P(A)`, constant
/// `s ||P(A)||^2`. With `gamma` present the Frobenius split is attached.
pub fn encode_matrix_completion(
    obs: &ObservedMatrix,
    lambda: f64,
    k: usize,
    gamma: Option<f64>,
    loss_scale: f64,
) -> Result<LowRankQuadraticProblem> {
    let ridge = check_gamma(gamma)?;
    check_scale(loss_scale)?;
    let (n, m) = (obs.rows(), obs.cols());
    let mut diag = vec![ridge; n * m];
    for &(i, j) in obs.omega() {
        diag[i * m + j] += loss_scale;
    }
    let pa = masked(obs);
    let d = DenseMatrix::from(pa.as_matrix() * (-2.0 * loss_scale));
    let constant = loss_scale * pa.as_matrix().norm_squared();
    let p = LowRankQuadraticProblem::new(SymMatrix::diagonal(&diag), d, lambda, k)?.with_constant(constant);
    match gamma {
        Some(g) => p.with_split(FrobeniusSplit {
            gamma: g,
            h: MaskedQuadratic {
                mask: obs.omega().to_vec(),
                targets: pa,
                scale: loss_scale,
            },
        }),
        None => Ok(p),
    }
}

/// Rows of `X` grouped by identical observed-column sets.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MaskGroup {
    /// Observed columns shared by every row of the group, ascending.
    pub mask: Vec<usize>,
    /// Member rows, ascending.
    pub rows: Vec<usize>,
}

/// Groups in order of their first row.
pub fn group_masks(obs: &ObservedMatrix) -> Vec<MaskGroup> {
    let mut groups: IndexMap<Vec<usize>, Vec<usize>> = IndexMap::new();
    for i in 0..obs.rows() {
        groups.entry(obs.row_mask(i)).or_default().push(i);
    }
    groups
        .into_iter()
        .map(|(mask, rows)| MaskGroup { mask, rows })
        .collect()
}

/// Keeps, for each pair of rows, only the columns observed in both.
pub fn coarsen_masks(obs: &ObservedMatrix, pairs: &[(usize, usize)]) -> Result<ObservedMatrix> {
    let n = obs.rows();
    let mut omega: HashSet<(usize, usize)> = obs.omega().iter().copied().collect();
    for &(a, b) in pairs {
        if a >= n || b >= n || a == b {
            return Err(Error::InvalidArgument(format!(
                "row pair ({a}, {b}) must name two distinct rows below {n}"
            )));
        }
        for j in 0..obs.cols() {
            if !(omega.contains(&(a, j)) && omega.contains(&(b, j))) {
                omega.remove(&(a, j));
                omega.remove(&(b, j));
            }
        }
    }
    ObservedMatrix::new(obs.a().clone(), omega.into_iter().collect())
}

/// Shared skeleton of the row-block relaxations: the coupling block
/// `[[sum_g S^g, X^T], [X, Y]]` and the projection hull on `Y`. Each
/// group `g` owns a PSD block `[[I, Z_g], [Z_g^T, S^g]]` whose `Z_g`
/// holds the group's rows of `X`. Returns the `S^g` views.
pub(crate) fn row_block_skeleton(
    prog: &mut ConicProgram,
    n: usize,
    m: usize,
    groups: &[Vec<usize>],
    k: usize,
    lambda: f64,
) -> Result<Vec<MatrixView>> {
    let cp = prog.add_psd_block(COUPLING, m + n)?;
    let cv = prog.region_view(cp, 0, 0, m + n, m + n);
    prog.define_view(COUPLING, cv)?;
    let x = prog.region_view(cp, m, 0, n, m);
    prog.define_view("X", x.clone())?;

    let mut s_views = Vec::with_capacity(groups.len());
    for (g, rows) in groups.iter().enumerate() {
        let r = rows.len();
        let id = prog.add_psd_block(&format!("row_block{g}"), r + m)?;
        for b in 0..r {
            for a in b..r {
                let rhs = if a == b { 1.0 } else { 0.0 };
                prog.add_equality(&LinExpr::term(prog.entry(id, a, b)), rhs)?;
            }
        }
        for (a, &i) in rows.iter().enumerate() {
            for j in 0..m {
                let e = LinExpr::term(prog.entry(id, r + j, a)).with(term(&x, i, j), -1.0);
                prog.add_equality(&e, 0.0)?;
            }
        }
        let s = prog.region_view(id, r, r, m, m);
        prog.define_view(&format!("S{g}"), s.clone())?;
        s_views.push(s);
    }
    for j2 in 0..m {
        for j in j2..m {
            let mut e = LinExpr::term(prog.entry(cp, j, j2));
            for s in &s_views {
                e.add(term(s, j, j2), -1.0);
            }
            prog.add_equality(&e, 0.0)?;
        }
    }
    let y = prog.region_view(cp, m, m, n, n);
    add_projection_hull(prog, &y, k, lambda)?;
    Ok(s_views)
}

fn build_mc_blocks(
    obs: &ObservedMatrix,
    lambda: f64,
    k: usize,
    gamma: Option<f64>,
    loss_scale: f64,
    groups: &[MaskGroup],
) -> Result<ConicProgram> {
    // the encoder validates the parameters and supplies the constant
    let p = encode_matrix_completion(obs, lambda, k, gamma, loss_scale)?;
    let ridge = check_gamma(gamma)?;
    let (n, m) = (obs.rows(), obs.cols());
    let mut prog = ConicProgram::new();
    let members: Vec<Vec<usize>> = groups.iter().map(|g| g.rows.clone()).collect();
    let s_views = row_block_skeleton(&mut prog, n, m, &members, k, lambda)?;
    for (g, s) in groups.iter().zip(&s_views) {
        // rows of a group share H^g, so <H^g, S^g> covers all of them
        for j in 0..m {
            prog.add_objective(term(s, j, j), ridge);
        }
        for &j in &g.mask {
            prog.add_objective(term(s, j, j), loss_scale);
        }
    }
    let x = prog.view("X")?.clone();
    for &(i, j) in obs.omega() {
        prog.add_objective(term(&x, i, j), p.d.get(i, j));
    }
    prog.add_objective_constant(p.constant);
    Ok(prog)
}

/// The row-block relaxation of matrix completion: one `(1+m)`-sided block
/// `[[1, X_i^T], [X_i, S^i]]` per row and a single coupling block.
pub fn build_mc_reduced(
    obs: &ObservedMatrix,
    lambda: f64,
    k: usize,
    gamma: Option<f64>,
    loss_scale: f64,
) -> Result<ConicProgram> {
    let groups: Vec<MaskGroup> = (0..obs.rows())
        .map(|i| MaskGroup {
            mask: obs.row_mask(i),
            rows: vec![i],
        })
        .collect();
    build_mc_blocks(obs, lambda, k, gamma, loss_scale, &groups)
}

/// Same relaxation with rows sharing a mask aggregated into one block.
pub fn build_mc_grouped(
    obs: &ObservedMatrix,
    lambda: f64,
    k: usize,
    gamma: Option<f64>,
    loss_scale: f64,
) -> Result<ConicProgram> {
    build_mc_blocks(obs, lambda, k, gamma, loss_scale, &group_masks(obs))
}
