//! Low-rank basis pursuit: minimum-rank `X` matching the observed entries.

use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::mc::row_block_skeleton;
use crate::conic::{ConicProgram, LinExpr, MatrixView, Term};
use crate::error::{Error, Result};
use crate::linalg::{DenseMatrix, SymMatrix};
use crate::problem::{LowRankQuadraticProblem, ObservedMatrix};
use crate::relax::{build_compact_lifted, term};

/// Which products of observed-entry equalities become RLT equalities.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RltMode {
    /// Every unordered pair of observed entries, including an entry with
    /// itself.
    All,
    /// Only pairs within the same row.
    SameRowOnly,
    /// `count` pairs drawn uniformly without replacement.
    Subsample { count: usize, seed: u64 },
}

/// Unordered pairs `(a, b)`, `a <= b`, of positions in `obs.omega()`.
fn all_pairs(obs: &ObservedMatrix, same_row: bool) -> Vec<(usize, usize)> {
    let om = obs.omega();
    let mut out = Vec::new();
    for a in 0..om.len() {
        for b in a..om.len() {
            if !same_row || om[a].0 == om[b].0 {
                out.push((a, b));
            }
        }
    }
    out
}

fn select(pairs: Vec<(usize, usize)>, count: usize, seed: u64) -> Vec<(usize, usize)> {
    if count >= pairs.len() {
        return pairs;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut idx = sample(&mut rng, pairs.len(), count).into_vec();
    idx.sort_unstable();
    idx.into_iter().map(|k| pairs[k]).collect()
}

/// Pair set used by the full form.
pub fn bp_pairs(obs: &ObservedMatrix, mode: RltMode) -> Vec<(usize, usize)> {
    match mode {
        RltMode::All => all_pairs(obs, false),
        RltMode::SameRowOnly => all_pairs(obs, true),
        RltMode::Subsample { count, seed } => select(all_pairs(obs, false), count, seed),
    }
}

/// Pair set used by the row-block form, which only carries same-row
/// products; `All` therefore means all same-row pairs there.
pub fn bp_reduced_pairs(obs: &ObservedMatrix, mode: RltMode) -> Vec<(usize, usize)> {
    match mode {
        RltMode::All | RltMode::SameRowOnly => all_pairs(obs, true),
        RltMode::Subsample { count, seed } => select(all_pairs(obs, true), count, seed),
    }
}

/// `X_ij = A_ij` on the observed set plus, for each selected pair,
/// `A_ij A_kl - A_kl X_ij - A_ij X_kl + W_(ij),(kl) = 0`.
fn add_bp_rows(
    prog: &mut ConicProgram,
    obs: &ObservedMatrix,
    pairs: &[(usize, usize)],
    x: &MatrixView,
    w: impl Fn(usize, usize, usize, usize) -> Term,
) -> Result<()> {
    let a = obs.a();
    let om = obs.omega();
    for &(i, j) in om {
        prog.add_equality(&LinExpr::term(term(x, i, j)), a.get(i, j))?;
    }
    for &(p, q) in pairs {
        let ((i, j), (k, l)) = (om[p], om[q]);
        let (aij, akl) = (a.get(i, j), a.get(k, l));
        let mut e = LinExpr::term(w(i, j, k, l));
        e.add(term(x, i, j), -akl).add(term(x, k, l), -aij);
        prog.add_equality(&e, -aij * akl)?;
    }
    Ok(())
}

/// Lifted basis-pursuit relaxation: the compact lifted relaxation of
/// `min tr(Y)` with the observation equalities and RLT products on `Wxx`.
pub fn build_bp_full(obs: &ObservedMatrix, mode: RltMode) -> Result<ConicProgram> {
    let (n, m) = (obs.rows(), obs.cols());
    let p = LowRankQuadraticProblem::new(SymMatrix::zeros(n * m), DenseMatrix::zeros(n, m), 1.0, n)?;
    let mut prog = build_compact_lifted(&p)?;
    let x = prog.view("X")?.clone();
    let wxx = prog.view("Wxx")?.clone();
    let pairs = bp_pairs(obs, mode);
    add_bp_rows(&mut prog, obs, &pairs, &x, |i, j, k, l| term(&wxx, i * m + j, k * m + l))?;
    Ok(prog)
}

/// Row-block basis-pursuit relaxation: blocks `[[1, X_i^T], [X_i, S^i]]`,
/// the coupling block, and same-row RLT products on `S^i`.
pub fn build_bp_reduced(obs: &ObservedMatrix, mode: RltMode) -> Result<ConicProgram> {
    let (n, m) = (obs.rows(), obs.cols());
    if n == 0 || m == 0 {
        return Err(Error::DimensionMismatch("empty matrix".into()));
    }
    let mut prog = ConicProgram::new();
    let rows: Vec<Vec<usize>> = (0..n).map(|i| vec![i]).collect();
    let s = row_block_skeleton(&mut prog, n, m, &rows, n, 1.0)?;
    let x = prog.view("X")?.clone();
    let pairs = bp_reduced_pairs(obs, mode);
    add_bp_rows(&mut prog, obs, &pairs, &x, |i, j, _, l| term(&s[i], j, l))?;
    Ok(prog)
}
