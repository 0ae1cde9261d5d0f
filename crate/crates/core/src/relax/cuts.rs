//! Valid equalities and inequalities for the full lifted relaxation.

use std::collections::HashSet;

use super::term;
use crate::conic::{ConicProgram, LinExpr, MatrixView, Term};
use crate::error::{dim_err, Error, Result};
use crate::linalg::{commutation_index, DenseMatrix};

/// Linear system `A x <= b` on the stacked vector `x`, used to derive RLT
/// inequalities.
#[derive(Clone, Debug, PartialEq)]
pub struct RltSystem {
    pub a: DenseMatrix,
    pub b: Vec<f64>,
}

fn required_view(prog: &ConicProgram, label: &str) -> Result<MatrixView> {
    prog.view(label)
        .cloned()
        .map_err(|_| Error::MissingVariable(format!("`{label}` is not part of this relaxation")))
}

/// Adds `a - b = 0` unless it is trivial or was already added.
fn tie(prog: &mut ConicProgram, seen: &mut HashSet<(usize, usize)>, a: Term, b: Term) -> Result<()> {
    if a.var == b.var && a.coef == b.coef {
        return Ok(());
    }
    let key = (a.var.min(b.var), a.var.max(b.var));
    if !seen.insert(key) {
        return Ok(());
    }
    prog.add_equality(&LinExpr::term(a).with(b, -1.0), 0.0)
}

fn side_of_square(v: &MatrixView) -> Result<usize> {
    let n = (v.rows as f64).sqrt().round() as usize;
    if n * n != v.rows {
        return Err(dim_err("lifted Y block is not n^2 x n^2"));
    }
    Ok(n)
}

/// `Wyy = K Wyy K^T` and `Wxy = Wxy K^T` entrywise, one row per
/// transposition orbit.
pub fn add_symmetry_constraints(prog: &mut ConicProgram) -> Result<()> {
    let wyy = required_view(prog, "Wyy")?;
    let wxy = required_view(prog, "Wxy")?;
    let n = side_of_square(&wyy)?;
    let nn = n * n;
    let mut seen = HashSet::new();
    for q in 0..nn {
        for p in q..nn {
            let (kp, kq) = (commutation_index(n, p), commutation_index(n, q));
            tie(prog, &mut seen, term(&wyy, p, q), term(&wyy, kp, kq))?;
        }
    }
    for r in 0..wxy.rows {
        for q in 0..nn {
            tie(prog, &mut seen, term(&wxy, r, q), term(&wxy, r, commutation_index(n, q)))?;
        }
    }
    Ok(())
}

/// Symmetry of `X` lifted to the moment blocks: `Wxx = K Wxx K^T`,
/// `Wxy = K Wxy` (when present) and `X = X^T`.
pub fn add_x_symmetry_constraints(prog: &mut ConicProgram) -> Result<()> {
    let x = required_view(prog, "X")?;
    if x.rows != x.cols {
        return Err(Error::InvalidArgument(format!(
            "X symmetry needs a square X, got {}x{}",
            x.rows, x.cols
        )));
    }
    let n = x.rows;
    let wxx = required_view(prog, "Wxx")?;
    let mut seen = HashSet::new();
    for j in 0..n {
        for i in j + 1..n {
            tie(prog, &mut seen, term(&x, i, j), term(&x, j, i))?;
        }
    }
    for q in 0..n * n {
        for p in q..n * n {
            let (kp, kq) = (commutation_index(n, p), commutation_index(n, q));
            tie(prog, &mut seen, term(&wxx, p, q), term(&wxx, kp, kq))?;
        }
    }
    if prog.has_view("Wxy") {
        let wxy = required_view(prog, "Wxy")?;
        for q in 0..wxy.cols {
            for p in 0..n * n {
                tie(prog, &mut seen, term(&wxy, p, q), term(&wxy, commutation_index(n, p), q))?;
            }
        }
    }
    Ok(())
}

/// The first `budget` triplets `i < j < l` in lexicographic order.
pub fn triangle_triplets(n: usize, budget: usize) -> Vec<(usize, usize, usize)> {
    let mut out = Vec::new();
    'outer: for i in 0..n {
        for j in i + 1..n {
            for l in j + 1..n {
                if out.len() == budget {
                    break 'outer;
                }
                out.push((i, j, l));
            }
        }
    }
    out
}

/// Triangle inequalities on the diagonal of `Y` and the matching entries
/// `P_ab = Wyy[(a,a), (b,b)]`, for up to `budget` triplets:
///
/// ```text
///   1 - Y_ii - Y_jj - Y_ll + P_ij + P_il + P_jl >= 0
///   Y_aa - P_ab - P_ac + P_bc >= 0        for each rotation (a; b, c)
/// ```
///
/// At an exact point `P_ab = Y_aa Y_bb` with diagonals in `[0, 1]`, and both
/// left-hand sides are multilinear with nonnegative values at every vertex
/// of the unit cube.
pub fn add_triangle_inequalities(prog: &mut ConicProgram, budget: usize) -> Result<()> {
    let wyy = required_view(prog, "Wyy")?;
    let y = required_view(prog, "Y")?;
    let n = y.rows;
    let p = |a: usize, b: usize| term(&wyy, a * n + a, b * n + b);
    for (i, j, l) in triangle_triplets(n, budget) {
        let mut t1 = LinExpr::new();
        t1.add_constant(1.0);
        for a in [i, j, l] {
            t1.add(term(&y, a, a), -1.0);
        }
        for (a, b) in [(i, j), (i, l), (j, l)] {
            t1.add(p(a, b), 1.0);
        }
        prog.add_inequality_ge(&t1, 0.0)?;
        for (a, b, c) in [(i, j, l), (j, i, l), (l, i, j)] {
            let t2 = LinExpr::term(term(&y, a, a))
                .with(p(a, b), -1.0)
                .with(p(a, c), -1.0)
                .with(p(b, c), 1.0);
            prog.add_inequality_ge(&t2, 0.0)?;
        }
    }
    Ok(())
}

/// Elementwise `(b - A x)(b - A x)^T >= 0` linearized through `Wxx`:
/// `b_r b_s - b_r (Ax)_s - (Ax)_r b_s + (A Wxx A^T)_rs >= 0` for `r <= s`.
pub fn add_rlt_inequalities(prog: &mut ConicProgram, sys: &RltSystem) -> Result<()> {
    let wxx = required_view(prog, "Wxx")?;
    let x = required_view(prog, "x")?;
    let nm = x.rows;
    if sys.a.cols() != nm || sys.a.rows() != sys.b.len() {
        return Err(dim_err(format!(
            "RLT system is {}x{} with {} right-hand sides; x has length {nm}",
            sys.a.rows(),
            sys.a.cols(),
            sys.b.len()
        )));
    }
    let rows = sys.a.rows();
    for r in 0..rows {
        for s in r..rows {
            let (br, bs) = (sys.b[r], sys.b[s]);
            let mut e = LinExpr::new();
            e.add_constant(br * bs);
            for p in 0..nm {
                let (arp, asp) = (sys.a.get(r, p), sys.a.get(s, p));
                e.add(term(&x, p, 0), -(br * asp + arp * bs));
                if arp == 0.0 {
                    continue;
                }
                for q in 0..nm {
                    e.add(term(&wxx, p, q), arp * sys.a.get(s, q));
                }
            }
            prog.add_inequality_ge(&e, 0.0)?;
        }
    }
    Ok(())
}
