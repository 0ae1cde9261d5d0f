use super::{
    add_arrow, add_problem_terms, add_projection_hull, finish_orientation, row_form, term,
    StrengtheningOptions, ARROW, COUPLING, Y_BLOCK,
};
use super::cuts::{
    add_rlt_inequalities, add_symmetry_constraints, add_triangle_inequalities,
    add_x_symmetry_constraints,
};
use crate::conic::{ConicProgram, LinExpr, MatrixView};
use crate::error::Result;
use crate::problem::LowRankQuadraticProblem;

/// Views `X` and `x` over the first column of an arrow block whose
/// coordinates `1..=nm` hold `vec_t(X)`.
fn define_x_views(prog: &mut ConicProgram, arrow: usize, n: usize, m: usize) -> Result<()> {
    let xv = MatrixView::from_fn(n, m, |i, j| Some(prog.entry(arrow, 1 + i * m + j, 0)));
    prog.define_view("X", xv)?;
    let stacked = prog.region_view(arrow, 1, 0, n * m, 1);
    prog.define_view("x", stacked)
}

/// The lifted relaxation over the full moment matrix
/// `[[1, x^T, y^T], [x, Wxx, Wxy], [y, Wxy^T, Wyy]]` with `x = vec_t(X)`
/// and `y = vec(Y)`.
pub fn build_full_lifted(p: &LowRankQuadraticProblem, opts: &StrengtheningOptions) -> Result<ConicProgram> {
    p.validate()?;
    let (q, transposed) = row_form(p);
    let (n, m) = (q.n, q.m);
    let (nm, nn) = (n * m, n * n);
    let (xo, yo) = (1, 1 + nm);

    let mut prog = ConicProgram::new();
    let arrow = add_arrow(&mut prog, ARROW, 1 + nm + nn)?;
    let yb = prog.add_psd_block(Y_BLOCK, n)?;
    define_x_views(&mut prog, arrow, n, m)?;
    for (label, r0, c0, rows, cols) in [
        ("Wxx", xo, xo, nm, nm),
        ("Wxy", xo, yo, nm, nn),
        ("Wyy", yo, yo, nn, nn),
        ("y", yo, 0, nn, 1),
    ] {
        let v = prog.region_view(arrow, r0, c0, rows, cols);
        prog.define_view(label, v)?;
    }
    let y = prog.region_view(yb, 0, 0, n, n);

    // vec(Y) inside the moment matrix agrees with Y
    for j in 0..n {
        for i in 0..n {
            let e = LinExpr::term(prog.entry(arrow, yo + j * n + i, 0)).with(term(&y, i, j), -1.0);
            prog.add_equality(&e, 0.0)?;
        }
    }
    // sum_a Wyy^(a,a) = Y
    for i2 in 0..n {
        for i in i2..n {
            let mut e = LinExpr::new().with(term(&y, i, i2), -1.0);
            for a in 0..n {
                e.add(prog.entry(arrow, yo + a * n + i, yo + a * n + i2), 1.0);
            }
            prog.add_equality(&e, 0.0)?;
        }
    }
    // sum_i Wxy^(i,i) = X^T
    for j in 0..m {
        for l in 0..n {
            let mut e = LinExpr::new().with(prog.entry(arrow, xo + l * m + j, 0), -1.0);
            for i in 0..n {
                e.add(prog.entry(arrow, xo + i * m + j, yo + i * n + l), 1.0);
            }
            prog.add_equality(&e, 0.0)?;
        }
    }

    add_projection_hull(&mut prog, &y, q.k, q.lambda)?;
    let wxx = prog.view("Wxx")?.clone();
    let xv = prog.view("X")?.clone();
    add_problem_terms(&mut prog, &q, &wxx, &xv)?;

    if opts.symmetry_y {
        add_symmetry_constraints(&mut prog)?;
    }
    if opts.symmetry_x {
        add_x_symmetry_constraints(&mut prog)?;
    }
    if opts.triangle {
        add_triangle_inequalities(&mut prog, opts.triplet_budget)?;
    }
    if let Some(rlt) = &opts.rlt {
        add_rlt_inequalities(&mut prog, rlt)?;
    }
    finish_orientation(&mut prog, transposed)?;
    Ok(prog)
}

/// The compact relaxation: the arrow `[[1, x^T], [x, Wxx]]` plus the
/// coupling block `[[sum_i Wxx^(i,i), X^T], [X, Y]]`.
pub fn build_compact_lifted(p: &LowRankQuadraticProblem) -> Result<ConicProgram> {
    p.validate()?;
    let (q, transposed) = row_form(p);
    let (n, m) = (q.n, q.m);
    let nm = n * m;

    let mut prog = ConicProgram::new();
    let arrow = add_arrow(&mut prog, ARROW, 1 + nm)?;
    define_x_views(&mut prog, arrow, n, m)?;
    let wxx = prog.region_view(arrow, 1, 1, nm, nm);
    prog.define_view("Wxx", wxx.clone())?;

    let cp = prog.add_psd_block(COUPLING, m + n)?;
    let cv = prog.region_view(cp, 0, 0, m + n, m + n);
    prog.define_view(COUPLING, cv)?;
    for j2 in 0..m {
        for j in j2..m {
            let mut e = LinExpr::term(prog.entry(cp, j, j2));
            for i in 0..n {
                e.add(term(&wxx, i * m + j, i * m + j2), -1.0);
            }
            prog.add_equality(&e, 0.0)?;
        }
    }
    for i in 0..n {
        for j in 0..m {
            let e = LinExpr::term(prog.entry(cp, m + i, j)).with(prog.entry(arrow, 1 + i * m + j, 0), -1.0);
            prog.add_equality(&e, 0.0)?;
        }
    }
    let y = prog.region_view(cp, m, m, n, n);
    add_projection_hull(&mut prog, &y, q.k, q.lambda)?;
    let xv = prog.view("X")?.clone();
    add_problem_terms(&mut prog, &q, &wxx, &xv)?;
    finish_orientation(&mut prog, transposed)?;
    Ok(prog)
}
