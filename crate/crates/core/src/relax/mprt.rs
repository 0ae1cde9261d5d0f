use nalgebra::DMatrix;

use super::{add_projection_hull, finish_orientation, row_form, term, COUPLING};
use crate::conic::{ConicProgram, LinExpr};
use crate::error::{Error, Result};
use crate::problem::{evaluate_objective, LowRankQuadraticProblem};

/// Checks that the declared split reproduces the problem's objective on a
/// few fixed points.
fn split_matches(p: &LowRankQuadraticProblem) -> bool {
    let Some(split) = &p.split else {
        return false;
    };
    let probes = [
        DMatrix::zeros(p.n, p.m),
        DMatrix::from_element(p.n, p.m, 1.0),
        DMatrix::from_fn(p.n, p.m, |i, j| ((3 * i + 5 * j) % 7) as f64 - 3.0),
        DMatrix::from_fn(p.n, p.m, |i, j| 0.25 * (i as f64) - 0.5 * (j as f64 * j as f64)),
    ];
    probes.iter().all(|x| {
        let lhs = evaluate_objective(p, x, 0).unwrap_or(f64::NAN);
        let rhs = x.norm_squared() / (2.0 * split.gamma) + split.h.eval(x);
        (lhs - rhs).abs() <= 1e-9 * (1.0 + lhs.abs() + rhs.abs())
    })
}

/// The matrix perspective relaxation for objectives of the form
/// `(1/2 gamma) ||X||_F^2 + h(X)`:
///
/// ```text
///   min  lambda tr(Y) + (1/2 gamma) tr(theta) + h(X)
///   s.t. [[theta, X^T], [X, Y]] PSD,  0 <= Y <= I,  tr(Y) <= k
/// ```
///
/// `h` enters through one rotated second-order cone `t >= ||X_Omega - A_Omega||^2`.
pub fn build_mprt(p: &LowRankQuadraticProblem) -> Result<ConicProgram> {
    p.validate()?;
    if p.split.is_none() || !split_matches(p) {
        return Err(Error::NotSeparable);
    }
    if !p.constraints.is_empty() {
        return Err(Error::InvalidArgument(
            "the perspective relaxation does not take quadratic constraints".into(),
        ));
    }
    let (q, transposed) = row_form(p);
    let split = q.split.as_ref().expect("checked above");
    let (n, m) = (q.n, q.m);

    let mut prog = ConicProgram::new();
    let cp = prog.add_psd_block(COUPLING, m + n)?;
    let cv = prog.region_view(cp, 0, 0, m + n, m + n);
    prog.define_view(COUPLING, cv)?;
    let theta = prog.region_view(cp, 0, 0, m, m);
    let x = prog.region_view(cp, m, 0, n, m);
    let y = prog.region_view(cp, m, m, n, n);
    prog.define_view("theta", theta.clone())?;
    prog.define_view("X", x.clone())?;
    add_projection_hull(&mut prog, &y, q.k, q.lambda)?;
    for j in 0..m {
        prog.add_objective(term(&theta, j, j), 1.0 / (2.0 * split.gamma));
    }

    let h = &split.h;
    if !h.mask.is_empty() && h.scale != 0.0 {
        // (a, b, w) with a - b = 1 and ||(b, w)|| <= a gives a + b >= ||w||^2
        let soc = prog.add_soc_block("loss", 2 + h.mask.len())?;
        let (a, b) = (prog.scalar(soc, 0), prog.scalar(soc, 1));
        prog.add_equality(&LinExpr::term(a).with(b, -1.0), 1.0)?;
        for (k, &(i, j)) in h.mask.iter().enumerate() {
            let w = prog.scalar(soc, 2 + k);
            prog.add_equality(&LinExpr::term(w).with(term(&x, i, j), -1.0), -h.targets.get(i, j))?;
        }
        prog.add_objective(a, h.scale);
        prog.add_objective(b, h.scale);
    }
    finish_orientation(&mut prog, transposed)?;
    Ok(prog)
}
