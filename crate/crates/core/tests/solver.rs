mod common;

use common::regression_suite;
use lowrank_lift::bench::{build_mc, example1_instance, McSpec, Relaxation};
use lowrank_lift::conic::{ConicProgram, ConicSolution, LinExpr, SolveStatus};
use lowrank_lift::linalg::min_eigenvalue;
use lowrank_lift::solver::{decode, solve, SolverSettings};

/// Checks made on every optimal solve of the regression suite.
fn certify(name: &str, p: &ConicProgram, sol: &ConicSolution, s: &SolverSettings) {
    assert_eq!(sol.status, SolveStatus::Optimal, "{name}");
    let r = p.residuals(&sol.x, &sol.y, &sol.s);
    let (pobj, dobj) = (sol.primal_objective, sol.dual_objective);
    // recomputed from (x, y, s) alone, with a hair of slack for summation
    // order
    let slack = 1.0 + 1e-9;
    assert!(r.primal <= slack * s.eps_primal * (1.0 + p.rhs_norm()), "{name}: primal {}", r.primal);
    assert!(r.dual <= slack * s.eps_dual * (1.0 + p.objective_norm()), "{name}: dual {}", r.dual);
    assert!(
        r.gap <= slack * s.eps_gap * (1.0 + pobj.abs() + dobj.abs()),
        "{name}: gap {}",
        r.gap
    );
    // weak duality up to the gap tolerance
    assert!(dobj <= pobj + s.eps_gap * (1.0 + pobj.abs() + dobj.abs()), "{name}");
}

#[test]
fn regression_suite_is_certified_and_deterministic() {
    let s = SolverSettings::default();
    for (name, p) in regression_suite() {
        let a = solve(&p, &s).unwrap();
        certify(&name, &p, &a, &s);
        let b = solve(&p, &s).unwrap();
        assert_eq!(a.x, b.x, "{name}");
        assert_eq!(a.y, b.y, "{name}");
        assert_eq!(a.iterations, b.iterations, "{name}");
        assert_eq!(a.residual_history, b.residual_history, "{name}");
    }
}

#[test]
fn smoothed_residual_trends_down() {
    let s = SolverSettings::default();
    let per_window = 100 / s.check_interval;
    for (name, p) in regression_suite() {
        let sol = solve(&p, &s).unwrap();
        let windows: Vec<f64> = sol
            .residual_history
            .chunks(per_window)
            .map(|c| c.iter().sum::<f64>() / c.len() as f64)
            .collect();
        let mut low = f64::INFINITY;
        for (k, &w) in windows.iter().enumerate() {
            assert!(w <= 20.0 * low, "{name}: window {k} at {w:e} after a low of {low:e}");
            low = low.min(w);
        }
        if windows.len() > 1 {
            assert!(windows[windows.len() - 1] < windows[0], "{name}");
        }
    }
}

#[test]
fn trace_minimization_toy() {
    let (_, p) = regression_suite().remove(0);
    let sol = solve(&p, &SolverSettings::default()).unwrap();
    assert!((sol.primal_objective - 1.0).abs() < 1e-6);
    let id = p.block_id("X").unwrap();
    let at = |i, j| sol.x[p.entry(id, i, j).var] * p.entry(id, i, j).coef;
    assert!((at(0, 0) - 1.0).abs() < 1e-6 && at(1, 1).abs() < 1e-6 && at(1, 0).abs() < 1e-6);
}

#[test]
fn bounded_scalar() {
    let (_, p) = regression_suite().remove(1);
    let sol = solve(&p, &SolverSettings::default().with_tolerance(1e-10)).unwrap();
    assert!((sol.primal_objective - 3.0).abs() < 1e-8, "{}", sol.primal_objective);
}

#[test]
fn iteration_cap_returns_the_best_iterate() {
    let inst = example1_instance();
    let spec = McSpec {
        gamma: inst.gamma,
        k: inst.k,
        lambda: inst.lambda,
        loss_scale: 0.5,
    };
    let p = build_mc(Relaxation::Compact, &inst.obs, &spec).unwrap();
    let sol = solve(&p, &SolverSettings::default().with_max_iterations(60)).unwrap();
    assert_eq!(sol.status, SolveStatus::MaxIterations);
    assert_eq!(sol.iterations, 60);
    assert!(sol.x.iter().all(|v| v.is_finite()));
}

#[test]
fn example1_mprt_projection_respects_the_cap() {
    let inst = example1_instance();
    let spec = McSpec {
        gamma: inst.gamma,
        k: inst.k,
        lambda: inst.lambda,
        loss_scale: 0.5,
    };
    let p = build_mc(Relaxation::Mprt, &inst.obs, &spec).unwrap();
    let dec = decode(&p, &solve(&p, &SolverSettings::default()).unwrap()).unwrap();
    let y = dec.y.to_dense();
    assert!(dec.y.trace() <= 2.0 + 1e-6, "{}", dec.y.trace());
    assert!(min_eigenvalue(&y).unwrap() > -1e-5);
    let complement = nalgebra::DMatrix::identity(7, 7) - &y;
    assert!(min_eigenvalue(&complement).unwrap() > -1e-5);
}

#[test]
fn decode_round_trips_a_hand_built_point() {
    let mut p = ConicProgram::new();
    let id = p.add_psd_block("M", 3).unwrap();
    let view = p.region_view(id, 1, 1, 2, 2);
    p.define_view("Y", view).unwrap();
    let xv = p.region_view(id, 0, 1, 1, 2);
    p.define_view("X", xv).unwrap();
    p.add_equality(&LinExpr::term(p.entry(id, 0, 0)), 1.0).unwrap();
    let m = nalgebra::DMatrix::from_row_slice(3, 3, &[1.0, 0.5, -0.25, 0.5, 2.0, 0.125, -0.25, 0.125, 3.0]);
    let mut x = vec![0.0; p.num_vars()];
    p.assign_view("Y", &m.view((1, 1), (2, 2)).into_owned(), &mut x).unwrap();
    p.assign_view("X", &m.view((0, 1), (1, 2)).into_owned(), &mut x).unwrap();
    let sol = ConicSolution {
        x,
        y: vec![0.0],
        s: vec![0.0; p.num_vars()],
        primal_objective: 0.0,
        dual_objective: 0.0,
        residuals: Default::default(),
        status: SolveStatus::Optimal,
        iterations: 0,
        wall_time: 0.0,
        residual_history: vec![],
    };
    let dec = decode(&p, &sol).unwrap();
    assert_eq!(dec.y.to_dense(), m.view((1, 1), (2, 2)).into_owned());
    assert_eq!(dec.x.as_matrix(), &m.view((0, 1), (1, 2)).into_owned());
}
