mod common;

use common::{close, optimal_value, tight, Gen};
use lowrank_lift::bench::{example1_instance, solve_mc, McSpec, Relaxation};
use lowrank_lift::conic::{ConicProgram, SolveStatus};
use lowrank_lift::library::encode_matrix_completion;
use lowrank_lift::linalg::{commutation_index, DenseMatrix, SymMatrix};
use lowrank_lift::problem::{LiftedBlocks, LowRankQuadraticProblem, ObservedMatrix};
use lowrank_lift::relax::{
    add_rlt_inequalities, add_symmetry_constraints, add_triangle_inequalities, add_x_symmetry_constraints,
    build_compact_lifted, build_full_lifted, build_mprt, full_lifted_violation, reconstruct_eliminated,
    triangle_triplets, LiftedPoint, RltSystem, StrengtheningOptions,
};
use lowrank_lift::solver::{decode, solve, SolverSettings};
use lowrank_lift::Error;
use nalgebra::DMatrix;

/// `min <I, vv^T>` over `n x m` with every rank allowed: the only data is the
/// shape, which is what the structural tests care about.
fn plain(n: usize, m: usize) -> LowRankQuadraticProblem {
    LowRankQuadraticProblem::new(SymMatrix::identity(n * m), DenseMatrix::zeros(n, m), 0.0, n).unwrap()
}

/// Values of the `>= 0` rows from `first` on: the slack of such a row is the
/// value of its left-hand side.
fn cut_values(prog: &ConicProgram, x: &[f64], first: usize) -> Vec<f64> {
    prog.rows()[first..]
        .iter()
        .map(|row| {
            let k = row.idx.iter().position(|&v| prog.is_slack_block(prog.block_of(v))).unwrap();
            x[row.idx[k]]
        })
        .collect()
}

/// `(X, Y)` with `Y` a random projection and `X = Y G` (or `Y S Y` when
/// symmetric), so the exact lifting satisfies every row of the full form.
fn exact_point(g: &mut Gen, n: usize, m: usize, symmetric: bool) -> LiftedPoint {
    let r = g.range(0, n);
    let y = g.projection(n, r);
    let x = if symmetric {
        &y * g.symmetric(n) * &y
    } else {
        &y * g.gaussian(n, m)
    };
    LiftedPoint::exact(&x, &y)
}

#[test]
fn one_by_one_instance_has_value_zero() {
    let p = LowRankQuadraticProblem::new(SymMatrix::identity(1), DenseMatrix::zeros(1, 1), 0.0, 1).unwrap();
    let full = build_full_lifted(&p, &StrengtheningOptions::default()).unwrap();
    assert!(optimal_value(&full).abs() < 1e-6);
    assert!(optimal_value(&build_compact_lifted(&p).unwrap()).abs() < 1e-6);
}

#[test]
fn full_and_compact_agree() {
    for seed in 0..10 {
        let p = Gen::new(seed).quadratic_problem(3);
        let full = optimal_value(&build_full_lifted(&p, &StrengtheningOptions::default()).unwrap());
        let compact = optimal_value(&build_compact_lifted(&p).unwrap());
        assert!(close(full, compact, 1e-4), "seed {seed}: {full} vs {compact}");
    }
}

#[test]
fn perspective_is_weaker_than_compact() {
    for seed in 0..10 {
        let mut g = Gen::new(100 + seed);
        let (n, m) = (g.range(1, 4), g.range(1, 4));
        let obs = g.observed(n, m, 0.6);
        let gamma = 10f64.powf(g.uniform(-1.0, 3.0));
        let k = g.range(1, n);
        let lambda = if g.coin(0.5) { 0.0 } else { 0.5 };
        let p = encode_matrix_completion(&obs, lambda, k, Some(gamma), 0.5).unwrap();
        let mprt = optimal_value(&build_mprt(&p).unwrap());
        let compact = optimal_value(&build_compact_lifted(&p).unwrap());
        assert!(mprt <= compact + 1e-4 * (1.0 + compact.abs()), "seed {seed}: {mprt} > {compact}");
    }
}

#[test]
fn perspective_needs_a_split() {
    let p = plain(2, 2);
    assert!(matches!(build_mprt(&p), Err(Error::NotSeparable)));
    // a declared split that does not reproduce the objective is rejected too
    let obs = ObservedMatrix::fully_observed(DenseMatrix::identity(2));
    let mut q = encode_matrix_completion(&obs, 0.0, 1, Some(1.0), 0.5).unwrap();
    q.split.as_mut().unwrap().gamma = 2.0;
    assert!(matches!(build_mprt(&q), Err(Error::NotSeparable)));
}

#[test]
fn perspective_vanishes_at_huge_gamma() {
    let obs = ObservedMatrix::new(DenseMatrix::from(DMatrix::from_element(3, 2, 1.0)), vec![]).unwrap();
    let p = encode_matrix_completion(&obs, 0.0, 1, Some(1e12), 0.5).unwrap();
    assert!(optimal_value(&build_mprt(&p).unwrap()).abs() < 1e-6);
}

/// Ties added by the symmetry rows, counted from the orbits directly.
fn expected_symmetry_ties(n: usize, m: usize) -> usize {
    let nn = n * n;
    let canon = |p: usize, q: usize| (p.max(q), p.min(q));
    let moved = (0..nn)
        .flat_map(|q| (q..nn).map(move |p| (p, q)))
        .filter(|&(p, q)| canon(commutation_index(n, p), commutation_index(n, q)) != canon(p, q))
        .count();
    let wxy = (0..nn).filter(|&q| commutation_index(n, q) != q).count() / 2;
    moved / 2 + n * m * wxy
}

#[test]
fn symmetry_row_counts() {
    for (n, m) in [(1, 1), (1, 3), (2, 1), (2, 2), (3, 2)] {
        let mut prog = build_full_lifted(&plain(n, m), &StrengtheningOptions::default()).unwrap();
        let before = prog.num_rows();
        add_symmetry_constraints(&mut prog).unwrap();
        assert_eq!(prog.num_rows() - before, expected_symmetry_ties(n, m), "{n}x{m}");
    }
    assert_eq!(expected_symmetry_ties(1, 4), 0);
    // only (1,2) moves under K for n = 2
    assert_eq!(commutation_index(2, 1), 2);
}

#[test]
fn symmetry_needs_the_full_form() {
    let mut prog = build_compact_lifted(&plain(2, 2)).unwrap();
    assert!(matches!(add_symmetry_constraints(&mut prog), Err(Error::MissingVariable(_))));
    assert!(matches!(add_triangle_inequalities(&mut prog, 10), Err(Error::MissingVariable(_))));
}

#[test]
fn x_symmetry_rules() {
    let mut one = build_full_lifted(&plain(1, 1), &StrengtheningOptions::default()).unwrap();
    let before = one.num_rows();
    add_x_symmetry_constraints(&mut one).unwrap();
    assert_eq!(one.num_rows(), before);

    let mut rect = build_full_lifted(&plain(2, 3), &StrengtheningOptions::default()).unwrap();
    assert!(matches!(add_x_symmetry_constraints(&mut rect), Err(Error::InvalidArgument(_))));
}

#[test]
fn x_symmetry_gives_a_symmetric_solution() {
    // pull X toward a nonsymmetric target
    let target = DMatrix::from_row_slice(2, 2, &[1.0, 2.0, -1.0, 0.5]);
    let d = DenseMatrix::from(target * -2.0);
    let p = LowRankQuadraticProblem::new(SymMatrix::identity(4), d, 0.0, 2).unwrap();
    let opts = StrengtheningOptions {
        symmetry_x: true,
        ..StrengtheningOptions::default()
    };
    let prog = build_full_lifted(&p, &opts).unwrap();
    let sol = solve(&prog, &tight()).unwrap();
    assert_eq!(sol.status, SolveStatus::Optimal);
    let x = decode(&prog, &sol).unwrap().x.into_inner();
    assert!((&x - x.transpose()).amax() < 1e-6, "{x}");
    // nearest symmetric matrix to the target
    assert!((x[(0, 1)] - 0.5).abs() < 1e-4, "{x}");

    let mut g = Gen::new(3);
    let point = exact_point(&mut g, 2, 2, true);
    assert!(prog.violation(&point.embed(&prog).unwrap()).unwrap().max() < 1e-10);
}

#[test]
fn triangle_cut_examples() {
    let opts = StrengtheningOptions {
        triangle: true,
        triplet_budget: 1,
        ..StrengtheningOptions::default()
    };
    let p = plain(3, 1);
    let base = build_full_lifted(&p, &StrengtheningOptions::default()).unwrap().num_rows();
    let prog = build_full_lifted(&p, &opts).unwrap();
    assert_eq!(prog.num_rows(), base + 4);

    let mut e1 = DMatrix::zeros(3, 3);
    e1[(0, 0)] = 1.0;
    let pt = LiftedPoint::exact(&DMatrix::zeros(3, 1), &e1);
    let v = cut_values(&prog, &pt.embed(&prog).unwrap(), base);
    assert!(v[0].abs() < 1e-14, "{v:?}");
    assert!(v.iter().all(|&c| c >= -1e-14));

    let pt = LiftedPoint::exact(&DMatrix::zeros(3, 1), &DMatrix::identity(3, 3));
    let v = cut_values(&prog, &pt.embed(&prog).unwrap(), base);
    assert!((v[0] - 1.0).abs() < 1e-14, "{v:?}");
}

#[test]
fn triplets_are_lexicographic_and_budgeted() {
    assert_eq!(triangle_triplets(4, 100), vec![(0, 1, 2), (0, 1, 3), (0, 2, 3), (1, 2, 3)]);
    assert_eq!(triangle_triplets(4, 2), vec![(0, 1, 2), (0, 1, 3)]);
    assert!(triangle_triplets(2, 10).is_empty());
}

#[test]
fn rlt_single_row_is_a_perfect_square() {
    let mut g = Gen::new(11);
    let p = plain(2, 2);
    let point = exact_point(&mut g, 2, 2, false);
    let a = g.gaussian(1, 4);
    let beta = 0.3;
    let mut prog = build_full_lifted(&p, &StrengtheningOptions::default()).unwrap();
    let base = prog.num_rows();
    let sys = RltSystem {
        a: DenseMatrix::from(a.clone()),
        b: vec![beta],
    };
    add_rlt_inequalities(&mut prog, &sys).unwrap();
    let v = cut_values(&prog, &point.embed(&prog).unwrap(), base);
    let ax: f64 = a.iter().zip(lowrank_lift::linalg::vec_t(&point.x)).map(|(u, w)| u * w).sum();
    assert_eq!(v.len(), 1);
    assert!((v[0] - (beta - ax).powi(2)).abs() < 1e-12);

    let zero = RltSystem {
        a: DenseMatrix::zeros(2, 4),
        b: vec![1.0, 2.0],
    };
    let mut prog = build_full_lifted(&p, &StrengtheningOptions::default()).unwrap();
    add_rlt_inequalities(&mut prog, &zero).unwrap();
    let v = cut_values(&prog, &point.embed(&prog).unwrap(), base);
    assert_eq!(v, vec![1.0, 2.0, 4.0]);

    let bad = RltSystem {
        a: DenseMatrix::zeros(1, 3),
        b: vec![0.0],
    };
    assert!(matches!(add_rlt_inequalities(&mut prog, &bad), Err(Error::DimensionMismatch(_))));
}

#[test]
fn cuts_keep_exact_lifted_points() {
    let mut g = Gen::new(21);
    for t in 0..20 {
        let n = g.range(1, 3);
        let symmetric = t % 2 == 0;
        let m = if symmetric { n } else { g.range(1, 3) };
        let point = exact_point(&mut g, n, m, symmetric);
        let xv = lowrank_lift::linalg::vec_t(&point.x);
        let a = g.gaussian(3, n * m);
        let b: Vec<f64> = (0..3)
            .map(|r| a.row(r).iter().zip(&xv).map(|(u, w)| u * w).sum::<f64>() + g.uniform(0.0, 1.0))
            .collect();
        let opts = StrengtheningOptions {
            symmetry_y: true,
            symmetry_x: symmetric,
            triangle: true,
            triplet_budget: 1000,
            rlt: Some(RltSystem {
                a: DenseMatrix::from(a),
                b,
            }),
        };
        let prog = build_full_lifted(&plain(n, m), &opts).unwrap();
        let viol = prog.violation(&point.embed(&prog).unwrap()).unwrap();
        assert!(viol.max() < 1e-9, "point {t}: {viol:?}");
    }
}

#[test]
fn reconstruction_of_zero() {
    let pt = reconstruct_eliminated(&DMatrix::zeros(2, 3), &DMatrix::zeros(2, 2), &DMatrix::zeros(6, 6)).unwrap();
    assert!(pt.wxy.iter().chain(pt.wyy.iter()).chain(pt.y.iter()).all(|&v| v == 0.0));
}

#[test]
fn reconstruction_of_a_rank_one_point() {
    let mut g = Gen::new(5);
    let u = g.gaussian(3, 1).normalize();
    let v = g.gaussian(2, 1).normalize();
    let x = &u * v.transpose();
    let exact = LiftedPoint::exact(&x, &(&u * u.transpose()));
    let pt = reconstruct_eliminated(&x, &DMatrix::identity(3, 3), &exact.wxx).unwrap();
    assert!((&pt.y - &u * u.transpose()).amax() < 1e-8);
    assert!((&pt.wyy - &exact.wyy).amax() < 1e-8);
    assert!((&pt.wxy - &exact.wxy).amax() < 1e-8);
}

#[test]
fn reconstruction_rejects_infeasible_input() {
    let x = DMatrix::from_element(2, 2, 1.0);
    let r = reconstruct_eliminated(&x, &DMatrix::zeros(2, 2), &DMatrix::zeros(4, 4));
    assert!(matches!(r, Err(Error::InfeasibleInput(_))));
}

fn reconstruct_from(p: &LowRankQuadraticProblem) -> f64 {
    let prog = build_compact_lifted(p).unwrap();
    let sol = solve(&prog, &tight()).unwrap();
    assert_eq!(sol.status, SolveStatus::Optimal);
    let dec = decode(&prog, &sol).unwrap();
    let Some(LiftedBlocks::Full { wxx, .. }) = &dec.lifted else {
        panic!("compact form carries Wxx");
    };
    let pt = reconstruct_eliminated(dec.x.as_matrix(), &dec.y.to_dense(), &wxx.to_dense()).unwrap();
    full_lifted_violation(p, &pt).unwrap().max()
}

#[test]
fn reconstructed_points_are_feasible_for_the_full_form() {
    for seed in 0..5 {
        let mut g = Gen::new(200 + seed);
        let (n, m) = (g.range(1, 3), g.range(1, 3));
        let obs = g.observed(n, m, 0.7);
        let p = encode_matrix_completion(&obs, 0.1, g.range(1, n), Some(2.0), 0.5).unwrap();
        let v = reconstruct_from(&p);
        assert!(v <= 1e-5, "seed {seed}: {v:e}");
    }
}

fn example1_spec() -> McSpec {
    let inst = example1_instance();
    McSpec {
        gamma: inst.gamma,
        k: inst.k,
        lambda: inst.lambda,
        loss_scale: 0.5,
    }
}

#[test]
fn example1_reconstruction_is_feasible() {
    let inst = example1_instance();
    let solved = solve_mc(Relaxation::Compact, &inst.obs, &example1_spec(), &SolverSettings::default()).unwrap();
    assert_eq!(solved.status, SolveStatus::Optimal);
    let dec = solved.solution.unwrap();
    let Some(LiftedBlocks::Full { wxx, .. }) = &dec.lifted else {
        panic!("compact form carries Wxx");
    };
    let pt = reconstruct_eliminated(dec.x.as_matrix(), &dec.y.to_dense(), &wxx.to_dense()).unwrap();
    let p = encode_matrix_completion(&inst.obs, inst.lambda, inst.k, inst.gamma, 0.5).unwrap();
    let v = full_lifted_violation(&p, &pt).unwrap().max();
    assert!(v <= 1e-5, "{v:e}");
}

#[test]
fn example1_symmetry_lifts_the_bound() {
    let inst = example1_instance();
    let s = SolverSettings::default();
    let run = |r| {
        let out = solve_mc(r, &inst.obs, &example1_spec(), &s).unwrap();
        assert_eq!(out.status, SolveStatus::Optimal, "{r}");
        out.lower_bound
    };
    let (plain_full, sym, compact) = (run(Relaxation::Full), run(Relaxation::FullPerm), run(Relaxation::Compact));
    assert!(close(plain_full, compact, 1e-4), "{plain_full} vs {compact}");
    assert!(sym - compact >= 0.5, "{sym} vs {compact}");
}
