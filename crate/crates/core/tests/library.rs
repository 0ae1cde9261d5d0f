mod common;

use common::{close, optimal_value, Gen};
use lowrank_lift::bench::{example1_instance, generate_instance, solve_bp, solve_mc, solve_rrr, McSpec, Relaxation};
use lowrank_lift::conic::SolveStatus;
use lowrank_lift::library::{
    bp_pairs, bp_reduced_pairs, build_bp_reduced, build_mc_grouped, build_mc_reduced, build_rrr_compact,
    build_rrr_lifted, coarsen_masks, encode_matrix_completion, group_masks, RRRInstance, RltMode,
};
use lowrank_lift::linalg::DenseMatrix;
use lowrank_lift::problem::ObservedMatrix;
use lowrank_lift::relax::build_compact_lifted;
use lowrank_lift::solver::{decode, solve, SolverSettings};
use lowrank_lift::Error;
use nalgebra::DMatrix;

fn mc_params(g: &mut Gen, n: usize) -> (f64, usize, Option<f64>) {
    let lambda = if g.coin(0.5) { 0.0 } else { 0.3 };
    let gamma = if g.coin(0.7) { Some(10f64.powf(g.uniform(-1.0, 2.0))) } else { None };
    (lambda, g.range(1, n), gamma)
}

#[test]
fn reduced_matches_compact() {
    for seed in 0..10 {
        let mut g = Gen::new(300 + seed);
        let (n, m) = (g.range(1, 4), g.range(1, 4));
        let obs = g.observed(n, m, 0.6);
        let (lambda, k, gamma) = mc_params(&mut g, n);
        let p = encode_matrix_completion(&obs, lambda, k, gamma, 0.5).unwrap();
        let compact = optimal_value(&build_compact_lifted(&p).unwrap());
        let reduced = optimal_value(&build_mc_reduced(&obs, lambda, k, gamma, 0.5).unwrap());
        assert!(close(compact, reduced, 1e-4), "seed {seed}: {compact} vs {reduced}");
    }
}

#[test]
fn example1_reduced_matches_compact() {
    let inst = example1_instance();
    let spec = McSpec {
        gamma: inst.gamma,
        k: inst.k,
        lambda: inst.lambda,
        loss_scale: 0.5,
    };
    let s = SolverSettings::default();
    let compact = solve_mc(Relaxation::Compact, &inst.obs, &spec, &s).unwrap();
    let reduced = solve_mc(Relaxation::Reduced, &inst.obs, &spec, &s).unwrap();
    assert_eq!(compact.status, SolveStatus::Optimal);
    assert_eq!(reduced.status, SolveStatus::Optimal);
    assert!(
        close(compact.lower_bound, reduced.lower_bound, 1e-4),
        "{} vs {}",
        compact.lower_bound,
        reduced.lower_bound
    );
}

#[test]
fn reduced_with_nothing_observed_is_zero() {
    let obs = ObservedMatrix::new(DenseMatrix::from(DMatrix::from_element(3, 2, 5.0)), vec![]).unwrap();
    let v = optimal_value(&build_mc_reduced(&obs, 0.0, 1, None, 0.5).unwrap());
    assert!(v.abs() < 1e-6, "{v}");
}

#[test]
fn grouping_examples() {
    let a = DenseMatrix::zeros(3, 3);
    let same = ObservedMatrix::new(a.clone(), vec![(0, 1), (1, 1), (2, 1)]).unwrap();
    let groups = group_masks(&same);
    assert_eq!(groups.len(), 1);
    assert_eq!(groups[0].rows, vec![0, 1, 2]);
    assert_eq!(groups[0].mask, vec![1]);

    let distinct = ObservedMatrix::new(a, vec![(0, 0), (1, 1), (2, 0), (2, 2)]).unwrap();
    assert_eq!(group_masks(&distinct).len(), 3);
    let grouped = build_mc_grouped(&distinct, 0.1, 1, Some(1.0), 0.5).unwrap();
    let reduced = build_mc_reduced(&distinct, 0.1, 1, Some(1.0), 0.5).unwrap();
    assert_eq!(grouped.num_vars(), reduced.num_vars());
    assert_eq!(grouped.num_rows(), reduced.num_rows());
    assert_eq!(grouped.objective(), reduced.objective());
}

#[test]
fn groups_partition_the_rows() {
    for seed in 0..50 {
        let mut g = Gen::new(seed);
        let (n, m) = (g.range(1, 8), g.range(1, 3));
        let obs = g.observed(n, m, 0.5);
        let mut seen = vec![false; n];
        for grp in group_masks(&obs) {
            for &i in &grp.rows {
                assert!(!seen[i]);
                seen[i] = true;
                assert_eq!(obs.row_mask(i), grp.mask);
            }
        }
        assert!(seen.into_iter().all(|s| s));
    }
}

#[test]
fn grouped_matches_reduced() {
    let mut checked = 0;
    for seed in 0..40 {
        let mut g = Gen::new(400 + seed);
        let (n, m) = (g.range(3, 5), 2);
        let obs = g.observed(n, m, 0.5);
        if group_masks(&obs).len() == n {
            continue;
        }
        let (lambda, k, gamma) = mc_params(&mut g, n);
        let reduced = optimal_value(&build_mc_reduced(&obs, lambda, k, gamma, 0.5).unwrap());
        let grouped = optimal_value(&build_mc_grouped(&obs, lambda, k, gamma, 0.5).unwrap());
        assert!(close(reduced, grouped, 1e-4), "seed {seed}: {reduced} vs {grouped}");
        checked += 1;
        if checked == 8 {
            break;
        }
    }
    assert_eq!(checked, 8);
}

#[test]
fn coarsening_examples() {
    let a = DenseMatrix::from_fn(2, 3, |i, j| (i * 3 + j) as f64);
    let same = ObservedMatrix::new(a.clone(), vec![(0, 0), (0, 2), (1, 0), (1, 2)]).unwrap();
    assert_eq!(coarsen_masks(&same, &[(0, 1)]).unwrap(), same);
    let disjoint = ObservedMatrix::new(a.clone(), vec![(0, 0), (1, 1), (1, 2)]).unwrap();
    assert!(coarsen_masks(&disjoint, &[(1, 0)]).unwrap().omega().is_empty());
    assert!(matches!(coarsen_masks(&same, &[(0, 2)]), Err(Error::InvalidArgument(_))));
    assert!(matches!(coarsen_masks(&same, &[(1, 1)]), Err(Error::InvalidArgument(_))));
}

#[test]
fn coarsening_loosens_the_bound() {
    let s = SolverSettings::default().with_tolerance(1e-9);
    for seed in 0..8 {
        let mut g = Gen::new(500 + seed);
        let (n, m) = (g.range(2, 4), g.range(2, 3));
        let obs = g.observed(n, m, 0.7);
        let coarse = coarsen_masks(&obs, &[(0, 1)]).unwrap();
        let (lambda, k, gamma) = mc_params(&mut g, n);
        let value = |o: &ObservedMatrix| {
            let prog = build_mc_reduced(o, lambda, k, gamma, 0.5).unwrap();
            let sol = solve(&prog, &s).unwrap();
            assert_eq!(sol.status, SolveStatus::Optimal);
            sol.primal_objective + prog.objective_constant()
        };
        let (orig, loose) = (value(&obs), value(&coarse));
        assert!(loose <= orig + 1e-6, "seed {seed}: {loose} > {orig}");
    }
}

fn rrr_instance(g: &mut Gen) -> RRRInstance {
    let (n, p, m) = (g.range(1, 5), g.range(1, 4), g.range(1, 4));
    let mu = g.uniform(0.0, 2.0);
    RRRInstance::new(DenseMatrix::from(g.gaussian(n, p)), DenseMatrix::from(g.gaussian(n, m)), mu).unwrap()
}

#[test]
fn regression_lifted_matches_compact() {
    for seed in 0..10 {
        let inst = rrr_instance(&mut Gen::new(600 + seed));
        let lifted = optimal_value(&build_rrr_lifted(&inst).unwrap());
        let compact = optimal_value(&build_rrr_compact(&inst).unwrap());
        assert!(close(lifted, compact, 1e-4), "seed {seed}: {lifted} vs {compact}");
    }
}

#[test]
fn regression_with_zero_response() {
    let mut g = Gen::new(7);
    let inst = RRRInstance::new(DenseMatrix::from(g.gaussian(4, 3)), DenseMatrix::zeros(4, 2), 0.5).unwrap();
    let prog = build_rrr_compact(&inst).unwrap();
    let sol = solve(&prog, &common::tight()).unwrap();
    let dec = decode(&prog, &sol).unwrap();
    assert!((sol.primal_objective + prog.objective_constant()).abs() < 1e-6);
    assert!(dec.x.as_matrix().amax() < 1e-4 && dec.y.to_dense().amax() < 1e-4);
}

#[test]
fn regression_with_a_huge_penalty_is_the_empty_model() {
    let mut g = Gen::new(8);
    let u = g.gaussian(3, 1).normalize();
    let v = g.gaussian(2, 1).normalize();
    let b = &u * v.transpose() * 2.5;
    let inst = RRRInstance::new(DenseMatrix::identity(3), DenseMatrix::from(b.clone()), 1e4).unwrap();
    let solved = solve_rrr(Relaxation::RrrCompact, &inst, &SolverSettings::default()).unwrap();
    assert_eq!(solved.status, SolveStatus::Optimal);
    assert!((solved.lower_bound - b.norm_squared()).abs() < 1e-4, "{}", solved.lower_bound);
}

#[test]
fn regression_block_trace_lives_on_the_predictor_side() {
    let mut g = Gen::new(9);
    let (p, m) = (3, 2);
    let inst = RRRInstance::new(DenseMatrix::from(g.gaussian(5, p)), DenseMatrix::from(g.gaussian(5, m)), 0.1).unwrap();
    for prog in [build_rrr_lifted(&inst).unwrap(), build_rrr_compact(&inst).unwrap()] {
        assert_eq!(prog.view("coupling").unwrap().rows, p + m);
        assert_eq!(prog.view("Y").unwrap().rows, m);
        let x = prog.view("X").unwrap();
        assert_eq!((x.rows, x.cols), (p, m));
    }
    let lifted = build_rrr_lifted(&inst).unwrap();
    assert_eq!(lifted.view("Wxx").unwrap().rows, p * m);
}

#[test]
fn basis_pursuit_pair_sets() {
    let obs = ObservedMatrix::new(DenseMatrix::zeros(2, 3), vec![(0, 0), (0, 2), (1, 1)]).unwrap();
    assert_eq!(bp_pairs(&obs, RltMode::All).len(), 6);
    assert_eq!(bp_pairs(&obs, RltMode::SameRowOnly), vec![(0, 0), (0, 1), (1, 1), (2, 2)]);
    assert_eq!(bp_reduced_pairs(&obs, RltMode::All), bp_pairs(&obs, RltMode::SameRowOnly));
    let sub = RltMode::Subsample { count: 4, seed: 3 };
    let picked = bp_pairs(&obs, sub);
    assert_eq!(picked.len(), 4);
    assert_eq!(picked, bp_pairs(&obs, sub));
    assert!(picked.iter().all(|p| bp_pairs(&obs, RltMode::All).contains(p)));
    assert_eq!(bp_pairs(&obs, RltMode::Subsample { count: 50, seed: 0 }).len(), 6);
}

#[test]
fn basis_pursuit_rank_one() {
    let u = DMatrix::from_column_slice(3, 1, &[1.0, -2.0, 0.5]);
    let v = DMatrix::from_column_slice(3, 1, &[2.0, 1.0, -1.0]);
    let obs = ObservedMatrix::fully_observed(DenseMatrix::from(&u * v.transpose()));
    let solved = solve_bp(Relaxation::BpReduced, &obs, RltMode::All, &SolverSettings::default()).unwrap();
    assert_eq!(solved.status, SolveStatus::Optimal);
    let sol = solved.solution.unwrap();
    assert!(solved.lower_bound <= 1.0 + 1e-4, "{}", solved.lower_bound);
    assert!((solved.lower_bound - sol.y.trace()).abs() < 1e-6);
}

#[test]
fn basis_pursuit_with_nothing_observed() {
    let obs = ObservedMatrix::new(DenseMatrix::zeros(2, 2), vec![]).unwrap();
    let prog = build_bp_reduced(&obs, RltMode::All).unwrap();
    let sol = solve(&prog, &common::tight()).unwrap();
    assert!(sol.primal_objective.abs() < 1e-6);
    assert!(decode(&prog, &sol).unwrap().x.as_matrix().amax() < 1e-4);
}

#[test]
fn basis_pursuit_full_matches_reduced() {
    let s = SolverSettings::default();
    let mut compared = 0;
    for seed in 0..8u64 {
        let mut g = Gen::new(seed);
        let (n, m) = (g.range(2, 4), g.range(2, 4));
        let r = g.range(1, 2.min(n).min(m));
        let obs = generate_instance(n, m, r, 0.0, 0.9, seed).unwrap();
        let full = solve_bp(Relaxation::BpFull, &obs, RltMode::All, &s).unwrap();
        let reduced = solve_bp(Relaxation::BpReduced, &obs, RltMode::SameRowOnly, &s).unwrap();
        if full.status != SolveStatus::Optimal || reduced.status != SolveStatus::Optimal {
            continue;
        }
        assert!(
            close(full.lower_bound, reduced.lower_bound, 1e-4),
            "seed {seed}: {} vs {}",
            full.lower_bound,
            reduced.lower_bound
        );
        compared += 1;
    }
    assert!(compared >= 5, "only {compared} optimal pairs");
}
