#![allow(dead_code)]

use lowrank_lift::conic::{ConicProgram, SolveStatus};
use lowrank_lift::linalg::{DenseMatrix, SymMatrix};
use lowrank_lift::problem::{LowRankQuadraticProblem, ObservedMatrix};
use lowrank_lift::rng::{seeded, BoxMuller};
use lowrank_lift::solver::{solve, SolverSettings};
use nalgebra::DMatrix;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub struct Gen {
    pub rng: ChaCha8Rng,
    normal: BoxMuller,
}

impl Gen {
    pub fn new(seed: u64) -> Self {
        Gen {
            rng: seeded(seed),
            normal: BoxMuller::new(),
        }
    }

    pub fn gaussian(&mut self, rows: usize, cols: usize) -> DMatrix<f64> {
        self.normal.matrix(&mut self.rng, rows, cols)
    }

    pub fn symmetric(&mut self, n: usize) -> DMatrix<f64> {
        let g = self.gaussian(n, n);
        (&g + g.transpose()) * 0.5
    }

    pub fn range(&mut self, lo: usize, hi: usize) -> usize {
        self.rng.random_range(lo..=hi)
    }

    pub fn uniform(&mut self, lo: f64, hi: f64) -> f64 {
        self.rng.random_range(lo..hi)
    }

    pub fn coin(&mut self, p: f64) -> bool {
        self.rng.random_bool(p)
    }

    /// A random projection of rank `r` onto the span of `r` Gaussian vectors.
    pub fn projection(&mut self, n: usize, r: usize) -> DMatrix<f64> {
        if r == 0 {
            return DMatrix::zeros(n, n);
        }
        let q = self.gaussian(n, r).qr().q();
        &q * q.transpose()
    }

    /// Observation set with each cell kept with probability `p`.
    pub fn omega(&mut self, n: usize, m: usize, p: f64) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for i in 0..n {
            for j in 0..m {
                if self.coin(p) {
                    out.push((i, j));
                }
            }
        }
        out
    }

    pub fn observed(&mut self, n: usize, m: usize, p: f64) -> ObservedMatrix {
        let a = self.gaussian(n, m);
        let om = self.omega(n, m, p);
        ObservedMatrix::new(DenseMatrix::from(a), om).unwrap()
    }

    /// `min lambda rank + <H, vv^T> + <D, X>` with `H = G G^T / nm + I / 10`.
    pub fn quadratic_problem(&mut self, max_side: usize) -> LowRankQuadraticProblem {
        let n = self.range(1, max_side);
        let m = self.range(1, max_side);
        let nm = n * m;
        let g = self.gaussian(nm, nm);
        let h = &g * g.transpose() / nm as f64 + DMatrix::identity(nm, nm) * 0.1;
        let d = self.gaussian(n, m);
        let lambda = if self.coin(0.5) { 0.0 } else { 0.5 };
        let k = self.range(1, 2.min(n));
        LowRankQuadraticProblem::new(SymMatrix::from_dense_symmetrized(&h), DenseMatrix::from(d), lambda, k).unwrap()
    }

    /// A matrix-completion encoding, which carries a Frobenius split: `H` is
    /// diagonal with entries `1 / 2 gamma` plus `1/2` on observed cells.
    pub fn separable_problem(&mut self, max_side: usize) -> LowRankQuadraticProblem {
        let n = self.range(1, max_side);
        let m = self.range(1, max_side);
        let obs = self.observed(n, m, 0.6);
        let gamma = 10f64.powf(self.uniform(-1.0, 2.0));
        let lambda = if self.coin(0.5) { 0.0 } else { 0.5 };
        let k = self.range(1, 2.min(n));
        lowrank_lift::library::encode_matrix_completion(&obs, lambda, k, Some(gamma), 0.5).unwrap()
    }
}

pub fn tight() -> SolverSettings {
    SolverSettings::default().with_tolerance(1e-7)
}

/// Solves and returns `(lower bound, status)`.
pub fn value(prog: &ConicProgram, settings: &SolverSettings) -> (f64, SolveStatus) {
    let sol = solve(prog, settings).unwrap();
    (sol.primal_objective + prog.objective_constant(), sol.status)
}

pub fn optimal_value(prog: &ConicProgram) -> f64 {
    let (v, st) = value(prog, &tight());
    assert_eq!(st, SolveStatus::Optimal, "solver did not converge");
    v
}

pub fn close(a: f64, b: f64, rel: f64) -> bool {
    (a - b).abs() <= rel * (1.0 + a.abs().max(b.abs()))
}

/// Programs every solver property is checked on: hand-made cone tests and
/// small instances of each relaxation family.
pub fn regression_suite() -> Vec<(String, ConicProgram)> {
    use lowrank_lift::bench::{build_bp, build_mc, build_rrr, generate_instance, McSpec, Relaxation};
    use lowrank_lift::conic::LinExpr;
    use lowrank_lift::library::{RRRInstance, RltMode};

    let mut out = Vec::new();

    let mut toy = ConicProgram::new();
    let id = toy.add_psd_block("X", 2).unwrap();
    toy.add_objective(toy.entry(id, 0, 0), 1.0);
    toy.add_objective(toy.entry(id, 1, 1), 1.0);
    toy.add_equality(&LinExpr::term(toy.entry(id, 0, 0)), 1.0).unwrap();
    out.push(("toy-sdp".to_string(), toy));

    let mut lp = ConicProgram::new();
    let id = lp.add_free_block("x", 1).unwrap();
    let x = lp.scalar(id, 0);
    lp.add_objective(x, 1.0);
    lp.add_inequality_ge(&LinExpr::term(x), 3.0).unwrap();
    out.push(("bounded-scalar".to_string(), lp));

    for seed in 0..3u64 {
        let obs = generate_instance(3, 3, 1, 0.1, 0.7, seed).unwrap();
        let spec = McSpec {
            gamma: Some(10f64.powi(seed as i32)),
            k: 1,
            lambda: 0.1 * seed as f64,
            loss_scale: 0.5,
        };
        for r in [Relaxation::Mprt, Relaxation::Full, Relaxation::FullPerm, Relaxation::Compact, Relaxation::Reduced] {
            out.push((format!("{r}-{seed}"), build_mc(r, &obs, &spec).unwrap()));
        }
        let full = generate_instance(3, 3, 1, 0.0, 1.0, seed).unwrap();
        out.push((format!("bp-{seed}"), build_bp(Relaxation::BpReduced, &full, RltMode::All).unwrap()));
        let mut g = Gen::new(seed);
        let inst = RRRInstance::new(
            DenseMatrix::from(g.gaussian(4, 2)),
            DenseMatrix::from(g.gaussian(4, 2)),
            0.5,
        )
        .unwrap();
        out.push((format!("rrr-{seed}"), build_rrr(Relaxation::RrrCompact, &inst).unwrap()));
    }

    for (seed, gamma) in [(0u64, 1e2), (1, 1e4)] {
        let obs = generate_instance(6, 6, 2, 0.1, 0.5, seed).unwrap();
        let spec = McSpec {
            gamma: Some(gamma),
            k: 2,
            lambda: 0.0,
            loss_scale: 0.5,
        };
        for r in [Relaxation::Mprt, Relaxation::Compact, Relaxation::Grouped] {
            out.push((format!("{r}-6x6-{seed}"), build_mc(r, &obs, &spec).unwrap()));
        }
    }
    let ex = lowrank_lift::bench::example1_instance();
    let spec = McSpec {
        gamma: ex.gamma,
        k: ex.k,
        lambda: ex.lambda,
        loss_scale: 0.5,
    };
    out.push(("example1-mprt".to_string(), build_mc(Relaxation::Mprt, &ex.obs, &spec).unwrap()));
    out
}
