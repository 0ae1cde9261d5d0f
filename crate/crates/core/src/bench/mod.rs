//! Synthetic instances, experiment drivers and CSV output.

mod exec;
mod generate;
mod pipeline;

pub use exec::{map_cells, Execution};
pub use generate::generate_instance;
pub use pipeline::{build_bp, build_mc, build_rrr, solve_bp, solve_mc, solve_rrr, McSpec, Relaxation, Solved};

use std::io::{self, Write};

use crate::conic::SolveStatus;
use crate::error::{Error, Result};
use crate::heuristics::{alternating_minimization, gap, AMSettings};
use crate::problem::{read_mc_instance, McInstance, ObservedMatrix};
use crate::solver::SolverSettings;

pub const CSV_HEADER: &str =
    "seed,n,m,p,gamma,relaxation,lower_bound,upper_bound,gap,status,iterations,build_time_s,solve_time_s";

/// Default gamma grid: 13 log-spaced points over `[1e-1, 1e5]`.
pub fn default_gammas() -> Vec<f64> {
    (0..13).map(|i| 10f64.powf(-1.0 + 0.5 * i as f64)).collect()
}

#[derive(Clone, Debug)]
pub struct ExperimentConfig {
    pub n: usize,
    pub m: usize,
    /// Planted rank of the generated data.
    pub rank: usize,
    pub eps: f64,
    /// Observed fraction of entries.
    pub p: f64,
    pub gammas: Vec<f64>,
    /// Rank cap, also the rank of the alternating-minimization bound.
    pub k: usize,
    pub lambda: f64,
    pub loss_scale: f64,
    pub relaxations: Vec<Relaxation>,
    pub seeds: Vec<u64>,
    /// Side lengths (`n = m`) for the scaling study.
    pub sizes: Vec<usize>,
    pub solver: SolverSettings,
    pub exec: Execution,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            n: 8,
            m: 8,
            rank: 2,
            eps: 0.1,
            p: 0.5,
            gammas: default_gammas(),
            k: 2,
            lambda: 0.0,
            loss_scale: 0.5,
            relaxations: vec![Relaxation::Mprt, Relaxation::Compact],
            seeds: (0..10).collect(),
            sizes: vec![4, 6, 8, 10, 12, 14, 16, 18],
            solver: SolverSettings::default(),
            exec: Execution::Parallel,
        }
    }
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidArgument(msg));
        if !(self.p > 0.0 && self.p <= 1.0) {
            return bad(format!("observation fraction {} not in (0, 1]", self.p));
        }
        if self.seeds.is_empty() {
            return bad("at least one seed is required".into());
        }
        if self.relaxations.is_empty() {
            return bad("at least one relaxation is required".into());
        }
        if let Some(r) = self.relaxations.iter().find(|r| !r.is_matrix_completion()) {
            return bad(format!("`{r}` does not relax matrix completion"));
        }
        if let Some(g) = self.gammas.iter().find(|g| !(**g > 0.0 && g.is_finite())) {
            return bad(format!("gamma must be positive, got {g}"));
        }
        if self.k == 0 {
            return bad("rank cap k must be at least 1".into());
        }
        self.solver.validate()
    }
}

/// One CSV line. `gamma = None` is written as `inf`; undefined numbers as
/// `nan`.
#[derive(Clone, Debug, PartialEq)]
pub struct BenchRow {
    pub seed: u64,
    pub n: usize,
    pub m: usize,
    pub p: f64,
    pub gamma: Option<f64>,
    pub relaxation: Relaxation,
    pub lower_bound: f64,
    pub upper_bound: f64,
    pub gap: f64,
    pub status: SolveStatus,
    pub iterations: usize,
    pub build_time_s: f64,
    pub solve_time_s: f64,
}

fn num(v: f64) -> String {
    if v.is_nan() {
        "nan".into()
    } else {
        format!("{v}")
    }
}

impl BenchRow {
    pub fn to_csv(&self) -> String {
        format!(
            "{},{},{},{},{},{},{},{},{},{},{},{:.6},{:.6}",
            self.seed,
            self.n,
            self.m,
            num(self.p),
            self.gamma.map_or("inf".into(), num),
            self.relaxation,
            num(self.lower_bound),
            num(self.upper_bound),
            num(self.gap),
            self.status.as_str(),
            self.iterations,
            self.build_time_s,
            self.solve_time_s,
        )
    }

    /// Weak duality with the tolerance used across the benchmarks.
    pub fn bounds_consistent(&self) -> bool {
        self.status != SolveStatus::Optimal || self.lower_bound <= self.upper_bound + 1e-4 * (1.0 + self.upper_bound.abs())
    }
}

pub fn write_csv<W: Write>(rows: &[BenchRow], mut out: W) -> io::Result<()> {
    writeln!(out, "{CSV_HEADER}")?;
    for r in rows {
        writeln!(out, "{}", r.to_csv())?;
    }
    Ok(())
}

pub fn any_numerical_failure(rows: &[BenchRow]) -> bool {
    rows.iter().any(|r| r.status == SolveStatus::NumericalFailure)
}

/// Solves one matrix-completion cell and pairs it with the
/// alternating-minimization bound. `divisor` divides both bounds.
#[allow(clippy::too_many_arguments)]
fn mc_row(
    obs: &ObservedMatrix,
    seed: u64,
    relax: Relaxation,
    spec: &McSpec,
    solver: &SolverSettings,
    divisor: f64,
) -> Result<BenchRow> {
    let mut am = AMSettings::new(spec.k, spec.gamma);
    am.lambda = spec.lambda;
    am.seed = seed;
    let ub = alternating_minimization(obs, &am, spec.loss_scale)?.upper_bound;
    let solved = solve_mc(relax, obs, spec, solver)?;
    let lb = solved.lower_bound;
    let g = if lb.is_nan() { f64::NAN } else { gap(ub, lb).unwrap_or(f64::NAN) };
    let (n, m) = (obs.rows(), obs.cols());
    Ok(BenchRow {
        seed,
        n,
        m,
        p: obs.omega().len() as f64 / (n * m) as f64,
        gamma: spec.gamma,
        relaxation: relax,
        lower_bound: lb / divisor,
        upper_bound: ub / divisor,
        gap: g,
        status: solved.status,
        iterations: solved.iterations,
        build_time_s: solved.build_time,
        solve_time_s: solved.solve_time,
    })
}

/// Gap versus gamma: one row per `(seed, gamma, relaxation)`, in that
/// order.
pub fn run_gamma_sweep(cfg: &ExperimentConfig) -> Result<Vec<BenchRow>> {
    cfg.validate()?;
    if cfg.gammas.is_empty() {
        return Err(Error::InvalidArgument("gamma list is empty".into()));
    }
    let mut cells = Vec::new();
    for &seed in &cfg.seeds {
        for &gamma in &cfg.gammas {
            for &relax in &cfg.relaxations {
                cells.push((seed, gamma, relax));
            }
        }
    }
    map_cells(&cells, cfg.exec, |&(seed, gamma, relax)| {
        let obs = generate_instance(cfg.n, cfg.m, cfg.rank, cfg.eps, cfg.p, seed)?;
        let spec = McSpec {
            gamma: Some(gamma),
            k: cfg.k,
            lambda: cfg.lambda,
            loss_scale: cfg.loss_scale,
        };
        mc_row(&obs, seed, relax, &spec, &cfg.solver, 1.0)
    })
    .into_iter()
    .collect()
}

/// Bounds versus size with `n = m`, `gamma = 1e4 / n^2`, both bounds
/// divided by `n^2`; rows ordered by `(n, seed, relaxation)`.
pub fn run_scaling(cfg: &ExperimentConfig) -> Result<Vec<BenchRow>> {
    cfg.validate()?;
    if let Some(r) = cfg
        .relaxations
        .iter()
        .find(|r| !matches!(r, Relaxation::Compact | Relaxation::Reduced))
    {
        return Err(Error::InvalidArgument(format!(
            "the scaling study runs compact or reduced, not `{r}`"
        )));
    }
    let mut cells = Vec::new();
    for &n in &cfg.sizes {
        for &seed in &cfg.seeds {
            for &relax in &cfg.relaxations {
                cells.push((n, seed, relax));
            }
        }
    }
    map_cells(&cells, cfg.exec, |&(n, seed, relax)| {
        let obs = generate_instance(n, n, cfg.rank.min(n), cfg.eps, cfg.p, seed)?;
        let n2 = (n * n) as f64;
        let spec = McSpec {
            gamma: Some(1e4 / n2),
            k: cfg.k.min(n),
            lambda: cfg.lambda,
            loss_scale: cfg.loss_scale,
        };
        mc_row(&obs, seed, relax, &spec, &cfg.solver, n2)
    })
    .into_iter()
    .collect()
}

const EXAMPLE1: &str = include_str!("../../fixtures/example1.txt");

/// The 7 x 5 worked example: five hidden entries, `gamma = 100`, `k = 2`.
pub fn example1_instance() -> McInstance {
    read_mc_instance(EXAMPLE1).expect("bundled fixture parses")
}

/// MPRT, full lifted with symmetry, and compact bounds on the worked
/// example (loss scale one half), each with the alternating-minimization
/// upper bound.
pub fn example1_report(solver: &SolverSettings, exec: Execution) -> Result<Vec<BenchRow>> {
    let inst = example1_instance();
    let spec = McSpec {
        gamma: inst.gamma,
        k: inst.k,
        lambda: inst.lambda,
        loss_scale: 0.5,
    };
    let relaxations = [Relaxation::Mprt, Relaxation::FullPerm, Relaxation::Compact];
    map_cells(&relaxations, exec, |&r| mc_row(&inst.obs, 0, r, &spec, solver, 1.0))
        .into_iter()
        .collect()
}
