//! `lrlift`: generate instances, solve relaxations, and run the benchmark
//! studies. Exit status is 0 on success, 2 when any solve hit a numerical
//! failure, and 1 for usage or input errors.

use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};

use lowrank_lift::bench::{
    any_numerical_failure, build_bp, build_mc, build_rrr, example1_report, generate_instance, run_gamma_sweep,
    run_scaling, solve_bp, solve_mc, solve_rrr, write_csv, BenchRow, Execution, ExperimentConfig, McSpec, Relaxation,
};
use lowrank_lift::conic::export_sdpa;
use lowrank_lift::heuristics::{alternating_minimization, gap, AMSettings};
use lowrank_lift::library::RltMode;
use lowrank_lift::problem::{read_mc_instance, read_rrr_instance, write_mc_instance, McInstance};
use lowrank_lift::solver::SolverSettings;

#[derive(Parser)]
#[command(name = "lrlift", version, about = "Lifted SDP relaxations for low-rank matrix problems")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write a synthetic matrix-completion instance.
    Gen(GenArgs),
    /// Solve one relaxation of an instance file and print a CSV row.
    Solve(SolveArgs),
    /// Bounds on the bundled 7x5 worked example.
    Example1(SolverArgs),
    /// Gap versus gamma on synthetic instances.
    Sweep(SweepArgs),
    /// Bounds versus size with gamma = 1e4 / n^2.
    Scale(ScaleArgs),
    /// Write a relaxation of an instance file in SDPA sparse format.
    ExportSdpa(ExportArgs),
}

#[derive(Args, Clone)]
struct SolverArgs {
    /// Relative tolerance for primal, dual and gap residuals.
    #[arg(long, default_value_t = 1e-6)]
    tol: f64,
    #[arg(long = "max-iters", default_value_t = 100_000)]
    max_iters: usize,
    /// Output path; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Solver progress on stderr.
    #[arg(long)]
    verbose: bool,
    /// Run cells one at a time.
    #[arg(long)]
    sequential: bool,
}

impl SolverArgs {
    fn settings(&self) -> SolverSettings {
        SolverSettings {
            verbose: self.verbose,
            ..SolverSettings::default()
                .with_tolerance(self.tol)
                .with_max_iterations(self.max_iters)
        }
    }

    fn exec(&self) -> Execution {
        if self.sequential {
            Execution::Sequential
        } else {
            Execution::Parallel
        }
    }
}

#[derive(Args)]
struct GenArgs {
    #[arg(long)]
    n: usize,
    #[arg(long)]
    m: usize,
    /// Planted rank.
    #[arg(long, default_value_t = 2)]
    rank: usize,
    #[arg(long, default_value_t = 0.1)]
    eps: f64,
    #[arg(long, default_value_t = 0.5)]
    p: f64,
    /// Omit for no ridge term.
    #[arg(long)]
    gamma: Option<f64>,
    #[arg(long, default_value_t = 2)]
    k: usize,
    #[arg(long, default_value_t = 0.0)]
    lambda: f64,
    /// Only the first seed is used.
    #[arg(long, value_delimiter = ',', default_value = "0")]
    seeds: Vec<u64>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SolveArgs {
    /// Instance file (`n p m mu` header for the regression relaxations).
    instance: PathBuf,
    #[arg(long, default_value = "compact")]
    relaxation: Relaxation,
    /// Overrides the instance's gamma.
    #[arg(long)]
    gamma: Option<f64>,
    /// Overrides the instance's rank cap.
    #[arg(long)]
    k: Option<usize>,
    /// Overrides the instance's rank weight.
    #[arg(long)]
    lambda: Option<f64>,
    #[command(flatten)]
    solver: SolverArgs,
}

#[derive(Args)]
struct SweepArgs {
    #[arg(long, default_value_t = 8)]
    n: usize,
    /// Defaults to `n`.
    #[arg(long)]
    m: Option<usize>,
    #[arg(long, default_value_t = 2)]
    rank: usize,
    #[arg(long, default_value_t = 0.1)]
    eps: f64,
    #[arg(long, default_value_t = 0.5)]
    p: f64,
    /// Single gamma; ignored when --gammas is given.
    #[arg(long)]
    gamma: Option<f64>,
    /// Comma-separated grid; defaults to 13 log-spaced points in [1e-1, 1e5].
    #[arg(long, value_delimiter = ',')]
    gammas: Option<Vec<f64>>,
    #[arg(long, default_value_t = 2)]
    k: usize,
    #[arg(long, default_value_t = 0.0)]
    lambda: f64,
    /// Comma-separated relaxations.
    #[arg(long, value_delimiter = ',', default_value = "mprt,compact")]
    relaxation: Vec<Relaxation>,
    #[arg(long, value_delimiter = ',', default_value = "0,1,2,3,4,5,6,7,8,9")]
    seeds: Vec<u64>,
    #[command(flatten)]
    solver: SolverArgs,
}

#[derive(Args)]
struct ScaleArgs {
    /// Comma-separated sizes (n = m).
    #[arg(long, value_delimiter = ',', default_value = "4,6,8,10,12,14,16,18")]
    n: Vec<usize>,
    #[arg(long, default_value_t = 2)]
    rank: usize,
    #[arg(long, default_value_t = 0.1)]
    eps: f64,
    #[arg(long, default_value_t = 0.5)]
    p: f64,
    #[arg(long, default_value_t = 2)]
    k: usize,
    #[arg(long, default_value_t = 0.0)]
    lambda: f64,
    #[arg(long, value_delimiter = ',', default_value = "reduced")]
    relaxation: Vec<Relaxation>,
    #[arg(long, value_delimiter = ',', default_value = "0,1,2,3,4,5,6,7,8,9")]
    seeds: Vec<u64>,
    #[command(flatten)]
    solver: SolverArgs,
}

#[derive(Args)]
struct ExportArgs {
    instance: PathBuf,
    #[arg(long, default_value = "compact")]
    relaxation: Relaxation,
    #[arg(long)]
    gamma: Option<f64>,
    #[arg(long)]
    k: Option<usize>,
    #[arg(long)]
    lambda: Option<f64>,
    #[arg(long)]
    out: Option<PathBuf>,
}

/// Outcome of a command that ran to completion.
enum Outcome {
    Ok,
    NumericalFailure,
}

fn emit(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(path) => fs::write(path, text).with_context(|| format!("writing {}", path.display())),
        None => {
            io::stdout().write_all(text.as_bytes())?;
            Ok(())
        }
    }
}

fn emit_rows(out: Option<&Path>, rows: &[BenchRow]) -> Result<Outcome> {
    let mut buf = Vec::new();
    write_csv(rows, &mut buf)?;
    emit(out, &String::from_utf8(buf)?)?;
    Ok(if any_numerical_failure(rows) {
        Outcome::NumericalFailure
    } else {
        Outcome::Ok
    })
}

fn read_mc(path: &Path) -> Result<McInstance> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    Ok(read_mc_instance(&text).with_context(|| format!("parsing {}", path.display()))?)
}

fn mc_spec(inst: &McInstance, gamma: Option<f64>, k: Option<usize>, lambda: Option<f64>) -> McSpec {
    McSpec {
        gamma: gamma.or(inst.gamma),
        k: k.unwrap_or(inst.k),
        lambda: lambda.unwrap_or(inst.lambda),
        loss_scale: 0.5,
    }
}

fn gen(a: &GenArgs) -> Result<Outcome> {
    let seed = a.seeds.first().copied().unwrap_or(0);
    let obs = generate_instance(a.n, a.m, a.rank, a.eps, a.p, seed)?;
    let inst = McInstance {
        obs,
        lambda: a.lambda,
        k: a.k,
        gamma: a.gamma,
    };
    emit(a.out.as_deref(), &write_mc_instance(&inst))?;
    Ok(Outcome::Ok)
}

fn solve(a: &SolveArgs) -> Result<Outcome> {
    let settings = a.solver.settings();
    let relax = a.relaxation;
    let row = if relax.is_regression() {
        let text = fs::read_to_string(&a.instance).with_context(|| format!("reading {}", a.instance.display()))?;
        let inst = read_rrr_instance(&text)?;
        let solved = solve_rrr(relax, &inst, &settings)?;
        BenchRow {
            seed: 0,
            n: inst.a.cols(),
            m: inst.b.cols(),
            p: 1.0,
            gamma: None,
            relaxation: relax,
            lower_bound: solved.lower_bound,
            upper_bound: f64::NAN,
            gap: f64::NAN,
            status: solved.status,
            iterations: solved.iterations,
            build_time_s: solved.build_time,
            solve_time_s: solved.solve_time,
        }
    } else {
        let inst = read_mc(&a.instance)?;
        let (n, m) = (inst.obs.rows(), inst.obs.cols());
        let p = inst.obs.omega().len() as f64 / (n * m) as f64;
        let spec = mc_spec(&inst, a.gamma, a.k, a.lambda);
        let (solved, ub) = if relax.is_basis_pursuit() {
            (solve_bp(relax, &inst.obs, RltMode::All, &settings)?, f64::NAN)
        } else {
            let mut am = AMSettings::new(spec.k.min(n.min(m)), spec.gamma);
            am.lambda = spec.lambda;
            let ub = alternating_minimization(&inst.obs, &am, spec.loss_scale)?.upper_bound;
            (solve_mc(relax, &inst.obs, &spec, &settings)?, ub)
        };
        let g = if ub.is_nan() || solved.lower_bound.is_nan() {
            f64::NAN
        } else {
            gap(ub, solved.lower_bound).unwrap_or(f64::NAN)
        };
        BenchRow {
            seed: 0,
            n,
            m,
            p,
            gamma: spec.gamma,
            relaxation: relax,
            lower_bound: solved.lower_bound,
            upper_bound: ub,
            gap: g,
            status: solved.status,
            iterations: solved.iterations,
            build_time_s: solved.build_time,
            solve_time_s: solved.solve_time,
        }
    };
    emit_rows(a.solver.out.as_deref(), &[row])
}

fn sweep(a: &SweepArgs) -> Result<Outcome> {
    let gammas = match (&a.gammas, a.gamma) {
        (Some(list), _) => list.clone(),
        (None, Some(g)) => vec![g],
        (None, None) => lowrank_lift::bench::default_gammas(),
    };
    let cfg = ExperimentConfig {
        n: a.n,
        m: a.m.unwrap_or(a.n),
        rank: a.rank,
        eps: a.eps,
        p: a.p,
        gammas,
        k: a.k,
        lambda: a.lambda,
        relaxations: a.relaxation.clone(),
        seeds: a.seeds.clone(),
        solver: a.solver.settings(),
        exec: a.solver.exec(),
        ..ExperimentConfig::default()
    };
    let rows = run_gamma_sweep(&cfg)?;
    emit_rows(a.solver.out.as_deref(), &rows)
}

fn scale(a: &ScaleArgs) -> Result<Outcome> {
    if a.n.is_empty() {
        bail!("--n needs at least one size");
    }
    let cfg = ExperimentConfig {
        rank: a.rank,
        eps: a.eps,
        p: a.p,
        k: a.k,
        lambda: a.lambda,
        relaxations: a.relaxation.clone(),
        seeds: a.seeds.clone(),
        sizes: a.n.clone(),
        solver: a.solver.settings(),
        exec: a.solver.exec(),
        ..ExperimentConfig::default()
    };
    let rows = run_scaling(&cfg)?;
    emit_rows(a.solver.out.as_deref(), &rows)
}

fn export(a: &ExportArgs) -> Result<Outcome> {
    let relax = a.relaxation;
    let prog = if relax.is_regression() {
        let text = fs::read_to_string(&a.instance).with_context(|| format!("reading {}", a.instance.display()))?;
        build_rrr(relax, &read_rrr_instance(&text)?)?
    } else {
        let inst = read_mc(&a.instance)?;
        if relax.is_basis_pursuit() {
            build_bp(relax, &inst.obs, RltMode::All)?
        } else {
            build_mc(relax, &inst.obs, &mc_spec(&inst, a.gamma, a.k, a.lambda))?
        }
    };
    // SDPA has no second-order cone
    emit(a.out.as_deref(), &export_sdpa(&prog.lower_second_order_cones())?)?;
    Ok(Outcome::Ok)
}

fn run(cli: &Cli) -> Result<Outcome> {
    match &cli.command {
        Command::Gen(a) => gen(a),
        Command::Solve(a) => solve(a),
        Command::Example1(a) => {
            let rows = example1_report(&a.settings(), a.exec())?;
            emit_rows(a.out.as_deref(), &rows)
        }
        Command::Sweep(a) => sweep(a),
        Command::Scale(a) => scale(a),
        Command::ExportSdpa(a) => export(a),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(&cli) {
        Ok(Outcome::Ok) => ExitCode::SUCCESS,
        Ok(Outcome::NumericalFailure) => {
            eprintln!("error: at least one solve ended in a numerical failure");
            ExitCode::from(2)
        }
        Err(e) => {
            let failure = e
                .downcast_ref::<lowrank_lift::Error>()
                .is_some_and(|e| matches!(e, lowrank_lift::Error::NumericalFailure(_)));
            eprintln!("error: {e:#}");
            ExitCode::from(if failure { 2 } else { 1 })
        }
    }
}
