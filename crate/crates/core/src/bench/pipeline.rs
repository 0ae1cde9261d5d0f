//! Build, normalize, solve and decode one relaxation.
//!
//! Solves go through a copy of the instance divided by its largest
//! observed magnitude. Every relaxation here is invariant under
//! `X = sigma X'` once the rank weight is divided by `sigma^2`, and the
//! first-order solver converges far faster on unit-scale data, so the
//! decoded solution is mapped back afterwards.

use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use crate::conic::{ConicProgram, SolveStatus};
use crate::error::{Error, Result};
use crate::library::{
    build_bp_full, build_bp_reduced, build_mc_grouped, build_mc_reduced, build_rrr_compact, build_rrr_lifted,
    encode_matrix_completion, RRRInstance, RltMode,
};
use crate::linalg::DenseMatrix;
use crate::problem::{ObservedMatrix, RelaxationSolution};
use crate::relax::{build_compact_lifted, build_full_lifted, build_mprt, StrengtheningOptions};
use crate::solver::{decode, solve, SolverSettings};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Relaxation {
    Mprt,
    Full,
    /// Full lifted relaxation with the commutation (symmetry) equalities.
    FullPerm,
    Compact,
    Reduced,
    Grouped,
    BpFull,
    BpReduced,
    RrrLifted,
    RrrCompact,
}

impl Relaxation {
    pub const ALL: [Relaxation; 10] = [
        Relaxation::Mprt,
        Relaxation::Full,
        Relaxation::FullPerm,
        Relaxation::Compact,
        Relaxation::Reduced,
        Relaxation::Grouped,
        Relaxation::BpFull,
        Relaxation::BpReduced,
        Relaxation::RrrLifted,
        Relaxation::RrrCompact,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Relaxation::Mprt => "mprt",
            Relaxation::Full => "full",
            Relaxation::FullPerm => "full-perm",
            Relaxation::Compact => "compact",
            Relaxation::Reduced => "reduced",
            Relaxation::Grouped => "grouped",
            Relaxation::BpFull => "bp-full",
            Relaxation::BpReduced => "bp-reduced",
            Relaxation::RrrLifted => "rrr-lifted",
            Relaxation::RrrCompact => "rrr-compact",
        }
    }

    /// Relaxations of the matrix-completion objective.
    pub fn is_matrix_completion(self) -> bool {
        matches!(
            self,
            Relaxation::Mprt
                | Relaxation::Full
                | Relaxation::FullPerm
                | Relaxation::Compact
                | Relaxation::Reduced
                | Relaxation::Grouped
        )
    }

    pub fn is_basis_pursuit(self) -> bool {
        matches!(self, Relaxation::BpFull | Relaxation::BpReduced)
    }

    pub fn is_regression(self) -> bool {
        matches!(self, Relaxation::RrrLifted | Relaxation::RrrCompact)
    }
}

impl fmt::Display for Relaxation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Relaxation {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Relaxation::ALL
            .into_iter()
            .find(|r| r.name() == s)
            .ok_or_else(|| {
                let names: Vec<&str> = Relaxation::ALL.iter().map(|r| r.name()).collect();
                Error::InvalidArgument(format!("unknown relaxation `{s}` (expected one of {})", names.join(", ")))
            })
    }
}

/// Matrix-completion parameters shared by every relaxation of one cell.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct McSpec {
    pub gamma: Option<f64>,
    pub k: usize,
    pub lambda: f64,
    pub loss_scale: f64,
}

/// Outcome of one solve. A numerical failure is an outcome, not an error:
/// the bound is NaN and `solution` is absent.
#[derive(Clone, Debug)]
pub struct Solved {
    pub lower_bound: f64,
    pub status: SolveStatus,
    pub iterations: usize,
    pub build_time: f64,
    pub solve_time: f64,
    pub solution: Option<RelaxationSolution>,
}

/// Builds a matrix-completion relaxation on the data as given.
pub fn build_mc(relax: Relaxation, obs: &ObservedMatrix, spec: &McSpec) -> Result<ConicProgram> {
    let McSpec {
        gamma,
        k,
        lambda,
        loss_scale,
    } = *spec;
    let encode = || encode_matrix_completion(obs, lambda, k, gamma, loss_scale);
    match relax {
        Relaxation::Mprt => build_mprt(&encode()?),
        Relaxation::Full => build_full_lifted(&encode()?, &StrengtheningOptions::default()),
        Relaxation::FullPerm => build_full_lifted(&encode()?, &StrengtheningOptions::with_symmetry()),
        Relaxation::Compact => build_compact_lifted(&encode()?),
        Relaxation::Reduced => build_mc_reduced(obs, lambda, k, gamma, loss_scale),
        Relaxation::Grouped => build_mc_grouped(obs, lambda, k, gamma, loss_scale),
        other => Err(Error::InvalidArgument(format!(
            "`{other}` is not a matrix-completion relaxation"
        ))),
    }
}

pub fn build_bp(relax: Relaxation, obs: &ObservedMatrix, mode: RltMode) -> Result<ConicProgram> {
    match relax {
        Relaxation::BpFull => build_bp_full(obs, mode),
        Relaxation::BpReduced => build_bp_reduced(obs, mode),
        other => Err(Error::InvalidArgument(format!("`{other}` is not a basis-pursuit relaxation"))),
    }
}

pub fn build_rrr(relax: Relaxation, inst: &RRRInstance) -> Result<ConicProgram> {
    match relax {
        Relaxation::RrrLifted => build_rrr_lifted(inst),
        Relaxation::RrrCompact => build_rrr_compact(inst),
        other => Err(Error::InvalidArgument(format!("`{other}` is not a regression relaxation"))),
    }
}

/// Largest magnitude among `values`, or one if they are all zero.
fn magnitude<'a>(values: impl Iterator<Item = &'a f64>) -> f64 {
    let top = values.fold(0.0f64, |acc, v| acc.max(v.abs()));
    if top > 0.0 && top.is_finite() {
        top
    } else {
        1.0
    }
}

fn scaled_obs(obs: &ObservedMatrix) -> Result<(ObservedMatrix, f64)> {
    let a = obs.a().as_matrix();
    let sigma = magnitude(obs.omega().iter().map(|&(i, j)| &a[(i, j)]));
    Ok((obs.with_values(DenseMatrix::from(a / sigma))?, sigma))
}

fn run(
    build: impl FnOnce() -> Result<ConicProgram>,
    settings: &SolverSettings,
    sigma: f64,
    value_factor: f64,
) -> Result<Solved> {
    let t0 = Instant::now();
    let prog = build()?;
    let build_time = t0.elapsed().as_secs_f64();
    let t1 = Instant::now();
    let sol = solve(&prog, settings)?;
    let solve_time = t1.elapsed().as_secs_f64();
    let iterations = sol.iterations;
    match decode(&prog, &sol) {
        Ok(dec) => {
            let dec = dec.rescaled(sigma, value_factor);
            Ok(Solved {
                lower_bound: dec.lower_bound,
                status: dec.info.status,
                iterations,
                build_time,
                solve_time,
                solution: Some(dec),
            })
        }
        Err(Error::NumericalFailure(_)) => Ok(Solved {
            lower_bound: f64::NAN,
            status: SolveStatus::NumericalFailure,
            iterations,
            build_time,
            solve_time,
            solution: None,
        }),
        Err(e) => Err(e),
    }
}

pub fn solve_mc(relax: Relaxation, obs: &ObservedMatrix, spec: &McSpec, settings: &SolverSettings) -> Result<Solved> {
    let (scaled, sigma) = scaled_obs(obs)?;
    let s2 = sigma * sigma;
    let spec = McSpec {
        lambda: spec.lambda / s2,
        ..*spec
    };
    run(|| build_mc(relax, &scaled, &spec), settings, sigma, s2)
}

/// The basis-pursuit bound `tr(Y)` does not scale with the data.
pub fn solve_bp(relax: Relaxation, obs: &ObservedMatrix, mode: RltMode, settings: &SolverSettings) -> Result<Solved> {
    let (scaled, sigma) = scaled_obs(obs)?;
    run(|| build_bp(relax, &scaled, mode), settings, sigma, 1.0)
}

/// Scales the responses, so `X` and the bound scale as in matrix
/// completion.
pub fn solve_rrr(relax: Relaxation, inst: &RRRInstance, settings: &SolverSettings) -> Result<Solved> {
    let sigma = magnitude(inst.b.as_matrix().iter());
    let s2 = sigma * sigma;
    let scaled = RRRInstance::new(
        inst.a.clone(),
        DenseMatrix::from(inst.b.as_matrix() / sigma),
        inst.mu / s2,
    )?;
    run(|| build_rrr(relax, &scaled), settings, sigma, s2)
}
