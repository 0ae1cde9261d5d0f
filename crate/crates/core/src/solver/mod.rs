//! First-order solver for [`ConicProgram`]s and decoding of relaxation
//! variables from its solutions.

mod admm;
mod csr;
mod factor;

use nalgebra::DMatrix;

use crate::conic::{ConicProgram, ConicSolution, SolveStatus};
use crate::error::{Error, Result};
use crate::linalg::{DenseMatrix, SymMatrix};
use crate::problem::{LiftedBlocks, RelaxationSolution, SolverInfo};

#[derive(Clone, Debug, PartialEq)]
pub struct SolverSettings {
    pub eps_primal: f64,
    pub eps_dual: f64,
    pub eps_gap: f64,
    pub max_iterations: usize,
    /// Initial ADMM penalty.
    pub penalty: f64,
    pub adaptive_penalty: bool,
    /// Residuals are evaluated every this many iterations.
    pub check_interval: usize,
    /// History length of the Anderson acceleration; 0 disables it.
    pub anderson_memory: usize,
    /// Writes one CSV line per check to stderr.
    pub verbose: bool,
}

impl Default for SolverSettings {
    fn default() -> Self {
        SolverSettings {
            eps_primal: 1e-6,
            eps_dual: 1e-6,
            eps_gap: 1e-6,
            max_iterations: 100_000,
            penalty: 1.0,
            adaptive_penalty: true,
            check_interval: 25,
            anderson_memory: 10,
            verbose: false,
        }
    }
}

impl SolverSettings {
    /// Same tolerance for all three residuals.
    pub fn with_tolerance(mut self, eps: f64) -> Self {
        self.eps_primal = eps;
        self.eps_dual = eps;
        self.eps_gap = eps;
        self
    }

    pub fn with_max_iterations(mut self, n: usize) -> Self {
        self.max_iterations = n;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let tols = [self.eps_primal, self.eps_dual, self.eps_gap, self.penalty];
        if tols.iter().any(|&t| !(t > 0.0 && t.is_finite())) {
            return Err(Error::InvalidArgument(
                "tolerances and penalty must be positive and finite".into(),
            ));
        }
        if self.max_iterations == 0 || self.check_interval == 0 {
            return Err(Error::InvalidArgument(
                "max_iterations and check_interval must be at least 1".into(),
            ));
        }
        Ok(())
    }
}

/// Solves `min c.x  s.t.  A x = b, x in K`.
///
/// Never panics on numerical trouble; NaN propagation is reported through
/// [`SolveStatus::NumericalFailure`].
pub fn solve(p: &ConicProgram, settings: &SolverSettings) -> Result<ConicSolution> {
    settings.validate()?;
    Ok(admm::solve(p, settings))
}

/// Reads a named view of the program out of a primal vector.
pub fn read_view(p: &ConicProgram, sol: &ConicSolution, label: &str) -> Result<DMatrix<f64>> {
    Ok(p.view(label)?.read(&sol.x))
}

fn read_sym(p: &ConicProgram, sol: &ConicSolution, label: &str) -> Result<SymMatrix> {
    Ok(SymMatrix::from_dense_symmetrized(&read_view(p, sol, label)?))
}

/// Decodes the standard relaxation views (`X`, `Y`, and whichever of
/// `Wxx`/`Wxy`/`Wyy`, `S0..`, `theta` exist).
pub fn decode(p: &ConicProgram, sol: &ConicSolution) -> Result<RelaxationSolution> {
    if sol.status == SolveStatus::NumericalFailure {
        return Err(Error::NumericalFailure("solver produced non-finite iterates".into()));
    }
    let x = DenseMatrix::from(read_view(p, sol, "X")?);
    let y = read_sym(p, sol, "Y")?;
    let lifted = if p.has_view("Wxx") {
        Some(LiftedBlocks::Full {
            wxx: read_sym(p, sol, "Wxx")?,
            wxy: match p.has_view("Wxy") {
                true => Some(DenseMatrix::from(read_view(p, sol, "Wxy")?)),
                false => None,
            },
            wyy: match p.has_view("Wyy") {
                true => Some(read_sym(p, sol, "Wyy")?),
                false => None,
            },
        })
    } else if p.has_view("S0") {
        let mut blocks = Vec::new();
        while p.has_view(&format!("S{}", blocks.len())) {
            blocks.push(read_sym(p, sol, &format!("S{}", blocks.len()))?);
        }
        Some(LiftedBlocks::SBlocks(blocks))
    } else if p.has_view("theta") {
        Some(LiftedBlocks::Theta(read_sym(p, sol, "theta")?))
    } else {
        None
    };
    Ok(RelaxationSolution {
        lower_bound: sol.primal_objective + p.objective_constant(),
        x,
        y,
        lifted,
        info: SolverInfo {
            status: sol.status,
            residuals: sol.residuals,
            iterations: sol.iterations,
            wall_time: sol.wall_time,
        },
    })
}
