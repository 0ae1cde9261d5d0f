//! Solver-independent conic program representation.

mod program;
mod sdpa;
mod svec;

pub use program::{Cone, ConeBlock, ConicProgram, LinExpr, MatrixView, SparseRow, Term};
pub use sdpa::{export_sdpa, import_sdpa};
pub use svec::{side_for_len, smat, svec, svec_index, svec_len, svec_position};

pub(crate) use svec::{smat_into, svec_from};

/// Termination status of a solve.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SolveStatus {
    Optimal,
    MaxIterations,
    NumericalFailure,
}

impl SolveStatus {
    pub fn as_str(&self) -> &'static str {
        match self {
            SolveStatus::Optimal => "optimal",
            SolveStatus::MaxIterations => "max_iterations",
            SolveStatus::NumericalFailure => "numerical_failure",
        }
    }
}

/// Primal, dual and gap residuals as reported by the solver.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Residuals {
    /// `||A x - b||`
    pub primal: f64,
    /// `||A^T y + s - c||` in the svec metric
    pub dual: f64,
    /// `|c.x - b.y|`
    pub gap: f64,
}

/// Feasibility violation of a primal point, see [`ConicProgram::violation`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Violation {
    pub equality: f64,
    pub cone: f64,
}

impl Violation {
    pub fn max(&self) -> f64 {
        self.equality.max(self.cone)
    }
}

/// Result of solving a [`ConicProgram`]. Vectors are in the program's
/// entry coordinates.
#[derive(Clone, Debug)]
pub struct ConicSolution {
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    pub s: Vec<f64>,
    /// `c.x`, without the program's constant.
    pub primal_objective: f64,
    /// `b.y`, without the program's constant.
    pub dual_objective: f64,
    pub residuals: Residuals,
    pub status: SolveStatus,
    pub iterations: usize,
    pub wall_time: f64,
    /// Combined relative residual at every check, in order.
    pub residual_history: Vec<f64>,
}

impl ConicProgram {
    /// Recomputes the three residuals of a candidate `(x, y, s)`.
    pub fn residuals(&self, x: &[f64], y: &[f64], s: &[f64]) -> Residuals {
        let metric = self.entry_metric();
        let c = self.objective();
        let primal = self
            .rows()
            .iter()
            .zip(self.rhs())
            .map(|(r, &b)| (r.dot(x) - b).powi(2))
            .sum::<f64>()
            .sqrt();
        let mut rd: Vec<f64> = s.iter().zip(c).map(|(si, ci)| si - ci).collect();
        for (row, &yi) in self.rows().iter().zip(y) {
            for (&v, &a) in row.idx.iter().zip(&row.val) {
                rd[v] += a * yi;
            }
        }
        // entry-coordinate duals of off-diagonal entries are twice their
        // svec-metric counterparts
        let dual = rd
            .iter()
            .zip(&metric)
            .map(|(r, w)| r * r / w)
            .sum::<f64>()
            .sqrt();
        let pobj: f64 = c.iter().zip(x).map(|(a, b)| a * b).sum();
        let dobj: f64 = self.rhs().iter().zip(y).map(|(a, b)| a * b).sum();
        Residuals {
            primal,
            dual,
            gap: (pobj - dobj).abs(),
        }
    }

    /// Largest equality residual and largest cone violation of a primal
    /// point (PSD blocks measured by their most negative eigenvalue).
    pub fn violation(&self, x: &[f64]) -> crate::error::Result<Violation> {
        let equality = self
            .rows()
            .iter()
            .zip(self.rhs())
            .map(|(r, &b)| (r.dot(x) - b).abs())
            .fold(0.0, f64::max);
        let mut cone: f64 = 0.0;
        for blk in self.blocks() {
            let seg = &x[blk.offset..blk.offset + blk.cone.scalar_len()];
            let v = match blk.cone {
                Cone::Free(_) => 0.0,
                Cone::NonNeg(_) => seg.iter().map(|v| -v).fold(0.0, f64::max),
                Cone::SecondOrder(_) => {
                    seg[1..].iter().map(|v| v * v).sum::<f64>().sqrt() - seg[0]
                }
                Cone::Psd(side) => {
                    let m = nalgebra::DMatrix::from_fn(side, side, |i, j| {
                        seg[svec_index(side, i, j)]
                    });
                    -crate::linalg::min_eigenvalue(&m)?
                }
            };
            cone = cone.max(v);
        }
        Ok(Violation { equality, cone })
    }

    pub fn rhs_norm(&self) -> f64 {
        self.rhs().iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    /// Norm of the objective in the svec metric.
    pub fn objective_norm(&self) -> f64 {
        self.objective()
            .iter()
            .zip(self.entry_metric())
            .map(|(c, w)| c * c / w)
            .sum::<f64>()
            .sqrt()
    }
}
