//! Problem data for rank-penalized, rank-capped quadratic matrix problems
//! and the decoded form of a solved relaxation.

mod io;

pub use io::{read_mc_instance, read_rrr_instance, write_mc_instance, write_rrr_instance, McInstance};

use nalgebra::DMatrix;

use crate::conic::{Residuals, SolveStatus};
use crate::error::{dim_err, Error, Result};
use crate::linalg::{vec, vec_t, DenseMatrix, SymMatrix};

/// Which stacking of `X` the quadratic forms act on.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum VecOrientation {
    /// `vec(X^T)`: rows concatenated.
    #[default]
    RowStacked,
    /// `vec(X)`: columns concatenated.
    ColumnStacked,
}

/// `<Q, v v^T> + <E, X> <= b`.
#[derive(Clone, Debug, PartialEq)]
pub struct QuadConstraint {
    pub q: SymMatrix,
    pub e: DenseMatrix,
    pub b: f64,
}

/// `h(X) = scale * sum_{(i,j) in mask} (X_ij - targets_ij)^2`.
#[derive(Clone, Debug, PartialEq)]
pub struct MaskedQuadratic {
    pub mask: Vec<(usize, usize)>,
    pub targets: DenseMatrix,
    pub scale: f64,
}

impl MaskedQuadratic {
    pub fn eval(&self, x: &DMatrix<f64>) -> f64 {
        self.scale
            * self
                .mask
                .iter()
                .map(|&(i, j)| (x[(i, j)] - self.targets.get(i, j)).powi(2))
                .sum::<f64>()
    }
}

/// Declares that the quadratic-plus-linear part of the objective equals
/// `(1/2 gamma) ||X||_F^2 + h(X)` with `h` convex.
#[derive(Clone, Debug, PartialEq)]
pub struct FrobeniusSplit {
    pub gamma: f64,
    pub h: MaskedQuadratic,
}

/// ```text
///   min  lambda * rank(X) + <H, v v^T> + <D, X> + constant
///   s.t. rank(X) <= k,  <Q_i, v v^T> + <E_i, X> <= b_i
/// ```
/// where `v` is `vec(X^T)` or `vec(X)` according to `orientation`.
#[derive(Clone, Debug, PartialEq)]
pub struct LowRankQuadraticProblem {
    pub n: usize,
    pub m: usize,
    pub h: SymMatrix,
    pub d: DenseMatrix,
    pub constraints: Vec<QuadConstraint>,
    pub lambda: f64,
    pub k: usize,
    pub constant: f64,
    pub orientation: VecOrientation,
    pub split: Option<FrobeniusSplit>,
}

impl LowRankQuadraticProblem {
    pub fn new(h: SymMatrix, d: DenseMatrix, lambda: f64, k: usize) -> Result<Self> {
        let p = LowRankQuadraticProblem {
            n: d.rows(),
            m: d.cols(),
            h,
            d,
            constraints: Vec::new(),
            lambda,
            k,
            constant: 0.0,
            orientation: VecOrientation::RowStacked,
            split: None,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn with_constant(mut self, c: f64) -> Self {
        self.constant = c;
        self
    }

    pub fn with_orientation(mut self, o: VecOrientation) -> Result<Self> {
        self.orientation = o;
        self.validate()?;
        Ok(self)
    }

    pub fn with_constraint(mut self, c: QuadConstraint) -> Result<Self> {
        self.constraints.push(c);
        self.validate()?;
        Ok(self)
    }

    pub fn with_split(mut self, s: FrobeniusSplit) -> Result<Self> {
        if !(s.gamma > 0.0) {
            return Err(Error::InvalidArgument("gamma must be positive".into()));
        }
        self.split = Some(s);
        Ok(self)
    }

    /// Side of the projection matrix `Y`: `n` for row stacking, `m` for
    /// column stacking (then `Y` acts on the row space of `X^T`).
    pub fn y_dim(&self) -> usize {
        match self.orientation {
            VecOrientation::RowStacked => self.n,
            VecOrientation::ColumnStacked => self.m,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let nm = self.n * self.m;
        if self.n == 0 || self.m == 0 {
            return Err(dim_err("problem dimensions must be positive"));
        }
        if self.h.dim() != nm {
            return Err(dim_err(format!("H is {0}x{0}, expected {nm}x{nm}", self.h.dim())));
        }
        if (self.d.rows(), self.d.cols()) != (self.n, self.m) {
            return Err(dim_err("D must be n x m"));
        }
        for (i, c) in self.constraints.iter().enumerate() {
            if c.q.dim() != nm || (c.e.rows(), c.e.cols()) != (self.n, self.m) {
                return Err(dim_err(format!("constraint {i} has wrong dimensions")));
            }
        }
        if !(self.lambda >= 0.0) {
            return Err(Error::InvalidArgument("lambda must be nonnegative".into()));
        }
        if self.k == 0 || self.k > self.y_dim() {
            return Err(Error::InvalidArgument(format!(
                "rank cap k = {} must lie in [1, {}]",
                self.k,
                self.y_dim()
            )));
        }
        Ok(())
    }

    /// The stacked vector the quadratic forms act on.
    pub fn stack(&self, x: &DMatrix<f64>) -> Vec<f64> {
        match self.orientation {
            VecOrientation::RowStacked => vec_t(x),
            VecOrientation::ColumnStacked => vec(x),
        }
    }
}

/// `lambda * rank + <H, v v^T> + <D, X> + constant`.
pub fn evaluate_objective(p: &LowRankQuadraticProblem, x: &DMatrix<f64>, rank: usize) -> Result<f64> {
    if x.shape() != (p.n, p.m) {
        return Err(dim_err(format!(
            "X is {}x{}, problem is {}x{}",
            x.nrows(),
            x.ncols(),
            p.n,
            p.m
        )));
    }
    let v = p.stack(x);
    Ok(p.lambda * rank as f64 + p.h.quad_form(&v) + p.d.as_matrix().dot(x) + p.constant)
}

/// A matrix together with its set of observed positions (zero-based).
#[derive(Clone, Debug, PartialEq)]
pub struct ObservedMatrix {
    a: DenseMatrix,
    omega: Vec<(usize, usize)>,
}

impl ObservedMatrix {
    /// Positions are zero-based; they are stored in row-major order.
    pub fn new(a: DenseMatrix, mut omega: Vec<(usize, usize)>) -> Result<Self> {
        let (n, m) = (a.rows(), a.cols());
        if let Some(&(i, j)) = omega.iter().find(|&&(i, j)| i >= n || j >= m) {
            return Err(Error::InvalidArgument(format!(
                "observed position ({i}, {j}) outside a {n}x{m} matrix"
            )));
        }
        omega.sort_unstable();
        if omega.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::InvalidArgument("duplicate observed position".into()));
        }
        Ok(ObservedMatrix { a, omega })
    }

    pub fn fully_observed(a: DenseMatrix) -> Self {
        let omega = (0..a.rows())
            .flat_map(|i| (0..a.cols()).map(move |j| (i, j)))
            .collect();
        ObservedMatrix { a, omega }
    }

    pub fn a(&self) -> &DenseMatrix {
        &self.a
    }

    pub fn omega(&self) -> &[(usize, usize)] {
        &self.omega
    }

    pub fn rows(&self) -> usize {
        self.a.rows()
    }

    pub fn cols(&self) -> usize {
        self.a.cols()
    }

    pub fn is_observed(&self, i: usize, j: usize) -> bool {
        self.omega.binary_search(&(i, j)).is_ok()
    }

    /// Observed columns of row `i`, ascending.
    pub fn row_mask(&self, i: usize) -> Vec<usize> {
        self.omega
            .iter()
            .filter(|&&(r, _)| r == i)
            .map(|&(_, c)| c)
            .collect()
    }

    /// Same observation set, different values.
    pub fn with_values(&self, a: DenseMatrix) -> Result<Self> {
        if (a.rows(), a.cols()) != (self.rows(), self.cols()) {
            return Err(dim_err("replacement values have the wrong shape"));
        }
        Ok(ObservedMatrix {
            a,
            omega: self.omega.clone(),
        })
    }

    /// Applies the masking operator to an arbitrary matrix.
    pub fn mask(&self, x: &DMatrix<f64>) -> DMatrix<f64> {
        let mut out = DMatrix::zeros(x.nrows(), x.ncols());
        for &(i, j) in &self.omega {
            out[(i, j)] = x[(i, j)];
        }
        out
    }
}

/// `P(A)`: observed entries kept, hidden ones zeroed.
pub fn masked(obs: &ObservedMatrix) -> DenseMatrix {
    DenseMatrix::from(obs.mask(obs.a.as_matrix()))
}

/// Solver bookkeeping carried alongside a decoded relaxation.
#[derive(Clone, Debug)]
pub struct SolverInfo {
    pub status: SolveStatus,
    pub residuals: Residuals,
    pub iterations: usize,
    pub wall_time: f64,
}

/// Lifted variables recovered from a solved relaxation, when present.
#[derive(Clone, Debug)]
pub enum LiftedBlocks {
    Full {
        wxx: SymMatrix,
        wxy: Option<DenseMatrix>,
        wyy: Option<SymMatrix>,
    },
    SBlocks(Vec<SymMatrix>),
    Theta(SymMatrix),
}

#[derive(Clone, Debug)]
pub struct RelaxationSolution {
    pub lower_bound: f64,
    pub x: DenseMatrix,
    pub y: SymMatrix,
    pub lifted: Option<LiftedBlocks>,
    pub info: SolverInfo,
}

impl RelaxationSolution {
    /// Maps a solution of the problem in `X' = X / sigma` back to `X`: the
    /// bound is multiplied by `value_factor`, `X` by `sigma`, quadratic
    /// blocks by `sigma^2`, mixed `Wxy` by `sigma`; `Y` is unchanged.
    pub fn rescaled(mut self, sigma: f64, value_factor: f64) -> Self {
        let s2 = sigma * sigma;
        self.lower_bound *= value_factor;
        self.x = DenseMatrix::from(self.x.as_matrix() * sigma);
        self.lifted = self.lifted.map(|l| match l {
            LiftedBlocks::Full { wxx, wxy, wyy } => LiftedBlocks::Full {
                wxx: wxx.scaled(s2),
                wxy: wxy.map(|w| DenseMatrix::from(w.as_matrix() * sigma)),
                wyy,
            },
            LiftedBlocks::SBlocks(s) => LiftedBlocks::SBlocks(s.iter().map(|b| b.scaled(s2)).collect()),
            LiftedBlocks::Theta(t) => LiftedBlocks::Theta(t.scaled(s2)),
        });
        self
    }
}
