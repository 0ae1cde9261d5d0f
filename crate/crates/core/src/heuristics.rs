//! Alternating minimization for matrix completion, used as the upper bound
//! against which relaxation gaps are measured.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::library::encode_matrix_completion;
use crate::linalg::{truncated_svd, DenseMatrix};
use crate::problem::{evaluate_objective, ObservedMatrix};
use crate::rng::{seeded, BoxMuller};

/// Added to the diagonal of a singular `r x r` subproblem.
const JITTER: f64 = 1e-10;

/// LB may exceed UB by this much, relative to `1 + |UB|`, before a
/// negative gap is reported as such instead of clamped to zero.
pub const GAP_TOLERANCE: f64 = 1e-4;

#[derive(Clone, Debug, PartialEq)]
pub struct AMSettings {
    pub rank: usize,
    /// Ridge parameter; `None` drops the `||X||^2 / (2 gamma)` term.
    pub gamma: Option<f64>,
    /// Charged as `lambda * rank` in the returned bound.
    pub lambda: f64,
    pub max_sweeps: usize,
    /// Stop once a sweep lowers the objective by less than this fraction.
    pub rel_tol: f64,
    /// Runs beyond the first start from seeded Gaussian factors.
    pub restarts: usize,
    pub seed: u64,
}

impl AMSettings {
    pub fn new(rank: usize, gamma: Option<f64>) -> Self {
        AMSettings {
            rank,
            gamma,
            lambda: 0.0,
            max_sweeps: 500,
            rel_tol: 1e-8,
            restarts: 1,
            seed: 0,
        }
    }
}

#[derive(Clone, Debug)]
pub struct AMResult {
    pub x: DenseMatrix,
    pub upper_bound: f64,
    /// Sweeps of the run that produced `x`.
    pub sweeps: usize,
    /// Objective after initialization and after every sweep of that run.
    pub history: Vec<f64>,
}

struct Objective<'a> {
    obs: &'a ObservedMatrix,
    ridge: f64,
    loss_scale: f64,
}

impl Objective<'_> {
    /// Rank term excluded.
    fn eval(&self, x: &DMatrix<f64>) -> f64 {
        let a = self.obs.a().as_matrix();
        let loss: f64 = self
            .obs
            .omega()
            .iter()
            .map(|&(i, j)| (x[(i, j)] - a[(i, j)]).powi(2))
            .sum();
        self.ridge * x.norm_squared() + self.loss_scale * loss
    }

    /// Exact minimization over each row of `u` with `v` fixed:
    /// `(ridge V V^T + s sum_{j in row} v_j v_j^T) u_i = s sum A_ij v_j`.
    fn update_rows(&self, u: &mut DMatrix<f64>, v: &DMatrix<f64>) -> Result<()> {
        let r = v.nrows();
        let a = self.obs.a().as_matrix();
        let base = v * v.transpose() * self.ridge;
        let mut rows: Vec<Vec<usize>> = vec![Vec::new(); u.nrows()];
        for &(i, j) in self.obs.omega() {
            rows[i].push(j);
        }
        for (i, cols) in rows.iter().enumerate() {
            let mut lhs = base.clone();
            let mut rhs = DVector::zeros(r);
            for &j in cols {
                let vj = v.column(j);
                lhs.ger(self.loss_scale, &vj, &vj, 1.0);
                rhs.axpy(self.loss_scale * a[(i, j)], &vj, 1.0);
            }
            let sol = solve_small(lhs, &rhs)?;
            u.row_mut(i).copy_from(&sol.transpose());
        }
        Ok(())
    }
}

/// Cholesky solve, retried once with jitter when the system is singular.
fn solve_small(mut lhs: DMatrix<f64>, rhs: &DVector<f64>) -> Result<DVector<f64>> {
    if let Some(ch) = lhs.clone().cholesky() {
        return Ok(ch.solve(rhs));
    }
    let r = lhs.nrows();
    for i in 0..r {
        lhs[(i, i)] += JITTER;
    }
    match lhs.clone().cholesky() {
        Some(ch) => Ok(ch.solve(rhs)),
        // semidefinite with a tiny negative pivot from rounding
        None => lhs
            .lu()
            .solve(rhs)
            .ok_or_else(|| Error::NumericalFailure("singular alternating-minimization subproblem".into())),
    }
}

fn run(obj: &Objective<'_>, mut u: DMatrix<f64>, mut v: DMatrix<f64>, s: &AMSettings) -> Result<(DMatrix<f64>, usize, Vec<f64>)> {
    let obs_t = ObservedMatrix::new(
        obj.obs.a().transpose(),
        obj.obs.omega().iter().map(|&(i, j)| (j, i)).collect(),
    )?;
    let obj_t = Objective {
        obs: &obs_t,
        ridge: obj.ridge,
        loss_scale: obj.loss_scale,
    };
    let mut x = &u * &v;
    let mut f = obj.eval(&x);
    let mut history = vec![f];
    let mut sweeps = 0;
    while sweeps < s.max_sweeps {
        sweeps += 1;
        obj.update_rows(&mut u, &v)?;
        // columns of X are rows of X^T = V^T U^T
        let mut vt = v.transpose();
        obj_t.update_rows(&mut vt, &u.transpose())?;
        v = vt.transpose();
        x = &u * &v;
        let next = obj.eval(&x);
        history.push(next);
        let decrease = f - next;
        f = next;
        if decrease <= s.rel_tol * f.abs().max(f64::MIN_POSITIVE) {
            break;
        }
    }
    Ok((x, sweeps, history))
}

/// Alternating ridge least squares on `X = U V` for
/// `(1/2 gamma) ||X||^2 + s sum_Omega (X_ij - A_ij)^2`, started from the
/// rank-`r` truncated SVD of `P(A)` split as `(U sqrt(S), sqrt(S) V^T)`.
///
/// The bound is the encoded objective at the best final `X`, including
/// `lambda * r`.
pub fn alternating_minimization(obs: &ObservedMatrix, s: &AMSettings, loss_scale: f64) -> Result<AMResult> {
    let (n, m) = (obs.rows(), obs.cols());
    let r = s.rank;
    if r == 0 || r > n.min(m) {
        return Err(Error::InvalidArgument(format!(
            "rank {r} must lie in [1, {}]",
            n.min(m)
        )));
    }
    let p = encode_matrix_completion(obs, s.lambda, r, s.gamma, loss_scale)?;
    let obj = Objective {
        obs,
        ridge: s.gamma.map_or(0.0, |g| 1.0 / (2.0 * g)),
        loss_scale,
    };

    let svd = truncated_svd(&obs.mask(obs.a().as_matrix()), r)?;
    let mut u0 = svd.u.clone();
    let mut v0 = svd.v.transpose();
    for k in 0..r {
        let root = svd.s[k].sqrt();
        u0.column_mut(k).scale_mut(root);
        v0.row_mut(k).scale_mut(root);
    }

    let mut best = run(&obj, u0, v0, s)?;
    let mut rng = seeded(s.seed);
    let mut normal = BoxMuller::new();
    for _ in 1..s.restarts.max(1) {
        let u = normal.matrix(&mut rng, n, r);
        let v = normal.matrix(&mut rng, r, m);
        let cand = run(&obj, u, v, s)?;
        if obj.eval(&cand.0) < obj.eval(&best.0) {
            best = cand;
        }
    }
    let (x, sweeps, history) = best;
    let upper_bound = evaluate_objective(&p, &x, r)?;
    Ok(AMResult {
        x: DenseMatrix::from(x),
        upper_bound,
        sweeps,
        history,
    })
}

/// `(UB - LB) / UB`, clamped to zero when LB overshoots UB by no more than
/// [`GAP_TOLERANCE`]; larger overshoots come back negative.
pub fn gap(ub: f64, lb: f64) -> Result<f64> {
    if !(ub > 0.0) {
        return Err(Error::NonPositiveUpperBound(ub));
    }
    let g = (ub - lb) / ub;
    if g < 0.0 && lb - ub <= GAP_TOLERANCE * (1.0 + ub.abs()) {
        return Ok(0.0);
    }
    Ok(g)
}
