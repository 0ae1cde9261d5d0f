use nalgebra::DMatrix;

use super::{build_full_lifted, StrengtheningOptions, ARROW, Y_COMPLEMENT};
use crate::conic::{ConicProgram, Violation};
use crate::error::{dim_err, Error, Result};
use crate::linalg::{block_diag_sum, min_eigenvalue, pseudoinverse, vec, vec_t, BlockView};
use crate::problem::{LowRankQuadraticProblem, VecOrientation};

/// Largest residual of the compact relaxation tolerated on input.
const INPUT_TOLERANCE: f64 = 1e-4;

/// A point in the variables of the full lifted relaxation.
#[derive(Clone, Debug, PartialEq)]
pub struct LiftedPoint {
    pub x: DMatrix<f64>,
    pub y: DMatrix<f64>,
    pub wxx: DMatrix<f64>,
    pub wxy: DMatrix<f64>,
    pub wyy: DMatrix<f64>,
}

impl LiftedPoint {
    /// Rank-one lifting: every `W` block is an outer product of
    /// `vec_t(X)` and `vec(Y)`.
    pub fn exact(x: &DMatrix<f64>, y: &DMatrix<f64>) -> LiftedPoint {
        let xv = DMatrix::from_column_slice(x.len(), 1, &vec_t(x));
        let yv = DMatrix::from_column_slice(y.len(), 1, &vec(y));
        LiftedPoint {
            x: x.clone(),
            y: y.clone(),
            wxx: &xv * xv.transpose(),
            wxy: &xv * yv.transpose(),
            wyy: &yv * yv.transpose(),
        }
    }

    /// `[[1, x^T, y^T], [x, Wxx, Wxy], [y, Wxy^T, Wyy]]`.
    pub fn moment_matrix(&self) -> DMatrix<f64> {
        let (nm, nn) = (self.x.len(), self.y.len());
        let side = 1 + nm + nn;
        let mut m = DMatrix::zeros(side, side);
        m[(0, 0)] = 1.0;
        for (p, v) in vec_t(&self.x).into_iter().enumerate() {
            m[(0, 1 + p)] = v;
            m[(1 + p, 0)] = v;
        }
        for (r, v) in vec(&self.y).into_iter().enumerate() {
            m[(0, 1 + nm + r)] = v;
            m[(1 + nm + r, 0)] = v;
        }
        m.view_mut((1, 1), (nm, nm)).copy_from(&self.wxx);
        m.view_mut((1, 1 + nm), (nm, nn)).copy_from(&self.wxy);
        m.view_mut((1 + nm, 1), (nn, nm)).copy_from(&self.wxy.transpose());
        m.view_mut((1 + nm, 1 + nm), (nn, nn)).copy_from(&self.wyy);
        m
    }

    /// Primal vector of a row-stacked full lifted program at this point,
    /// with slacks set to close their rows.
    pub fn embed(&self, prog: &ConicProgram) -> Result<Vec<f64>> {
        let mut x = vec![0.0; prog.num_vars()];
        prog.assign_view(ARROW, &self.moment_matrix(), &mut x)?;
        prog.assign_view("Y", &self.y, &mut x)?;
        let n = self.y.nrows();
        prog.assign_view(Y_COMPLEMENT, &(DMatrix::identity(n, n) - &self.y), &mut x)?;
        prog.fill_slacks(&mut x);
        Ok(x)
    }
}

/// Rebuilds the blocks the compact relaxation eliminates. With
/// `S = sum_i Wxx^(i,i)` and `U = S^+ X^T`:
///
/// ```text
///   Y'          = X U
///   Wxy^(i,j)   = Wxx^(i,j) U
///   Wyy         = (I_n (x) U)^T Wxx (I_n (x) U)
/// ```
///
/// The returned point carries `Y'` in place of the input `Y`.
pub fn reconstruct_eliminated(x: &DMatrix<f64>, y: &DMatrix<f64>, wxx: &DMatrix<f64>) -> Result<LiftedPoint> {
    let (n, m) = x.shape();
    let nm = n * m;
    if wxx.shape() != (nm, nm) || y.shape() != (n, n) {
        return Err(dim_err("reconstruction expects X n x m, Y n x n, Wxx nm x nm"));
    }
    let s = block_diag_sum(&BlockView::square(wxx, m)?)?;

    let xt = vec_t(x);
    let mut arrow = DMatrix::zeros(1 + nm, 1 + nm);
    arrow[(0, 0)] = 1.0;
    for p in 0..nm {
        arrow[(0, 1 + p)] = xt[p];
        arrow[(1 + p, 0)] = xt[p];
    }
    arrow.view_mut((1, 1), (nm, nm)).copy_from(wxx);
    let mut coupling = DMatrix::zeros(m + n, m + n);
    coupling.view_mut((0, 0), (m, m)).copy_from(&s);
    coupling.view_mut((m, 0), (n, m)).copy_from(x);
    coupling.view_mut((0, m), (m, n)).copy_from(&x.transpose());
    coupling.view_mut((m, m), (n, n)).copy_from(y);
    let upper = DMatrix::identity(n, n) - y;
    let residual = [
        -min_eigenvalue(&arrow)?,
        -min_eigenvalue(&coupling)?,
        -min_eigenvalue(&upper)?,
        (wxx - wxx.transpose()).amax(),
        (y - y.transpose()).amax(),
    ]
    .into_iter()
    .fold(0.0, f64::max);
    if residual > INPUT_TOLERANCE {
        return Err(Error::InfeasibleInput(residual));
    }

    let u = pseudoinverse(&s) * x.transpose();
    let y_int = x * &u;
    let mut wxy = DMatrix::zeros(nm, n * n);
    let mut wyy = DMatrix::zeros(n * n, n * n);
    for i in 0..n {
        for j in 0..n {
            let block = wxx.view((i * m, j * m), (m, m));
            let bu = block * &u;
            wyy.view_mut((i * n, j * n), (n, n)).copy_from(&(u.transpose() * &bu));
            wxy.view_mut((i * m, j * n), (m, n)).copy_from(&bu);
        }
    }
    let wyy = (&wyy + wyy.transpose()) * 0.5;
    let y_int = (&y_int + y_int.transpose()) * 0.5;
    Ok(LiftedPoint {
        x: x.clone(),
        y: y_int,
        wxx: wxx.clone(),
        wxy,
        wyy,
    })
}

/// Feasibility of a point for the unstrengthened full lifted relaxation of
/// `p`, evaluated row by row on the generated program.
pub fn full_lifted_violation(p: &LowRankQuadraticProblem, point: &LiftedPoint) -> Result<Violation> {
    if p.orientation != VecOrientation::RowStacked {
        return Err(Error::InvalidArgument(
            "lifted points are expressed in row-stacked coordinates".into(),
        ));
    }
    let prog = build_full_lifted(p, &StrengtheningOptions::default())?;
    prog.violation(&point.embed(&prog)?)
}
