//! Reduced-rank regression `min ||B - A X||_F^2 + mu rank(X)`.

use crate::conic::{ConicProgram, LinExpr};
use crate::error::{dim_err, Error, Result};
use crate::linalg::{kron_identity_left, DenseMatrix, SymMatrix};
use crate::problem::{LowRankQuadraticProblem, VecOrientation};
use crate::relax::{add_projection_hull, build_compact_lifted, term, COUPLING};

#[derive(Clone, Debug, PartialEq)]
pub struct RRRInstance {
    /// Predictors, n x p.
    pub a: DenseMatrix,
    /// Responses, n x m.
    pub b: DenseMatrix,
    pub mu: f64,
}

impl RRRInstance {
    pub fn new(a: DenseMatrix, b: DenseMatrix, mu: f64) -> Result<Self> {
        if a.rows() != b.rows() {
            return Err(dim_err(format!(
                "A has {} rows but B has {}",
                a.rows(),
                b.rows()
            )));
        }
        if !(mu >= 0.0 && mu.is_finite()) {
            return Err(Error::InvalidArgument(format!("mu must be nonnegative, got {mu}")));
        }
        Ok(RRRInstance { a, b, mu })
    }

    pub fn predictors(&self) -> usize {
        self.a.cols()
    }

    pub fn responses(&self) -> usize {
        self.b.cols()
    }
}

/// Column-stacked problem over `X` (p x m): `H = I_m (x) A^T A`,
/// `D = -2 A^T B`, constant `||B||^2`, rank penalty `mu` and no effective
/// rank cap (`k = m`).
pub fn encode_rrr(inst: &RRRInstance) -> Result<LowRankQuadraticProblem> {
    let (a, b) = (inst.a.as_matrix(), inst.b.as_matrix());
    let m = inst.responses();
    let ata = a.transpose() * a;
    let h = kron_identity_left(m, &ata);
    let h = SymMatrix::from_dense(h.as_matrix(), 1e-12)?;
    let d = DenseMatrix::from(a.transpose() * b * -2.0);
    let mut p = LowRankQuadraticProblem::new(h, d, inst.mu, 1)?
        .with_constant(b.norm_squared())
        .with_orientation(VecOrientation::ColumnStacked)?;
    p.k = m;
    Ok(p)
}

/// Lifted relaxation over `W` in `S^{pm}`: the compact relaxation of the
/// column-stacked encoding, whose block trace lives in `S^p`.
pub fn build_rrr_lifted(inst: &RRRInstance) -> Result<ConicProgram> {
    build_compact_lifted(&encode_rrr(inst)?)
}

/// ```text
///   min  <A^T A, theta> + ||B||^2 - 2 <A X, B> + mu tr(Y)
///   s.t. [[theta, X], [X^T, Y]] PSD,  Y in Conv(Y_m)
/// ```
pub fn build_rrr_compact(inst: &RRRInstance) -> Result<ConicProgram> {
    let (p, m) = (inst.predictors(), inst.responses());
    let (a, b) = (inst.a.as_matrix(), inst.b.as_matrix());
    let mut prog = ConicProgram::new();
    let cp = prog.add_psd_block(COUPLING, p + m)?;
    let cv = prog.region_view(cp, 0, 0, p + m, p + m);
    prog.define_view(COUPLING, cv)?;
    let theta = prog.region_view(cp, 0, 0, p, p);
    let x = prog.region_view(cp, 0, p, p, m);
    let y = prog.region_view(cp, p, p, m, m);
    prog.define_view("theta", theta.clone())?;
    prog.define_view("X", x.clone())?;
    add_projection_hull(&mut prog, &y, m, inst.mu)?;

    let ata = a.transpose() * a;
    let atb = a.transpose() * b;
    let mut obj = LinExpr::new();
    for j in 0..p {
        for i in 0..p {
            obj.add(term(&theta, i, j), ata[(i, j)]);
        }
        for c in 0..m {
            obj.add(term(&x, j, c), -2.0 * atb[(j, c)]);
        }
    }
    obj.add_constant(b.norm_squared());
    prog.add_objective_expr(&obj);
    Ok(prog)
}
