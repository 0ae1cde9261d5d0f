//! Operator splitting between the affine set `{x : A x = b}` and the cone.
//!
//! Scaled-form ADMM on `min c.x + I{Ax=b}(x) + I_K(z)  s.t.  x = z`:
//!
//! ```text
//!   x   = proj_affine(z - u - c / rho)
//!   xr  = alpha x + (1 - alpha) z
//!   z'  = proj_K(xr + u)
//!   u'  = u + xr - z'
//! ```
//!
//! The affine projection does not depend on `rho`, so the normal equations
//! are factored once per solve. Equality multipliers come out of the affine
//! step and the dual slack is `s = -rho u`, which lies in the dual cone by
//! construction.
//!
//! The map `(z, u) -> (z', u')` is accelerated with safeguarded type-II
//! Anderson extrapolation; the history is dropped whenever `rho` changes.
//! Early on, PSD blocks with large diagonals are rescaled by a diagonal
//! congruence estimated from the current iterate.

use std::f64::consts::SQRT_2;
use std::collections::VecDeque;
use std::time::Instant;

use nalgebra::{DMatrix, DVector};

use super::csr::Csr;
use super::factor::NormalFactor;
use super::SolverSettings;
use crate::conic::{smat_into, svec_from, svec_index, Cone, ConicProgram, ConicSolution, Residuals, SolveStatus};
use crate::linalg::psd_project_dense;

const OVER_RELAXATION: f64 = 1.6;
const RHO_MIN: f64 = 1e-4;
const RHO_MAX: f64 = 1e4;
/// An accelerated step is kept only if its fixed-point residual is at
/// most this multiple of the residual of the step it replaced.
const AA_SAFEGUARD: f64 = 1.0;
const AA_REGULARIZATION: f64 = 1e-10;
/// Checks (by iteration) at which the PSD blocks are rescaled.
const RESCALE_AT: [usize; 2] = [100, 600];
/// Diagonal entries below this are left unscaled.
const SCALE_FLOOR: f64 = 1.0;

struct BlockProj {
    cone: Cone,
    offset: usize,
    buf: Option<DMatrix<f64>>,
}

/// One application of the ADMM map `(z, u) -> (z', u')`, with the equality
/// multipliers of the affine step left in `lam`.
///
/// The working variables are `z = x / e` for a positive column scaling `e`
/// of the base system, and working rows are renormalized by `rs`, so base
/// quantities are `x = e z`, `y = rs y_work` and `s = s_work / e`.
struct Step {
    e: Vec<f64>,
    rs: Vec<f64>,
    a: Csr,
    b: Vec<f64>,
    c: Vec<f64>,
    factor: NormalFactor,
    blocks: Vec<BlockProj>,
    v: Vec<f64>,
    x: Vec<f64>,
    ax: Vec<f64>,
    lam: Vec<f64>,
}

impl Step {
    fn new(a0: &Csr, b0: &[f64], c0: &[f64], e: Vec<f64>, blocks: Vec<BlockProj>) -> Step {
        let (n, m) = (c0.len(), b0.len());
        let mut rs = Vec::with_capacity(m);
        let mut rows = Vec::with_capacity(m);
        for r in 0..m {
            let (idx, val) = a0.row(r);
            let val: Vec<f64> = idx.iter().zip(val).map(|(&i, &v)| v * e[i]).collect();
            let nrm = norm(&val);
            let f = if nrm > 0.0 { 1.0 / nrm } else { 1.0 };
            rs.push(f);
            rows.push((idx.to_vec(), val.into_iter().map(|v| v * f).collect::<Vec<_>>()));
        }
        let a = Csr::from_rows(n, rows);
        let factor = NormalFactor::new(&a);
        Step {
            b: b0.iter().zip(&rs).map(|(v, f)| v * f).collect(),
            c: c0.iter().zip(&e).map(|(v, f)| v * f).collect(),
            e,
            rs,
            a,
            factor,
            blocks,
            v: vec![0.0; n],
            x: vec![0.0; n],
            ax: vec![0.0; m],
            lam: vec![0.0; m],
        }
    }

    /// `w = (z, u)` in, `out = T(w)` out.
    fn apply(&mut self, w: &[f64], rho: f64, out: &mut [f64]) -> crate::error::Result<()> {
        let n = self.c.len();
        let (z, u) = w.split_at(n);
        for k in 0..n {
            self.v[k] = z[k] - u[k] - self.c[k] / rho;
        }
        self.a.mul(&self.v, &mut self.ax);
        for r in 0..self.lam.len() {
            self.lam[r] = self.ax[r] - self.b[r];
        }
        self.factor.solve_in_place(&mut self.lam);
        self.x.copy_from_slice(&self.v);
        self.lam.iter_mut().for_each(|l| *l = -*l);
        self.a.mul_transpose_add(&self.lam, &mut self.x);
        self.lam.iter_mut().for_each(|l| *l = -*l);

        let (zn, un) = out.split_at_mut(n);
        for k in 0..n {
            let xr = OVER_RELAXATION * self.x[k] + (1.0 - OVER_RELAXATION) * z[k];
            zn[k] = xr + u[k];
        }
        un.copy_from_slice(zn);
        project_cone(&mut self.blocks, zn)?;
        for k in 0..n {
            un[k] -= zn[k];
        }
        Ok(())
    }
}

/// Type-II Anderson acceleration of a fixed-point map, safeguarded by the
/// caller.
struct Anderson {
    memory: usize,
    ds: VecDeque<Vec<f64>>,
    dg: VecDeque<Vec<f64>>,
    prev: Option<(Vec<f64>, Vec<f64>)>,
}

impl Anderson {
    fn new(memory: usize) -> Anderson {
        Anderson {
            memory,
            ds: VecDeque::with_capacity(memory),
            dg: VecDeque::with_capacity(memory),
            prev: None,
        }
    }

    fn reset(&mut self) {
        self.ds.clear();
        self.dg.clear();
        self.prev = None;
    }

    /// Records `(w, g = T(w) - w)` and returns the extrapolated next point,
    /// or `None` while there is no history.
    fn next(&mut self, w: &[f64], g: &[f64]) -> Option<Vec<f64>> {
        if self.memory == 0 {
            return None;
        }
        if let Some((pw, pg)) = self.prev.take() {
            if self.ds.len() == self.memory {
                self.ds.pop_front();
                self.dg.pop_front();
            }
            self.ds.push_back(w.iter().zip(&pw).map(|(a, b)| a - b).collect());
            self.dg.push_back(g.iter().zip(&pg).map(|(a, b)| a - b).collect());
        }
        self.prev = Some((w.to_vec(), g.to_vec()));
        let k = self.dg.len();
        if k == 0 {
            return None;
        }
        let mut gram = DMatrix::zeros(k, k);
        let mut rhs = DVector::zeros(k);
        for i in 0..k {
            for j in 0..=i {
                let d = dot(&self.dg[i], &self.dg[j]);
                gram[(i, j)] = d;
                gram[(j, i)] = d;
            }
            rhs[i] = dot(&self.dg[i], g);
        }
        let reg = AA_REGULARIZATION * gram.trace().max(f64::MIN_POSITIVE);
        for i in 0..k {
            gram[(i, i)] += reg;
        }
        let gamma = gram.cholesky()?.solve(&rhs);
        if !gamma.iter().all(|v| v.is_finite()) {
            return None;
        }
        let mut out: Vec<f64> = w.iter().zip(g).map(|(a, b)| a + b).collect();
        for i in 0..k {
            let gi = gamma[i];
            for ((o, s), y) in out.iter_mut().zip(&self.ds[i]).zip(&self.dg[i]) {
                *o -= gi * (s + y);
            }
        }
        Some(out)
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// Diagonal congruence scaling `X = D Z D` for every PSD block, with `D`
/// the square root of the current diagonal floored at one, so only large
/// entries are shrunk. Other cones keep unit scaling.
fn congruence_scaling(blocks: &[BlockProj], x: &[f64]) -> Vec<f64> {
    let mut e = vec![1.0; x.len()];
    for blk in blocks {
        let Cone::Psd(side) = blk.cone else { continue };
        if side < 2 {
            continue;
        }
        let diag: Vec<f64> = (0..side).map(|i| x[blk.offset + svec_index(side, i, i)]).collect();
        if !diag.iter().all(|v| v.is_finite()) {
            continue;
        }
        let d: Vec<f64> = diag.iter().map(|&v| v.max(SCALE_FLOOR).sqrt()).collect();
        for j in 0..side {
            for i in j..side {
                e[blk.offset + svec_index(side, i, j)] = d[i] * d[j];
            }
        }
    }
    e
}

pub(crate) fn solve(p: &ConicProgram, settings: &SolverSettings) -> ConicSolution {
    let start = Instant::now();
    let n = p.num_vars();
    let m = p.num_rows();

    // entry -> svec coordinates: x_svec = scale * x_entry
    let scale: Vec<f64> = p
        .entry_metric()
        .iter()
        .map(|&w| if w == 2.0 { SQRT_2 } else { 1.0 })
        .collect();

    // Row-normalized base system in svec coordinates.
    let mut row_scale = Vec::with_capacity(m);
    let mut rows = Vec::with_capacity(m);
    for r in p.rows() {
        let val: Vec<f64> = r.idx.iter().zip(&r.val).map(|(&i, &v)| v / scale[i]).collect();
        let nrm = norm(&val);
        let rs = if nrm > 0.0 { 1.0 / nrm } else { 1.0 };
        row_scale.push(rs);
        rows.push((r.idx.clone(), val.into_iter().map(|v| v * rs).collect::<Vec<_>>()));
    }
    let a0 = Csr::from_rows(n, rows);
    let b0: Vec<f64> = p.rhs().iter().zip(&row_scale).map(|(v, s)| v * s).collect();
    let c0: Vec<f64> = p.objective().iter().zip(&scale).map(|(v, s)| v / s).collect();
    let b_norm = p.rhs_norm();
    let c_norm = norm(&c0);

    let blocks: Vec<BlockProj> = p
        .blocks()
        .iter()
        .map(|blk| BlockProj {
            cone: blk.cone,
            offset: blk.offset,
            buf: match blk.cone {
                Cone::Psd(side) if side > 1 => Some(DMatrix::zeros(side, side)),
                _ => None,
            },
        })
        .collect();
    let mut step = Step::new(&a0, &b0, &c0, vec![1.0; n], blocks);

    let mut rho = settings.penalty;
    let mut aa = Anderson::new(settings.anderson_memory);
    // w = (z, u); f = T(w); fallback = last unaccelerated image
    let mut w = vec![0.0; 2 * n];
    let mut f = vec![0.0; 2 * n];
    let mut g = vec![0.0; 2 * n];
    let mut fallback: Option<(Vec<f64>, f64)> = None;
    let mut ax = vec![0.0; m];
    let mut rd = vec![0.0; n];
    let mut rescales = RESCALE_AT.iter().copied().peekable();

    let mut best: Option<(f64, Vec<f64>, Vec<f64>, Vec<f64>, Residuals)> = None;
    let mut history = Vec::new();
    let mut status = SolveStatus::MaxIterations;
    let mut iterations = 0;

    if settings.verbose {
        eprintln!("iteration,primal_residual,dual_residual,gap,primal_objective,rho");
    }

    for it in 1..=settings.max_iterations {
        iterations = it;
        if step.apply(&w, rho, &mut f).is_err() {
            status = SolveStatus::NumericalFailure;
            break;
        }
        for k in 0..2 * n {
            g[k] = f[k] - w[k];
        }
        if let Some((fb, fb_norm)) = fallback.take() {
            // accelerated point did worse than the plain step it replaced
            if !(norm(&g) <= AA_SAFEGUARD * fb_norm) {
                aa.reset();
                w = fb;
                if step.apply(&w, rho, &mut f).is_err() {
                    status = SolveStatus::NumericalFailure;
                    break;
                }
                for k in 0..2 * n {
                    g[k] = f[k] - w[k];
                }
            }
        }

        let last = it == settings.max_iterations;
        if it % settings.check_interval == 0 || last {
            let (z, u) = f.split_at(n);
            let x: Vec<f64> = z.iter().zip(&step.e).map(|(a, b)| a * b).collect();
            let s: Vec<f64> = u.iter().zip(&step.e).map(|(a, b)| -rho * a / b).collect();
            // rows of the base system; y_work = -rho * lam
            let y: Vec<f64> = step.lam.iter().zip(&step.rs).map(|(l, r)| -rho * l * r).collect();
            a0.mul(&x, &mut ax);
            let primal = ax
                .iter()
                .zip(&b0)
                .zip(&row_scale)
                .map(|((axr, br), rs)| ((axr - br) / rs).powi(2))
                .sum::<f64>()
                .sqrt();
            for k in 0..n {
                rd[k] = s[k] - c0[k];
            }
            a0.mul_transpose_add(&y, &mut rd);
            let dual = norm(&rd);
            let pobj = dot(&c0, &x);
            let dobj = dot(&b0, &y);
            let gap = (pobj - dobj).abs();

            if !(primal.is_finite() && dual.is_finite() && gap.is_finite()) {
                status = SolveStatus::NumericalFailure;
                break;
            }

            let rel_p = primal / (1.0 + b_norm);
            let rel_d = dual / (1.0 + c_norm);
            let rel_g = gap / (1.0 + pobj.abs() + dobj.abs());
            let combined = (rel_p / settings.eps_primal)
                .max(rel_d / settings.eps_dual)
                .max(rel_g / settings.eps_gap);
            history.push(rel_p.max(rel_d).max(rel_g));
            if settings.verbose {
                eprintln!("{it},{primal:.6e},{dual:.6e},{gap:.6e},{pobj:.10e},{rho:.3e}");
            }

            let res = Residuals { primal, dual, gap };
            if best.as_ref().is_none_or(|bst| combined <= bst.0) {
                best = Some((combined, x.clone(), y, s, res));
            }
            if combined <= 1.0 {
                status = SolveStatus::Optimal;
                break;
            }

            if rescales.next_if(|&r| it >= r).is_some() {
                let e = congruence_scaling(&step.blocks, &x);
                let (z, u) = f.split_at_mut(n);
                for k in 0..n {
                    z[k] = x[k] / e[k];
                    u[k] *= e[k] / step.e[k];
                }
                let blocks = std::mem::take(&mut step.blocks);
                step = Step::new(&a0, &b0, &c0, e, blocks);
                aa.reset();
                std::mem::swap(&mut w, &mut f);
                continue;
            }

            if settings.adaptive_penalty {
                let new_rho = if rel_p > 10.0 * rel_d {
                    (2.0 * rho).min(RHO_MAX)
                } else if rel_d > 10.0 * rel_p {
                    (0.5 * rho).max(RHO_MIN)
                } else {
                    rho
                };
                if new_rho != rho {
                    let ratio = rho / new_rho;
                    f[n..].iter_mut().for_each(|ui| *ui *= ratio);
                    rho = new_rho;
                    aa.reset();
                    std::mem::swap(&mut w, &mut f);
                    continue;
                }
            }
        }

        match aa.next(&w, &g) {
            Some(next) => {
                let fb_norm = norm(&g);
                std::mem::swap(&mut w, &mut f);
                fallback = Some((w, fb_norm));
                w = next;
            }
            None => std::mem::swap(&mut w, &mut f),
        }
    }

    let wall_time = start.elapsed().as_secs_f64();

    let (zb, yb, sb, res) = match best {
        Some((_, z, y, s, r)) if status != SolveStatus::NumericalFailure => (z, y, s, r),
        _ => {
            return ConicSolution {
                x: vec![f64::NAN; n],
                y: vec![f64::NAN; m],
                s: vec![f64::NAN; n],
                primal_objective: f64::NAN,
                dual_objective: f64::NAN,
                residuals: Residuals {
                    primal: f64::NAN,
                    dual: f64::NAN,
                    gap: f64::NAN,
                },
                status: SolveStatus::NumericalFailure,
                iterations,
                wall_time,
                residual_history: history,
            }
        }
    };

    let x_entry: Vec<f64> = zb.iter().zip(&scale).map(|(v, s)| v / s).collect();
    let s_entry: Vec<f64> = sb.iter().zip(&scale).map(|(v, s)| v * s).collect();
    let y: Vec<f64> = yb.iter().zip(&row_scale).map(|(v, s)| v * s).collect();
    let primal_objective = p.objective().iter().zip(&x_entry).map(|(a, b)| a * b).sum();
    let dual_objective = p.rhs().iter().zip(&y).map(|(a, b)| a * b).sum();
    ConicSolution {
        x: x_entry,
        y,
        s: s_entry,
        primal_objective,
        dual_objective,
        residuals: res,
        status,
        iterations,
        wall_time,
        residual_history: history,
    }
}

fn project_cone(blocks: &mut [BlockProj], z: &mut [f64]) -> crate::error::Result<()> {
    for blk in blocks.iter_mut() {
        let len = blk.cone.scalar_len();
        let seg = &mut z[blk.offset..blk.offset + len];
        match blk.cone {
            Cone::Free(_) => {}
            Cone::NonNeg(_) => seg.iter_mut().for_each(|v| *v = v.max(0.0)),
            Cone::SecondOrder(_) => project_soc(seg),
            Cone::Psd(side) => match blk.buf.as_mut() {
                None => seg[0] = seg[0].max(0.0),
                Some(buf) => {
                    smat_into(seg, side, buf);
                    psd_project_dense(buf)?;
                    svec_from(buf, side, seg);
                }
            },
        }
    }
    Ok(())
}

pub(crate) fn project_soc(seg: &mut [f64]) {
    let t = seg[0];
    let norm = seg[1..].iter().map(|v| v * v).sum::<f64>().sqrt();
    if norm <= t {
        return;
    }
    if norm <= -t {
        seg.iter_mut().for_each(|v| *v = 0.0);
        return;
    }
    let alpha = 0.5 * (t + norm);
    seg[0] = alpha;
    let f = alpha / norm;
    seg[1..].iter_mut().for_each(|v| *v *= f);
}
