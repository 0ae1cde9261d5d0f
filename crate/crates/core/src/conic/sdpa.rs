//! SDPA sparse format (`.dat-s`).
//!
//! The equality standard form `min c.x, Ax = b, x in K` is the SDPA "dual"
//! problem `max F0 . Y  s.t.  Fk . Y = ck`, so the file carries `F0 = -C`,
//! `Fk` = row `k` of `A` and the rhs line is `b`. PSD blocks come first in
//! program order; every nonnegative scalar is gathered into one trailing
//! diagonal block, and free scalars are split as `x = x+ - x-` inside it.
//! Only the upper triangle is written. Off-diagonal matrix coefficients are
//! half the row coefficient, which keeps the round trip exact.

use std::fmt::Write as _;

use super::program::{Cone, ConicProgram, SparseRow};
use super::svec::svec_position;
use crate::error::{Error, Result};

#[derive(Clone, Copy)]
enum Slot {
    /// (sdpa block, row, col), 1-based, row <= col
    Matrix(usize, usize, usize),
    /// Free scalar split into two diagonal positions of the LP block.
    Split(usize, usize),
}

fn fmt_value(v: f64) -> String {
    format!("{v:.16e}")
}

pub fn export_sdpa(p: &ConicProgram) -> Result<String> {
    if let Some(b) = p
        .blocks()
        .iter()
        .find(|b| matches!(b.cone, Cone::SecondOrder(_)))
    {
        return Err(Error::UnsupportedCone(format!(
            "{} (second-order; lower it first)",
            b.label
        )));
    }

    let mut sizes: Vec<i64> = Vec::new();
    let mut slots = vec![Slot::Split(0, 0); p.num_vars()];
    for blk in p.blocks() {
        if let Cone::Psd(side) = blk.cone {
            sizes.push(side as i64);
            let id = sizes.len();
            for k in 0..blk.cone.scalar_len() {
                let (r, c) = svec_position(side, k);
                slots[blk.offset + k] = Slot::Matrix(id, c + 1, r + 1);
            }
        }
    }
    let lp_id = sizes.len() + 1;
    let mut lp_len = 0;
    for blk in p.blocks() {
        match blk.cone {
            Cone::NonNeg(len) => {
                for k in 0..len {
                    lp_len += 1;
                    slots[blk.offset + k] = Slot::Matrix(lp_id, lp_len, lp_len);
                }
            }
            Cone::Free(len) => {
                for k in 0..len {
                    slots[blk.offset + k] = Slot::Split(lp_len + 1, lp_len + 2);
                    lp_len += 2;
                }
            }
            _ => {}
        }
    }
    if lp_len > 0 {
        sizes.push(-(lp_len as i64));
    }

    let mut entries: Vec<(usize, usize, usize, usize, f64)> = Vec::new();
    let push = |k: usize, v: usize, coef: f64, entries: &mut Vec<_>| {
        if coef == 0.0 {
            return;
        }
        match slots[v] {
            Slot::Matrix(blk, i, j) => {
                let val = if i == j { coef } else { 0.5 * coef };
                entries.push((k, blk, i, j, val));
            }
            Slot::Split(pos, neg) => {
                entries.push((k, lp_id, pos, pos, coef));
                entries.push((k, lp_id, neg, neg, -coef));
            }
        }
    };
    for (v, &cv) in p.objective().iter().enumerate() {
        push(0, v, -cv, &mut entries);
    }
    for (k, row) in p.rows().iter().enumerate() {
        for (&v, &a) in row.idx.iter().zip(&row.val) {
            push(k + 1, v, a, &mut entries);
        }
    }
    entries.sort_by(|a, b| (a.0, a.1, a.2, a.3).cmp(&(b.0, b.1, b.2, b.3)));

    let mut out = String::new();
    writeln!(out, "{}", p.num_rows()).unwrap();
    writeln!(out, "{}", sizes.len()).unwrap();
    let sizes_line: Vec<String> = sizes.iter().map(|s| s.to_string()).collect();
    writeln!(out, "{}", sizes_line.join(" ")).unwrap();
    let rhs: Vec<String> = p.rhs().iter().map(|&v| fmt_value(v)).collect();
    writeln!(out, "{}", rhs.join(" ")).unwrap();
    for (k, blk, i, j, v) in entries {
        writeln!(out, "{k} {blk} {i} {j} {}", fmt_value(v)).unwrap();
    }
    Ok(out)
}

/// Reads an SDPA sparse file into canonical form: PSD blocks labelled
/// `block<k>`, diagonal blocks as nonnegative blocks labelled `lp<k>`.
pub fn import_sdpa(text: &str) -> Result<ConicProgram> {
    let mut lines = text
        .lines()
        .enumerate()
        .filter(|(_, l)| {
            let t = l.trim_start();
            !t.is_empty() && !t.starts_with('"') && !t.starts_with('*')
        })
        .map(|(n, l)| (n + 1, l.replace([',', '(', ')', '{', '}'], " ")));

    let mut next = |what: &str| {
        lines.next().ok_or(Error::Parse {
            line: 0,
            msg: format!("missing {what}"),
        })
    };
    let parse_err = |line: usize, msg: String| Error::Parse { line, msg };

    let (ln, l) = next("mDIM")?;
    let m: usize = l
        .split_whitespace()
        .next()
        .and_then(|t| t.parse().ok())
        .ok_or_else(|| parse_err(ln, "bad mDIM".into()))?;
    let (ln, l) = next("nBLOCK")?;
    let nblock: usize = l
        .split_whitespace()
        .next()
        .and_then(|t| t.parse().ok())
        .ok_or_else(|| parse_err(ln, "bad nBLOCK".into()))?;
    let (ln, l) = next("block structure")?;
    let sizes: Vec<i64> = l
        .split_whitespace()
        .take(nblock)
        .map(|t| t.parse::<i64>())
        .collect::<std::result::Result<_, _>>()
        .map_err(|e| parse_err(ln, e.to_string()))?;
    if sizes.len() != nblock || sizes.contains(&0) {
        return Err(parse_err(ln, "block structure does not match nBLOCK".into()));
    }

    let mut rhs = Vec::with_capacity(m);
    while rhs.len() < m {
        let (ln, l) = next("right-hand side")?;
        for t in l.split_whitespace() {
            if rhs.len() < m {
                rhs.push(t.parse::<f64>().map_err(|e| parse_err(ln, e.to_string()))?);
            }
        }
    }

    let mut p = ConicProgram::new();
    let mut ids = Vec::with_capacity(nblock);
    for (k, &s) in sizes.iter().enumerate() {
        let id = if s > 0 {
            p.add_psd_block(&format!("block{}", k + 1), s as usize)?
        } else {
            p.add_nonneg_block(&format!("lp{}", k + 1), s.unsigned_abs() as usize)?
        };
        ids.push(id);
    }

    let mut row_terms: Vec<Vec<(usize, f64)>> = vec![Vec::new(); m];
    let mut c = vec![0.0; p.num_vars()];
    for (ln, l) in lines {
        let t: Vec<&str> = l.split_whitespace().collect();
        if t.len() < 5 {
            return Err(parse_err(ln, "expected `k block i j value`".into()));
        }
        let ints: Vec<usize> = t[..4]
            .iter()
            .map(|s| s.parse::<usize>())
            .collect::<std::result::Result<_, _>>()
            .map_err(|e| parse_err(ln, e.to_string()))?;
        let val: f64 = t[4].parse().map_err(|_| parse_err(ln, format!("bad value `{}`", t[4])))?;
        let (k, blk, i, j) = (ints[0], ints[1], ints[2], ints[3]);
        if k > m || blk == 0 || blk > nblock || i == 0 || j == 0 {
            return Err(parse_err(ln, "index out of range".into()));
        }
        let id = ids[blk - 1];
        let (var, coef) = match p.block(id).cone {
            Cone::Psd(side) => {
                if i > side || j > side {
                    return Err(parse_err(ln, "entry outside block".into()));
                }
                let t = p.entry(id, i - 1, j - 1);
                (t.var, if i == j { val } else { 2.0 * val })
            }
            Cone::NonNeg(len) => {
                if i != j || i > len {
                    return Err(parse_err(ln, "diagonal block entry must be on the diagonal".into()));
                }
                (p.scalar(id, i - 1).var, val)
            }
            _ => unreachable!(),
        };
        if k == 0 {
            c[var] -= coef;
        } else {
            row_terms[k - 1].push((var, coef));
        }
    }

    {
        let (pc, _, _, _) = p.raw_parts_mut();
        pc.copy_from_slice(&c);
    }
    for (terms, b) in row_terms.into_iter().zip(rhs) {
        let e = super::program::LinExpr { terms, constant: 0.0 };
        let (idx, val) = e.canonical().into_iter().unzip();
        p.push_row_unchecked(SparseRow { idx, val }, b);
    }
    Ok(p)
}
