//! Plain-text instance files.
//!
//! Matrix completion:
//! ```text
//! n m |Omega| lambda k gamma
//! <n rows of m values>
//! <|Omega| lines "i j", one-based>
//! ```
//! `gamma` is `inf` when absent. Unobserved entries of `A` may be written
//! as `*`. Lines starting with `#` are ignored.
//!
//! Reduced-rank regression: header `n p m mu`, then `A` (n x p) and `B`
//! (n x m), row-major.

use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::library::RRRInstance;
use crate::linalg::DenseMatrix;
use crate::problem::ObservedMatrix;

/// A matrix-completion instance together with its model parameters.
#[derive(Clone, Debug, PartialEq)]
pub struct McInstance {
    pub obs: ObservedMatrix,
    pub lambda: f64,
    pub k: usize,
    pub gamma: Option<f64>,
}

struct Tokens<'a> {
    items: Vec<(usize, &'a str)>,
    pos: usize,
}

impl<'a> Tokens<'a> {
    fn new(text: &'a str) -> Self {
        let items = text
            .lines()
            .enumerate()
            .filter(|(_, l)| !l.trim_start().starts_with('#'))
            .flat_map(|(n, l)| l.split_whitespace().map(move |t| (n + 1, t)))
            .collect();
        Tokens { items, pos: 0 }
    }

    fn next(&mut self, what: &str) -> Result<(usize, &'a str)> {
        let last_line = self.items.last().map_or(1, |t| t.0);
        let t = self.items.get(self.pos).copied().ok_or_else(|| Error::Parse {
            line: last_line,
            msg: format!("unexpected end of input, expected {what}"),
        })?;
        self.pos += 1;
        Ok(t)
    }

    fn parse<T: std::str::FromStr>(&mut self, what: &str) -> Result<T> {
        let (line, tok) = self.next(what)?;
        tok.parse().map_err(|_| Error::Parse {
            line,
            msg: format!("invalid {what}: {tok:?}"),
        })
    }

    fn real(&mut self, what: &str) -> Result<f64> {
        let (line, tok) = self.next(what)?;
        let v: f64 = match tok {
            "inf" | "+inf" | "Inf" => f64::INFINITY,
            _ => tok.parse().map_err(|_| Error::Parse {
                line,
                msg: format!("invalid {what}: {tok:?}"),
            })?,
        };
        Ok(v)
    }

    fn finish(&self) -> Result<()> {
        match self.items.get(self.pos) {
            Some(&(line, tok)) => Err(Error::Parse {
                line,
                msg: format!("trailing token {tok:?}"),
            }),
            None => Ok(()),
        }
    }
}

pub fn read_mc_instance(text: &str) -> Result<McInstance> {
    let mut t = Tokens::new(text);
    let n: usize = t.parse("n")?;
    let m: usize = t.parse("m")?;
    let count: usize = t.parse("|Omega|")?;
    let lambda = t.real("lambda")?;
    let k: usize = t.parse("k")?;
    let gamma = t.real("gamma")?;
    let mut data = Vec::with_capacity(n * m);
    let mut stars = Vec::new();
    for idx in 0..n * m {
        let (line, tok) = t.next("matrix entry")?;
        if tok == "*" {
            stars.push((idx / m, idx % m));
            data.push(0.0);
            continue;
        }
        let v: f64 = tok.parse().map_err(|_| Error::Parse {
            line,
            msg: format!("invalid matrix entry {tok:?}"),
        })?;
        if !v.is_finite() {
            return Err(Error::Parse {
                line,
                msg: "matrix entries must be finite".into(),
            });
        }
        data.push(v);
    }
    let mut omega = Vec::with_capacity(count);
    for _ in 0..count {
        let (line, _) = t.items.get(t.pos).copied().unwrap_or((0, ""));
        let i: usize = t.parse("row index")?;
        let j: usize = t.parse("column index")?;
        if i == 0 || j == 0 || i > n || j > m {
            return Err(Error::Parse {
                line,
                msg: format!("index pair ({i}, {j}) outside 1..={n} x 1..={m}"),
            });
        }
        if stars.contains(&(i - 1, j - 1)) {
            return Err(Error::Parse {
                line,
                msg: format!("entry ({i}, {j}) is marked missing but listed as observed"),
            });
        }
        omega.push((i - 1, j - 1));
    }
    t.finish()?;
    let a = DenseMatrix::from_row_slice(n, m, &data)?;
    let obs = ObservedMatrix::new(a, omega)?;
    let gamma = if gamma.is_infinite() { None } else { Some(gamma) };
    Ok(McInstance { obs, lambda, k, gamma })
}

pub fn write_mc_instance(inst: &McInstance) -> String {
    let (n, m) = (inst.obs.rows(), inst.obs.cols());
    let mut out = String::new();
    let gamma = inst.gamma.map_or("inf".to_string(), |g| format!("{g}"));
    let _ = writeln!(
        out,
        "{n} {m} {} {} {} {gamma}",
        inst.obs.omega().len(),
        inst.lambda,
        inst.k
    );
    for i in 0..n {
        let row: Vec<String> = (0..m)
            .map(|j| {
                if inst.obs.is_observed(i, j) {
                    format!("{}", inst.obs.a().get(i, j))
                } else {
                    "*".to_string()
                }
            })
            .collect();
        let _ = writeln!(out, "{}", row.join(" "));
    }
    for &(i, j) in inst.obs.omega() {
        let _ = writeln!(out, "{} {}", i + 1, j + 1);
    }
    out
}

pub fn read_rrr_instance(text: &str) -> Result<RRRInstance> {
    let mut t = Tokens::new(text);
    let n: usize = t.parse("n")?;
    let p: usize = t.parse("p")?;
    let m: usize = t.parse("m")?;
    let mu = t.real("mu")?;
    let mut read = |rows: usize, cols: usize| -> Result<DenseMatrix> {
        let mut v = Vec::with_capacity(rows * cols);
        for _ in 0..rows * cols {
            v.push(t.real("matrix entry")?);
        }
        DenseMatrix::from_row_slice(rows, cols, &v)
    };
    let a = read(n, p)?;
    let b = read(n, m)?;
    t.finish()?;
    RRRInstance::new(a, b, mu)
}

pub fn write_rrr_instance(inst: &RRRInstance) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "{} {} {} {}", inst.a.rows(), inst.a.cols(), inst.b.cols(), inst.mu);
    for mat in [&inst.a, &inst.b] {
        for i in 0..mat.rows() {
            let row: Vec<String> = mat.row(i).iter().map(|v| format!("{v}")).collect();
            let _ = writeln!(out, "{}", row.join(" "));
        }
    }
    out
}
