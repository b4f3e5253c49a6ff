//! Plain-text problem dumps.
//!
//! ```text
//! conic <n> <m> <p>
//! cones <l|q><dim> ...
//! <c: n numbers>
//! <A: m rows of n numbers>
//! <b: m numbers>
//! <G: p rows of n numbers>
//! <h: p numbers>
//! ```
//!
//! `l` marks a nonnegative orthant and `q` a second-order cone. Numbers are
//! whitespace separated; line breaks after the header are cosmetic. Lines
//! starting with `#` are ignored.

use std::fmt::Write;

use nalgebra::{DMatrix, DVector};

use super::{Cone, ConicProblem};
use crate::error::{Error, Result};

fn write_row<'a>(out: &mut String, row: impl Iterator<Item = &'a f64>) {
    let items: Vec<String> = row.map(|v| format!("{v:?}")).collect();
    out.push_str(&items.join(" "));
    out.push('\n');
}

pub fn dump(p: &ConicProblem) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "conic {} {} {}", p.num_vars(), p.num_eq(), p.num_cone_rows());
    out.push_str("cones");
    for c in &p.cones {
        let _ = match c {
            Cone::NonNeg(d) => write!(out, " l{d}"),
            Cone::SecondOrder(d) => write!(out, " q{d}"),
        };
    }
    out.push('\n');
    write_row(&mut out, p.c.iter());
    for r in 0..p.num_eq() {
        write_row(&mut out, p.a.row(r).iter());
    }
    write_row(&mut out, p.b.iter());
    for r in 0..p.num_cone_rows() {
        write_row(&mut out, p.g.row(r).iter());
    }
    write_row(&mut out, p.h.iter());
    out
}

fn parse_err(msg: impl Into<String>) -> Error {
    Error::InvalidParameter(format!("conic dump: {}", msg.into()))
}

pub fn load(text: &str) -> Result<ConicProblem> {
    let mut lines = text.lines().map(str::trim).filter(|l| !l.is_empty() && !l.starts_with('#'));

    let header: Vec<&str> = lines.next().ok_or_else(|| parse_err("empty input"))?.split_whitespace().collect();
    if header.len() != 4 || header[0] != "conic" {
        return Err(parse_err("expected `conic <n> <m> <p>`"));
    }
    let dims: Vec<usize> = header[1..]
        .iter()
        .map(|t| t.parse().map_err(|_| parse_err(format!("bad dimension `{t}`"))))
        .collect::<Result<_>>()?;
    let (n, m, p) = (dims[0], dims[1], dims[2]);

    let cone_line = lines.next().ok_or_else(|| parse_err("missing cones line"))?;
    let mut tokens = cone_line.split_whitespace();
    if tokens.next() != Some("cones") {
        return Err(parse_err("expected `cones ...`"));
    }
    let cones = tokens
        .map(|t| {
            if t.len() < 2 || !t.is_ascii() {
                return Err(parse_err(format!("bad cone `{t}`")));
            }
            let (kind, dim) = t.split_at(1);
            let dim: usize = dim.parse().map_err(|_| parse_err(format!("bad cone `{t}`")))?;
            match kind {
                "l" => Ok(Cone::NonNeg(dim)),
                "q" => Ok(Cone::SecondOrder(dim)),
                _ => Err(parse_err(format!("unknown cone kind `{kind}`"))),
            }
        })
        .collect::<Result<Vec<_>>>()?;

    let numbers = lines
        .flat_map(str::split_whitespace)
        .map(|t| t.parse::<f64>().map_err(|_| parse_err(format!("bad number `{t}`"))))
        .collect::<Result<Vec<_>>>()?;
    let expected = n + m * n + m + p * n + p;
    if numbers.len() != expected {
        return Err(parse_err(format!("expected {expected} numbers, found {}", numbers.len())));
    }
    let mut rest = numbers.as_slice();
    let mut take = |k: usize| {
        let (head, tail) = rest.split_at(k);
        rest = tail;
        head.to_vec()
    };
    let c = DVector::from_vec(take(n));
    let a = DMatrix::from_row_slice(m, n, &take(m * n));
    let b = DVector::from_vec(take(m));
    let g = DMatrix::from_row_slice(p, n, &take(p * n));
    let h = DVector::from_vec(take(p));
    let problem = ConicProblem { c, a, b, g, h, cones };
    problem.validate()?;
    Ok(problem)
}
