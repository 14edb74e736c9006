//! Text formats for states and matrices.
//!
//! State file: first line `n`, then 2^n lines `re im` in index order.
//! Matrix file: first line `rows cols`, then rows·cols `re im` pairs in
//! row-major order, separated by arbitrary whitespace.

use crate::error::{Result, SynthError};
use crate::numerics::{c64, ComplexMatrix};
use num_complex::Complex64;
use std::fmt::Write as _;

fn perr(line: usize, msg: impl Into<String>) -> SynthError {
    SynthError::Parse { line, msg: msg.into() }
}

/// Whitespace tokens tagged with their 1-based line numbers.
fn tokens(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines().enumerate().flat_map(|(i, l)| l.split_whitespace().map(move |t| (i + 1, t)))
}

fn parse_f64(line: usize, t: &str) -> Result<f64> {
    let x: f64 = t.parse().map_err(|_| perr(line, format!("invalid number `{t}`")))?;
    if !x.is_finite() {
        return Err(perr(line, format!("non-finite number `{t}`")));
    }
    Ok(x)
}

fn parse_usize(line: usize, t: &str) -> Result<usize> {
    t.parse().map_err(|_| perr(line, format!("invalid size `{t}`")))
}

fn last_line(text: &str) -> usize {
    text.lines().count().max(1)
}

fn parse_pairs<'a>(it: &mut impl Iterator<Item = (usize, &'a str)>, count: usize, end: usize) -> Result<Vec<Complex64>> {
    let mut out = Vec::with_capacity(count);
    for k in 0..count {
        let (l1, re) = it.next().ok_or_else(|| perr(end, format!("expected {count} entries, found {k}")))?;
        let (l2, im) = it.next().ok_or_else(|| perr(l1, format!("entry {k} is missing its imaginary part")))?;
        out.push(c64(parse_f64(l1, re)?, parse_f64(l2, im)?));
    }
    if let Some((l, t)) = it.next() {
        return Err(perr(l, format!("unexpected trailing token `{t}`")));
    }
    Ok(out)
}

/// Reads a state file. The amplitudes are returned as written.
pub fn parse_state(text: &str) -> Result<Vec<Complex64>> {
    let mut it = tokens(text);
    let (l, t) = it.next().ok_or_else(|| perr(1, "empty state file"))?;
    let n = parse_usize(l, t)?;
    if n == 0 || n > 30 {
        return Err(perr(l, format!("qubit count {n} out of range 1..=30")));
    }
    let header = text.lines().nth(l - 1).unwrap_or_default();
    if header.split_whitespace().count() != 1 {
        return Err(perr(l, "header line must hold only the qubit count"));
    }
    parse_pairs(&mut it, 1usize << n, last_line(text))
}

pub fn parse_matrix(text: &str) -> Result<ComplexMatrix> {
    let mut it = tokens(text);
    let (l, t) = it.next().ok_or_else(|| perr(1, "empty matrix file"))?;
    let rows = parse_usize(l, t)?;
    let (l2, t2) = it.next().ok_or_else(|| perr(l, "missing column count"))?;
    let cols = parse_usize(l2, t2)?;
    if rows == 0 || cols == 0 || rows.saturating_mul(cols) > 1 << 24 {
        return Err(perr(l, format!("unsupported shape {rows}x{cols}")));
    }
    let data = parse_pairs(&mut it, rows * cols, last_line(text))?;
    Ok(ComplexMatrix::from_row_slice(rows, cols, &data))
}

fn push_pair(s: &mut String, z: Complex64) {
    let _ = writeln!(s, "{:e} {:e}", z.re, z.im);
}

pub fn format_state(psi: &[Complex64]) -> String {
    let mut s = format!("{}\n", psi.len().trailing_zeros());
    psi.iter().for_each(|z| push_pair(&mut s, *z));
    s
}

pub fn format_matrix(m: &ComplexMatrix) -> String {
    let mut s = format!("{} {}\n", m.nrows(), m.ncols());
    for i in 0..m.nrows() {
        for j in 0..m.ncols() {
            push_pair(&mut s, m[(i, j)]);
        }
    }
    s
}
