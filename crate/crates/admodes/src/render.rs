//! Text, CSV and JSON output for matrices, sparse rows and patterns.
//!
//! Text output shows two decimals, truncated toward zero, with exact zeros
//! written as `0.`. Cells are aligned on the decimal point. CSV and JSON keep
//! full precision.

use admodes_core::sparse::{SparseDerivative, SparsityPattern};
use admodes_core::Matrix;
use serde_json::{json, Value};

use crate::error::{AppError, Result};

/// Two-decimal display of `v`, truncated toward zero.
pub fn cell(v: f64) -> String {
    if v == 0.0 {
        return "0.".to_string();
    }
    if !v.is_finite() {
        return v.to_string();
    }
    // go through a long decimal expansion so that e.g. 0.29 stays 0.29
    let long = format!("{v:.12}");
    let dot = long.find('.').expect("fixed notation has a point");
    long[..dot + 3].to_string()
}

fn split(c: &str) -> (&str, &str) {
    match c.find('.') {
        Some(k) => c.split_at(k),
        None => (c, ""),
    }
}

fn aligned_lines(cells: Vec<Vec<String>>) -> String {
    let int_w = cells
        .iter()
        .flatten()
        .map(|c| split(c).0.len())
        .max()
        .unwrap_or(0)
        .max(2);
    let frac_w = cells
        .iter()
        .flatten()
        .map(|c| split(c).1.len())
        .max()
        .unwrap_or(0)
        .max(3);
    let mut out = String::new();
    for row in cells {
        let line = row
            .iter()
            .map(|c| {
                let (i, f) = split(c);
                format!("{i:>int_w$}{f:<frac_w$}")
            })
            .collect::<Vec<_>>()
            .join(" ");
        out.push_str(line.trim_end());
        out.push('\n');
    }
    out
}

pub fn matrix_text(m: &Matrix) -> String {
    aligned_lines(
        (0..m.rows())
            .map(|i| m.row(i).iter().map(|&v| cell(v)).collect())
            .collect(),
    )
}

/// Integer layout for 0/1 matrices such as seeds.
pub fn seed_text(m: &Matrix) -> String {
    let mut out = String::new();
    for i in 0..m.rows() {
        let line = m
            .row(i)
            .iter()
            .map(|v| format!("{v}"))
            .collect::<Vec<_>>()
            .join(" ");
        out.push_str(&line);
        out.push('\n');
    }
    out
}

/// One row as `(j, value)` pairs; an empty row renders as an empty string.
pub fn sparse_row_text(row: &SparseDerivative) -> String {
    row.pairs()
        .iter()
        .map(|&(j, v)| format!("({j}, {:>5})", cell(v)))
        .collect::<Vec<_>>()
        .join(" ")
}

pub fn sparse_text(rows: &[SparseDerivative]) -> String {
    rows.iter().map(|r| sparse_row_text(r) + "\n").collect()
}

/// `*` for structural nonzeros, blank otherwise.
pub fn pattern_text(p: &SparsityPattern) -> String {
    let mut out = String::new();
    for i in 0..p.n_rows() {
        let line = (1..=p.n_cols())
            .map(|j| if p.contains(i, j) { "*" } else { " " })
            .collect::<Vec<_>>()
            .join(" ");
        out.push_str(line.trim_end());
        out.push('\n');
    }
    out
}

pub fn matrix_csv(m: &Matrix) -> String {
    let mut out = String::new();
    for i in 0..m.rows() {
        let line = m
            .row(i)
            .iter()
            .map(|v| format!("{v:.16e}"))
            .collect::<Vec<_>>()
            .join(",");
        out.push_str(&line);
        out.push('\n');
    }
    out
}

/// `row,col,value` triples with 1-based indices.
pub fn sparse_csv(rows: &[SparseDerivative]) -> String {
    let mut out = String::new();
    for (i, r) in rows.iter().enumerate() {
        for &(j, v) in r.pairs() {
            out.push_str(&format!("{},{j},{v:.16e}\n", i + 1));
        }
    }
    out
}

pub fn pattern_csv(p: &SparsityPattern) -> String {
    let mut out = String::new();
    for (i, r) in p.rows().iter().enumerate() {
        for j in r {
            out.push_str(&format!("{},{j}\n", i + 1));
        }
    }
    out
}

pub fn parse_csv(text: &str) -> Result<Matrix> {
    let rows = text
        .lines()
        .filter(|l| !l.trim().is_empty())
        .map(|l| {
            l.split(',')
                .map(|t| {
                    t.trim()
                        .parse::<f64>()
                        .map_err(|_| AppError::format(format!("not a number: {t:?}")))
                })
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    let cols = rows.first().map_or(0, Vec::len);
    if rows.iter().any(|r| r.len() != cols) {
        return Err(AppError::format("ragged csv rows"));
    }
    Ok(Matrix::from_rows(&rows)?)
}

pub fn matrix_json(m: &Matrix) -> Value {
    let entries: Vec<&[f64]> = (0..m.rows()).map(|i| m.row(i)).collect();
    json!({ "rows": m.rows(), "cols": m.cols(), "entries": entries })
}

pub fn sparse_json(rows: &[SparseDerivative], n_cols: usize) -> Value {
    let entries: Vec<Vec<(usize, f64)>> = rows.iter().map(|r| r.pairs().to_vec()).collect();
    json!({ "rows": rows.len(), "cols": n_cols, "entries": entries })
}

pub fn pattern_json(p: &SparsityPattern) -> Value {
    json!({ "rows": p.n_rows(), "cols": p.n_cols(), "entries": p.rows() })
}
