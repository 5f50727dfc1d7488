//! Text form of a sparsity pattern.
//!
//! First line `m n`, then one line per row: the 1-based row index, the entry
//! count, and the sorted 1-based column indices, separated by single spaces.

use std::fmt::Write as _;

use admodes_core::sparse::SparsityPattern;

use crate::error::{AppError, Result};

pub fn write_pattern(p: &SparsityPattern) -> String {
    let mut out = String::new();
    writeln!(out, "{} {}", p.n_rows(), p.n_cols()).unwrap();
    for (i, row) in p.rows().iter().enumerate() {
        write!(out, "{} {}", i + 1, row.len()).unwrap();
        for j in row {
            write!(out, " {j}").unwrap();
        }
        out.push('\n');
    }
    out
}

pub fn parse_pattern(text: &str) -> Result<SparsityPattern> {
    let mut lines = text.lines().filter(|l| !l.trim().is_empty());
    let head = lines
        .next()
        .ok_or_else(|| AppError::format("empty pattern"))?;
    let dims = numbers(head)?;
    let [m, n] = dims[..] else {
        return Err(AppError::format("pattern header must be `m n`"));
    };
    let mut rows = Vec::with_capacity(m);
    for (k, line) in lines.enumerate() {
        let nums = numbers(line)?;
        if nums.len() < 2 || nums[0] != k + 1 {
            return Err(AppError::format(format!("bad pattern row line {:?}", line)));
        }
        if nums[1] != nums.len() - 2 {
            return Err(AppError::format(format!(
                "row {} count does not match entries",
                k + 1
            )));
        }
        rows.push(nums[2..].to_vec());
    }
    if rows.len() != m {
        return Err(AppError::format(format!(
            "expected {m} rows, found {}",
            rows.len()
        )));
    }
    SparsityPattern::new(n, rows).map_err(|e| AppError::format(e.to_string()))
}

fn numbers(line: &str) -> Result<Vec<usize>> {
    line.split_whitespace()
        .map(|t| {
            t.parse()
                .map_err(|_| AppError::format(format!("not an index: {t:?}")))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use admodes_core::bratu::BratuProblem;
    use proptest::prelude::*;

    #[test]
    fn fixture_pattern_text() {
        let p = BratuProblem::fixture().jacobian_support(true);
        let text = write_pattern(&p);
        let mut lines = text.lines();
        assert_eq!(lines.next(), Some("7 9"));
        assert_eq!(lines.next(), Some("1 4 1 2 8 9"));
        assert_eq!(lines.nth(2), Some("4 5 3 4 5 8 9"));
        assert_eq!(parse_pattern(&text).unwrap(), p);
    }

    #[test]
    fn rejects_bad_text() {
        assert!(parse_pattern("").is_err());
        assert!(parse_pattern("1 2\n1 2 1\n").is_err());
        assert!(parse_pattern("1 2\n1 1 3\n").is_err());
        assert!(parse_pattern("2 2\n1 1 1\n").is_err());
        assert!(parse_pattern("1 2\n1 2 2 1\n").is_err());
    }

    proptest! {
        #[test]
        fn text_round_trip(rows in proptest::collection::vec(proptest::collection::btree_set(1usize..=30, 0..8), 0..12)) {
            let p = SparsityPattern::new(30, rows.into_iter().map(|r| r.into_iter().collect()).collect()).unwrap();
            prop_assert_eq!(parse_pattern(&write_pattern(&p)).unwrap(), p);
        }
    }
}
