//! Sparse forward mode and dependency-pattern propagation.
//!
//! [`SparseDual`] carries its derivative as a sorted list of `(index, value)`
//! pairs, so rows of a sparse Jacobian come out directly without knowing the
//! pattern in advance. [`BitDual`] keeps only the set of independents a value
//! depends on, which gives the structural sparsity pattern.
//!
//! Independent indices are 1-based throughout this module.

use alloc::vec;
use alloc::vec::Vec;

use fixedbitset::FixedBitSet;

use crate::active::{check_input_len, eval_checked, Active, VectorFunction};
use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::op::{apply_elementary, local_partial, ElementaryOp};

/// Sorted `(index, value)` pairs, indices strictly increasing, no stored zeros.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct SparseDerivative {
    pairs: Vec<(usize, f64)>,
}

impl SparseDerivative {
    pub fn zero() -> Self {
        SparseDerivative::default()
    }

    /// Builds a derivative from arbitrary pairs: sorts, sums duplicates and
    /// drops exact zeros.
    pub fn from_pairs(mut pairs: Vec<(usize, f64)>) -> Result<Self> {
        if pairs.iter().any(|&(i, _)| i == 0) {
            return Err(Error::InvalidIndex);
        }
        pairs.sort_by_key(|&(i, _)| i);
        let mut out: Vec<(usize, f64)> = Vec::with_capacity(pairs.len());
        for (i, v) in pairs {
            match out.last_mut() {
                Some(last) if last.0 == i => last.1 += v,
                _ => out.push((i, v)),
            }
        }
        out.retain(|&(_, v)| v != 0.0);
        Ok(SparseDerivative { pairs: out })
    }

    pub fn pairs(&self) -> &[(usize, f64)] {
        &self.pairs
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn get(&self, index: usize) -> f64 {
        self.pairs
            .binary_search_by_key(&index, |&(i, _)| i)
            .map_or(0.0, |k| self.pairs[k].1)
    }

    /// Dense vector of length `n`; entry `j - 1` holds index `j`.
    pub fn to_dense(&self, n: usize) -> Vec<f64> {
        let mut out = vec![0.0; n];
        for &(i, v) in &self.pairs {
            out[i - 1] = v;
        }
        out
    }

    pub fn indices(&self) -> impl Iterator<Item = usize> + '_ {
        self.pairs.iter().map(|&(i, _)| i)
    }

    fn scaled(&self, a: f64) -> Self {
        let pairs = self
            .pairs
            .iter()
            .map(|&(i, v)| (i, a * v))
            .filter(|&(_, v)| v != 0.0)
            .collect();
        SparseDerivative { pairs }
    }
}

/// The single-pair derivative `[(i, v)]`; `v == 0` gives the empty derivative.
pub fn sparse_seed(i: usize, v: f64) -> Result<SparseDerivative> {
    if i == 0 {
        return Err(Error::InvalidIndex);
    }
    if v == 0.0 {
        return Ok(SparseDerivative::zero());
    }
    Ok(SparseDerivative {
        pairs: vec![(i, v)],
    })
}

/// `a*u + b*w` by a sorted merge. A zero coefficient skips its operand.
pub fn sparse_linear_combine(
    a: f64,
    u: &SparseDerivative,
    b: f64,
    w: &SparseDerivative,
) -> SparseDerivative {
    if a == 0.0 {
        return w.scaled(b);
    }
    if b == 0.0 {
        return u.scaled(a);
    }
    let (u, w) = (&u.pairs, &w.pairs);
    let mut out = Vec::with_capacity(u.len() + w.len());
    let (mut p, mut q) = (0, 0);
    while p < u.len() || q < w.len() {
        let (i, v) = if q == w.len() || (p < u.len() && u[p].0 < w[q].0) {
            p += 1;
            (u[p - 1].0, a * u[p - 1].1)
        } else if p == u.len() || w[q].0 < u[p].0 {
            q += 1;
            (w[q - 1].0, b * w[q - 1].1)
        } else {
            p += 1;
            q += 1;
            (u[p - 1].0, a * u[p - 1].1 + b * w[q - 1].1)
        };
        if v != 0.0 {
            out.push((i, v));
        }
    }
    SparseDerivative { pairs: out }
}

/// Parallel index/value arrays and the number of stored pairs.
pub fn sparse_extract(d: &SparseDerivative) -> (Vec<usize>, Vec<f64>, usize) {
    let (idx, val): (Vec<usize>, Vec<f64>) = d.pairs.iter().copied().unzip();
    (idx, val, d.len())
}

/// Value plus sparse derivative.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseDual {
    pub value: f64,
    pub deriv: SparseDerivative,
}

impl SparseDual {
    pub fn passive(value: f64) -> Self {
        SparseDual {
            value,
            deriv: SparseDerivative::zero(),
        }
    }
}

impl Active for SparseDual {
    fn value(&self) -> f64 {
        self.value
    }

    fn constant(&self, c: f64) -> Result<Self> {
        Ok(SparseDual::passive(c))
    }

    fn unary(&self, op: ElementaryOp) -> Result<Self> {
        let args = [self.value];
        let value = apply_elementary(op, &args)?;
        let d = local_partial(op, &args, 0)?;
        Ok(SparseDual {
            value,
            deriv: self.deriv.scaled(d),
        })
    }

    fn binary(&self, op: ElementaryOp, rhs: &Self) -> Result<Self> {
        let args = [self.value, rhs.value];
        let value = apply_elementary(op, &args)?;
        let da = local_partial(op, &args, 0)?;
        let db = local_partial(op, &args, 1)?;
        Ok(SparseDual {
            value,
            deriv: sparse_linear_combine(da, &self.deriv, db, &rhs.deriv),
        })
    }
}

/// Rows of `F'(x)` restricted to the `active` independents (1-based).
///
/// Inactive independents enter as passive values with empty derivatives.
pub fn sparse_jacobian<F: VectorFunction>(
    f: &F,
    x: &[f64],
    active: &[usize],
) -> Result<Vec<SparseDerivative>> {
    check_input_len(f, x.len())?;
    let mut is_active = vec![false; x.len()];
    for &j in active {
        if j == 0 || j > x.len() {
            return Err(Error::InvalidIndex);
        }
        is_active[j - 1] = true;
    }
    let inputs = x
        .iter()
        .enumerate()
        .map(|(k, &v)| {
            let deriv = if is_active[k] {
                sparse_seed(k + 1, 1.0)?
            } else {
                SparseDerivative::zero()
            };
            Ok(SparseDual { value: v, deriv })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(eval_checked(f, &inputs)?
        .into_iter()
        .map(|d| d.deriv)
        .collect())
}

/// Set of independents (1-based) a value structurally depends on.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BitPattern {
    bits: FixedBitSet,
}

impl BitPattern {
    pub fn empty(n: usize) -> Self {
        BitPattern {
            bits: FixedBitSet::with_capacity(n),
        }
    }

    pub fn single(n: usize, index: usize) -> Result<Self> {
        if index == 0 || index > n {
            return Err(Error::InvalidIndex);
        }
        let mut p = BitPattern::empty(n);
        p.bits.insert(index - 1);
        Ok(p)
    }

    pub fn capacity(&self) -> usize {
        self.bits.len()
    }

    pub fn contains(&self, index: usize) -> bool {
        index >= 1 && self.bits.contains(index - 1)
    }

    pub fn union(&self, other: &BitPattern) -> BitPattern {
        let mut bits = self.bits.clone();
        bits.union_with(&other.bits);
        BitPattern { bits }
    }

    /// Set indices in increasing order, 1-based.
    pub fn indices(&self) -> Vec<usize> {
        self.bits.ones().map(|k| k + 1).collect()
    }
}

/// Value plus dependency pattern.
#[derive(Debug, Clone, PartialEq)]
pub struct BitDual {
    pub value: f64,
    pub pattern: BitPattern,
}

impl Active for BitDual {
    fn value(&self) -> f64 {
        self.value
    }

    fn constant(&self, c: f64) -> Result<Self> {
        Ok(BitDual {
            value: c,
            pattern: BitPattern::empty(self.pattern.capacity()),
        })
    }

    fn unary(&self, op: ElementaryOp) -> Result<Self> {
        Ok(BitDual {
            value: apply_elementary(op, &[self.value])?,
            pattern: self.pattern.clone(),
        })
    }

    fn binary(&self, op: ElementaryOp, rhs: &Self) -> Result<Self> {
        if self.pattern.capacity() != rhs.pattern.capacity() {
            return Err(Error::DimensionMismatch {
                what: "bit pattern capacity",
                expected: self.pattern.capacity(),
                got: rhs.pattern.capacity(),
            });
        }
        Ok(BitDual {
            value: apply_elementary(op, &[self.value, rhs.value])?,
            pattern: self.pattern.union(&rhs.pattern),
        })
    }
}

/// Row-wise structural sparsity pattern with 1-based column indices.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SparsityPattern {
    n_cols: usize,
    rows: Vec<Vec<usize>>,
}

impl SparsityPattern {
    /// Validates that each row is strictly increasing within `1..=n_cols`.
    pub fn new(n_cols: usize, rows: Vec<Vec<usize>>) -> Result<Self> {
        for row in &rows {
            if row.iter().any(|&j| j == 0 || j > n_cols) {
                return Err(Error::InvalidIndex);
            }
            if row.windows(2).any(|w| w[0] >= w[1]) {
                return Err(Error::InvalidPattern("row indices not strictly increasing"));
            }
        }
        Ok(SparsityPattern { n_cols, rows })
    }

    /// Support (exactly nonzero entries) of a dense matrix.
    pub fn from_dense_support(m: &Matrix) -> Self {
        let rows = (0..m.rows())
            .map(|i| {
                (0..m.cols())
                    .filter(|&j| m[(i, j)] != 0.0)
                    .map(|j| j + 1)
                    .collect()
            })
            .collect();
        SparsityPattern {
            n_cols: m.cols(),
            rows,
        }
    }

    pub fn n_rows(&self) -> usize {
        self.rows.len()
    }

    pub fn n_cols(&self) -> usize {
        self.n_cols
    }

    pub fn rows(&self) -> &[Vec<usize>] {
        &self.rows
    }

    pub fn row(&self, i: usize) -> &[usize] {
        &self.rows[i]
    }

    pub fn nnz(&self) -> usize {
        self.rows.iter().map(Vec::len).sum()
    }

    /// `i` is a 0-based row, `j` a 1-based column.
    pub fn contains(&self, i: usize, j: usize) -> bool {
        self.rows[i].binary_search(&j).is_ok()
    }

    /// Whether every entry of `other` is also in `self`.
    pub fn is_superset_of(&self, other: &SparsityPattern) -> bool {
        self.n_rows() == other.n_rows()
            && other
                .rows
                .iter()
                .enumerate()
                .all(|(i, r)| r.iter().all(|&j| self.contains(i, j)))
    }
}

/// Structural Jacobian pattern by forward bit propagation over all `n` independents.
pub fn pattern_jacobian<F: VectorFunction>(f: &F, x: &[f64], n: usize) -> Result<SparsityPattern> {
    if n != x.len() {
        return Err(Error::DimensionMismatch {
            what: "pattern width",
            expected: x.len(),
            got: n,
        });
    }
    check_input_len(f, n)?;
    let inputs = x
        .iter()
        .enumerate()
        .map(|(k, &v)| {
            Ok(BitDual {
                value: v,
                pattern: BitPattern::single(n, k + 1)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let rows = eval_checked(f, &inputs)?
        .iter()
        .map(|d| d.pattern.indices())
        .collect();
    Ok(SparsityPattern { n_cols: n, rows })
}
