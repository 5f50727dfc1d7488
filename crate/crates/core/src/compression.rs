//! Curtis-Powell-Reid column compression.
//!
//! Columns of a Jacobian that never share a nonzero row are structurally
//! orthogonal and can be summed into one seed direction. Coloring the column
//! incidence graph groups such columns; the seed matrix has one Cartesian
//! basis row per column (`e_color`), and each entry of the full Jacobian is
//! read back from the compressed product by substitution.
//!
//! Column numbers and colors are 1-based here, like [`SparsityPattern`].

use alloc::vec;
use alloc::vec::Vec;

use crate::active::VectorFunction;
use crate::dense::{forward_jacobian_product, SeedMatrix};
use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::sparse::{pattern_jacobian, SparseDerivative, SparsityPattern};

/// Columns are vertices; two columns are adjacent when some row holds both.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ColumnIncidenceGraph {
    adjacency: Vec<Vec<usize>>,
}

impl ColumnIncidenceGraph {
    pub fn n_columns(&self) -> usize {
        self.adjacency.len()
    }

    /// Sorted neighbours of column `j`.
    pub fn neighbors(&self, j: usize) -> &[usize] {
        &self.adjacency[j - 1]
    }

    pub fn degree(&self, j: usize) -> usize {
        self.adjacency[j - 1].len()
    }

    pub fn max_degree(&self) -> usize {
        self.adjacency.iter().map(Vec::len).max().unwrap_or(0)
    }

    pub fn adjacent(&self, a: usize, b: usize) -> bool {
        self.adjacency[a - 1].binary_search(&b).is_ok()
    }

    pub fn n_edges(&self) -> usize {
        self.adjacency.iter().map(Vec::len).sum::<usize>() / 2
    }
}

pub fn build_incidence_graph(pattern: &SparsityPattern) -> ColumnIncidenceGraph {
    let mut adjacency = vec![Vec::new(); pattern.n_cols()];
    for row in pattern.rows() {
        for (k, &a) in row.iter().enumerate() {
            for &b in &row[k + 1..] {
                adjacency[a - 1].push(b);
                adjacency[b - 1].push(a);
            }
        }
    }
    for nbrs in &mut adjacency {
        nbrs.sort_unstable();
        nbrs.dedup();
    }
    ColumnIncidenceGraph { adjacency }
}

/// Color per column, colors numbered `1..=n_colors` with none skipped.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Coloring {
    colors: Vec<usize>,
    n_colors: usize,
}

impl Coloring {
    /// Validates that colors are `>= 1` and every color up to the maximum is used.
    pub fn new(colors: Vec<usize>) -> Result<Self> {
        let n_colors = colors.iter().copied().max().unwrap_or(0);
        let mut used = vec![false; n_colors];
        for &c in &colors {
            if c == 0 {
                return Err(Error::InvalidIndex);
            }
            used[c - 1] = true;
        }
        if used.iter().any(|u| !u) {
            return Err(Error::InvalidDimension("coloring skips a color"));
        }
        Ok(Coloring { colors, n_colors })
    }

    pub fn n_colors(&self) -> usize {
        self.n_colors
    }

    pub fn n_columns(&self) -> usize {
        self.colors.len()
    }

    pub fn color(&self, j: usize) -> usize {
        self.colors[j - 1]
    }

    pub fn colors(&self) -> &[usize] {
        &self.colors
    }

    /// Columns of each color class, in increasing order.
    pub fn classes(&self) -> Vec<Vec<usize>> {
        let mut classes = vec![Vec::new(); self.n_colors];
        for (k, &c) in self.colors.iter().enumerate() {
            classes[c - 1].push(k + 1);
        }
        classes
    }

    /// Fails with the first edge whose endpoints share a color.
    pub fn check_proper(&self, graph: &ColumnIncidenceGraph) -> Result<()> {
        if graph.n_columns() != self.colors.len() {
            return Err(Error::DimensionMismatch {
                what: "coloring columns",
                expected: graph.n_columns(),
                got: self.colors.len(),
            });
        }
        for j in 1..=graph.n_columns() {
            for &k in graph.neighbors(j) {
                if k > j && self.color(j) == self.color(k) {
                    return Err(Error::ImproperColoring(j, k));
                }
            }
        }
        Ok(())
    }
}

/// First-fit greedy coloring in natural column order.
pub fn greedy_color(graph: &ColumnIncidenceGraph) -> Coloring {
    let n = graph.n_columns();
    let mut colors = vec![0usize; n];
    // forbidden[c] == j marks color c as taken by a neighbour of column j
    let mut forbidden = vec![0usize; n + 2];
    let mut n_colors = 0;
    for j in 1..=n {
        for &k in graph.neighbors(j) {
            let c = colors[k - 1];
            if c != 0 {
                forbidden[c] = j;
            }
        }
        let c = (1..)
            .find(|&c| forbidden[c] != j)
            .expect("a free color exists");
        colors[j - 1] = c;
        n_colors = n_colors.max(c);
    }
    Coloring { colors, n_colors }
}

/// The `n x n_colors` seed whose row `j` is `e_{color(j)}`.
pub fn build_cpr_seed(coloring: &Coloring, graph: &ColumnIncidenceGraph) -> Result<SeedMatrix> {
    coloring.check_proper(graph)?;
    let mut seed = Matrix::zeros(coloring.n_columns(), coloring.n_colors());
    for (k, &c) in coloring.colors().iter().enumerate() {
        seed[(k, c - 1)] = 1.0;
    }
    Ok(seed)
}

/// `B = F'(x) S` together with the coloring and pattern needed to expand it.
#[derive(Debug, Clone, PartialEq)]
pub struct CompressedJacobian {
    pub values: Matrix,
    pub seed: SeedMatrix,
    pub coloring: Coloring,
    pub pattern: SparsityPattern,
    pub graph: ColumnIncidenceGraph,
}

/// Compressed Jacobian for a caller-supplied pattern.
///
/// The pattern must contain the true support of `F'(x)`; entries outside it
/// are silently folded into other columns of the same color.
pub fn compressed_jacobian<F: VectorFunction>(
    f: &F,
    x: &[f64],
    pattern: &SparsityPattern,
) -> Result<CompressedJacobian> {
    if pattern.n_cols() != x.len() {
        return Err(Error::DimensionMismatch {
            what: "pattern columns",
            expected: x.len(),
            got: pattern.n_cols(),
        });
    }
    let graph = build_incidence_graph(pattern);
    let coloring = greedy_color(&graph);
    let seed = build_cpr_seed(&coloring, &graph)?;
    let (_, values) = forward_jacobian_product(f, x, &seed)?;
    if values.rows() != pattern.n_rows() {
        return Err(Error::DimensionMismatch {
            what: "pattern rows",
            expected: values.rows(),
            got: pattern.n_rows(),
        });
    }
    Ok(CompressedJacobian {
        values,
        seed,
        coloring,
        pattern: pattern.clone(),
        graph,
    })
}

/// Expands a compressed Jacobian into sparse rows: `J(i, j) = B(i, color(j))`.
pub fn reconstruct(cj: &CompressedJacobian) -> Result<Vec<SparseDerivative>> {
    let mut owner = vec![0usize; cj.coloring.n_colors()];
    cj.pattern
        .rows()
        .iter()
        .enumerate()
        .map(|(i, row)| {
            owner.iter_mut().for_each(|o| *o = 0);
            let mut pairs = Vec::with_capacity(row.len());
            for &j in row {
                let c = cj.coloring.color(j);
                if owner[c - 1] != 0 {
                    return Err(Error::AmbiguousEntry {
                        row: i + 1,
                        first: owner[c - 1],
                        second: j,
                    });
                }
                owner[c - 1] = j;
                pairs.push((j, cj.values[(i, c - 1)]));
            }
            SparseDerivative::from_pairs(pairs)
        })
        .collect()
}

/// Densifies sparse rows into an `m x n` matrix.
pub fn densify(rows: &[SparseDerivative], n: usize) -> Matrix {
    let mut m = Matrix::zeros(rows.len(), n);
    for (i, r) in rows.iter().enumerate() {
        for &(j, v) in r.pairs() {
            m[(i, j - 1)] = v;
        }
    }
    m
}

/// Detects the pattern by bit propagation, then compresses and expands.
pub fn cpr_jacobian<F: VectorFunction>(
    f: &F,
    x: &[f64],
) -> Result<(CompressedJacobian, Vec<SparseDerivative>)> {
    let pattern = pattern_jacobian(f, x, x.len())?;
    let cj = compressed_jacobian(f, x, &pattern)?;
    let rows = reconstruct(&cj)?;
    Ok((cj, rows))
}
