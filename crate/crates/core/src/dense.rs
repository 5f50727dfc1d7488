//! Dense forward vector mode.
//!
//! Each active scalar carries a gradient vector of length `p`. Seeding the
//! independents with the rows of a seed matrix `S` (n x p) and running the
//! function body yields `Y = F'(x) S`.

use alloc::vec;
use alloc::vec::Vec;

use crate::active::{check_input_len, eval_checked, Active, VectorFunction};
use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::op::{apply_elementary, local_partial, ElementaryOp};

/// Seed matrices are `n x p`: one row per independent, one column per direction.
pub type SeedMatrix = Matrix;

pub const DEFAULT_MAX_DIRECTIONS: usize = 1 << 16;

/// A value with a dense vector of directional derivatives.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseDual {
    pub value: f64,
    pub grad: Vec<f64>,
}

impl DenseDual {
    pub fn new(value: f64, grad: Vec<f64>) -> Self {
        DenseDual { value, grad }
    }

    pub fn passive(value: f64, p: usize) -> Self {
        DenseDual {
            value,
            grad: vec![0.0; p],
        }
    }

    pub fn directions(&self) -> usize {
        self.grad.len()
    }
}

impl Active for DenseDual {
    fn value(&self) -> f64 {
        self.value
    }

    fn constant(&self, c: f64) -> Result<Self> {
        Ok(DenseDual::passive(c, self.grad.len()))
    }

    fn unary(&self, op: ElementaryOp) -> Result<Self> {
        let args = [self.value];
        let value = apply_elementary(op, &args)?;
        let d = local_partial(op, &args, 0)?;
        Ok(DenseDual {
            value,
            grad: self.grad.iter().map(|g| d * g).collect(),
        })
    }

    fn binary(&self, op: ElementaryOp, rhs: &Self) -> Result<Self> {
        if self.grad.len() != rhs.grad.len() {
            return Err(Error::DimensionMismatch {
                what: "gradient length",
                expected: self.grad.len(),
                got: rhs.grad.len(),
            });
        }
        let args = [self.value, rhs.value];
        let value = apply_elementary(op, &args)?;
        let da = local_partial(op, &args, 0)?;
        let db = local_partial(op, &args, 1)?;
        let grad = self
            .grad
            .iter()
            .zip(&rhs.grad)
            .map(|(a, b)| da * a + db * b)
            .collect();
        Ok(DenseDual { value, grad })
    }
}

/// The `n x n` identity seed.
pub fn seed_identity(n: usize) -> Result<SeedMatrix> {
    if n == 0 {
        return Err(Error::InvalidDimension("identity seed needs n >= 1"));
    }
    Ok(Matrix::identity(n))
}

/// Forward vector mode with a bound on the number of directions.
#[derive(Debug, Clone, Copy)]
pub struct DenseForward {
    pub max_directions: usize,
}

impl Default for DenseForward {
    fn default() -> Self {
        DenseForward {
            max_directions: DEFAULT_MAX_DIRECTIONS,
        }
    }
}

impl DenseForward {
    /// Returns `(F(x), F'(x) * seed)`.
    pub fn jacobian_product<F: VectorFunction>(
        &self,
        f: &F,
        x: &[f64],
        seed: &SeedMatrix,
    ) -> Result<(Vec<f64>, Matrix)> {
        check_input_len(f, x.len())?;
        if seed.rows() != x.len() {
            return Err(Error::DimensionMismatch {
                what: "seed rows",
                expected: x.len(),
                got: seed.rows(),
            });
        }
        let p = seed.cols();
        if p == 0 {
            return Err(Error::InvalidDimension("seed needs at least one column"));
        }
        if p > self.max_directions {
            return Err(Error::InvalidDimension(
                "seed has more columns than the configured maximum",
            ));
        }
        let inputs: Vec<DenseDual> = x
            .iter()
            .enumerate()
            .map(|(j, &v)| DenseDual::new(v, seed.row(j).to_vec()))
            .collect();
        let out = eval_checked(f, &inputs)?;
        let mut jac = Matrix::zeros(out.len(), p);
        let mut y = Vec::with_capacity(out.len());
        for (i, d) in out.into_iter().enumerate() {
            y.push(d.value);
            jac.row_mut(i).copy_from_slice(&d.grad);
        }
        Ok((y, jac))
    }
}

/// `(F(x), F'(x) * seed)` with the default direction limit.
pub fn forward_jacobian_product<F: VectorFunction>(
    f: &F,
    x: &[f64],
    seed: &SeedMatrix,
) -> Result<(Vec<f64>, Matrix)> {
    DenseForward::default().jacobian_product(f, x, seed)
}

/// Full Jacobian through the identity seed.
pub fn dense_jacobian<F: VectorFunction>(f: &F, x: &[f64]) -> Result<Matrix> {
    let seed = seed_identity(x.len())?;
    forward_jacobian_product(f, x, &seed).map(|(_, j)| j)
}
