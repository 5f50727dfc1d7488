//! Finite-difference Jacobians for checking the AD modes.
//!
//! Only plain `f64` evaluations are used here, never a derivative-carrying scalar.

use alloc::vec::Vec;

use crate::active::{evaluate, VectorFunction};
use crate::error::{Error, Result};
use crate::matrix::Matrix;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FdScheme {
    Forward,
    Central,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FdConfig {
    pub scheme: FdScheme,
    pub base_step: f64,
    /// Scale the step by `max(1, |x_j|)`.
    pub relative: bool,
}

impl Default for FdConfig {
    fn default() -> Self {
        FdConfig {
            scheme: FdScheme::Central,
            base_step: 1e-6,
            relative: true,
        }
    }
}

impl FdConfig {
    pub fn forward() -> Self {
        FdConfig {
            scheme: FdScheme::Forward,
            ..FdConfig::default()
        }
    }

    fn step(&self, xj: f64) -> f64 {
        if self.relative {
            self.base_step * libm::fabs(xj).max(1.0)
        } else {
            self.base_step
        }
    }
}

pub fn fd_jacobian<F: VectorFunction>(f: &F, x: &[f64], cfg: &FdConfig) -> Result<Matrix> {
    if !(cfg.base_step > 0.0) {
        return Err(Error::InvalidDimension(
            "finite-difference step must be positive",
        ));
    }
    let base = match cfg.scheme {
        FdScheme::Forward => Some(evaluate(f, x)?),
        FdScheme::Central => None,
    };
    let m = f.m_dependents();
    let mut jac = Matrix::zeros(m, x.len());
    let mut probe: Vec<f64> = x.to_vec();
    for j in 0..x.len() {
        let h = cfg.step(x[j]);
        probe[j] = x[j] + h;
        let hi = evaluate(f, &probe)?;
        let col: Vec<f64> = match &base {
            Some(y0) => hi.iter().zip(y0).map(|(a, b)| (a - b) / h).collect(),
            None => {
                probe[j] = x[j] - h;
                let lo = evaluate(f, &probe)?;
                hi.iter()
                    .zip(&lo)
                    .map(|(a, b)| (a - b) / (2.0 * h))
                    .collect()
            }
        };
        probe[j] = x[j];
        for (i, v) in col.into_iter().enumerate() {
            jac[(i, j)] = v;
        }
    }
    Ok(jac)
}
