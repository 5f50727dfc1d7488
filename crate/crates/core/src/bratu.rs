//! Discretized thermal-explosion (Bratu-type) boundary value problem.
//!
//! The continuous problem is `x'' + s exp(x / (1 + t x)) = 0` on `(-1, 1)`
//! with `x(-1) = x(1) = 0`. On `dim` interior points with step
//! `h = 2 / (dim + 1)` the residual is
//!
//! ```text
//! F_i = x_{i-1} - 2 x_i + x_{i+1} + h^2 (f_{i-1} + 10 f_i + f_{i+1}) / 12,
//! f_i = s exp(x_i / (1 + t x_i)),
//! ```
//!
//! with `x_0 = x_{dim+1} = 0`, so the boundary sources are `f_0 = f_{dim+1} = s`.
//! The same residual is sometimes called the "explosion" or "expl" function.

use alloc::vec::Vec;

use crate::active::{Active, VectorFunction};
use crate::error::{Error, Result};
use crate::sparse::SparsityPattern;

/// State of the reference fixture (7 interior points, symmetric).
pub const FIXTURE_STATE: [f64; 7] = [1.72, 3.45, 4.16, 4.87, 4.16, 3.45, 1.72];
pub const FIXTURE_S: f64 = 1.3;
pub const FIXTURE_T: f64 = 0.245828;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BratuProblem {
    dim: usize,
    pub s: f64,
    pub t: f64,
}

impl BratuProblem {
    pub fn new(dim: usize, s: f64, t: f64) -> Result<Self> {
        if dim < 2 {
            return Err(Error::InvalidDimension("bratu needs dim >= 2"));
        }
        Ok(BratuProblem { dim, s, t })
    }

    /// The 7-point fixture with `s = 1.3`, `t = 0.245828`.
    pub fn fixture() -> Self {
        BratuProblem {
            dim: FIXTURE_STATE.len(),
            s: FIXTURE_S,
            t: FIXTURE_T,
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn h(&self) -> f64 {
        2.0 / (self.dim as f64 + 1.0)
    }

    /// `(x_1..x_dim, s, t)`, the argument when parameters are differentiated too.
    pub fn point_with_params(&self, x: &[f64]) -> Vec<f64> {
        let mut v = Vec::with_capacity(x.len() + 2);
        v.extend_from_slice(x);
        v.push(self.s);
        v.push(self.t);
        v
    }

    /// Residual over active state and parameters.
    pub fn residual<S: Active>(&self, x: &[S], s: &S, t: &S) -> Result<Vec<S>> {
        if x.len() != self.dim {
            return Err(Error::DimensionMismatch {
                what: "bratu state",
                expected: self.dim,
                got: x.len(),
            });
        }
        let n = self.dim;
        let weight = self.h() * self.h() / 12.0;
        let f = x
            .iter()
            .map(|xi| local_source(xi, s, t))
            .collect::<Result<Vec<_>>>()?;
        let mut out = Vec::with_capacity(n);
        for i in 0..n {
            let mut lin = x[i].mul_const(-2.0)?;
            if i > 0 {
                lin = x[i - 1].add(&lin)?;
            }
            if i + 1 < n {
                lin = lin.add(&x[i + 1])?;
            }
            let left = if i > 0 { &f[i - 1] } else { s };
            let right = if i + 1 < n { &f[i + 1] } else { s };
            let src = left
                .add(&f[i].mul_const(10.0)?)?
                .add(right)?
                .mul_const(weight)?;
            out.push(lin.add(&src)?);
        }
        Ok(out)
    }

    /// Residual with `s` and `t` as passive constants.
    pub fn residual_passive<S: Active>(&self, x: &[S]) -> Result<Vec<S>> {
        let first = x.first().ok_or(Error::InvalidDimension("empty state"))?;
        let s = first.constant(self.s)?;
        let t = first.constant(self.t)?;
        self.residual(x, &s, &t)
    }

    /// Structural support of the Jacobian: tridiagonal in the state block,
    /// plus two dense parameter columns when `with_params`.
    pub fn jacobian_support(&self, with_params: bool) -> SparsityPattern {
        let n = self.dim;
        let rows = (1..=n)
            .map(|i| {
                let mut r: Vec<usize> = (i.saturating_sub(1).max(1)..=(i + 1).min(n)).collect();
                if with_params {
                    r.push(n + 1);
                    r.push(n + 2);
                }
                r
            })
            .collect();
        let width = if with_params { n + 2 } else { n };
        SparsityPattern::new(width, rows).expect("band rows are sorted and in range")
    }

    pub fn function(&self, with_params: bool) -> BratuResidual {
        BratuResidual {
            problem: *self,
            with_params,
        }
    }
}

/// `f_i = s exp(x_i / (1 + t x_i))`.
pub fn local_source<S: Active>(x: &S, s: &S, t: &S) -> Result<S> {
    let den = t.mul(x)?.add_const(1.0)?;
    s.mul(&x.div(&den)?.exp()?)
}

/// The residual as a [`VectorFunction`].
///
/// With `with_params` the arguments are `(x_1..x_dim, s, t)`; otherwise just
/// the state, with the problem's `s` and `t` held passive.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BratuResidual {
    pub problem: BratuProblem,
    pub with_params: bool,
}

impl VectorFunction for BratuResidual {
    fn n_independents(&self) -> usize {
        self.problem.dim + if self.with_params { 2 } else { 0 }
    }

    fn m_dependents(&self) -> usize {
        self.problem.dim
    }

    fn eval<S: Active>(&self, x: &[S]) -> Result<Vec<S>> {
        let n = self.problem.dim;
        if self.with_params {
            if x.len() != n + 2 {
                return Err(Error::DimensionMismatch {
                    what: "bratu arguments",
                    expected: n + 2,
                    got: x.len(),
                });
            }
            self.problem.residual(&x[..n], &x[n], &x[n + 1])
        } else {
            self.problem.residual_passive(x)
        }
    }
}
