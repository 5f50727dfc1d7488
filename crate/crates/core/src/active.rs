//! The active-scalar contract and the generic vector-function interface.

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::op::{apply_elementary, ElementaryOp, OpKind};

/// A scalar that every differentiation mode can run a function body over.
///
/// Implementors compute the primal value with [`apply_elementary`], so the
/// value of any expression is bit-identical across modes for the same
/// operation order.
pub trait Active: Clone {
    fn value(&self) -> f64;

    /// A passive constant in the same evaluation context as `self`.
    fn constant(&self, c: f64) -> Result<Self>;

    fn unary(&self, op: ElementaryOp) -> Result<Self>;

    fn binary(&self, op: ElementaryOp, rhs: &Self) -> Result<Self>;

    fn add(&self, rhs: &Self) -> Result<Self> {
        self.binary(OpKind::Add.into(), rhs)
    }

    fn sub(&self, rhs: &Self) -> Result<Self> {
        self.binary(OpKind::Sub.into(), rhs)
    }

    fn mul(&self, rhs: &Self) -> Result<Self> {
        self.binary(OpKind::Mul.into(), rhs)
    }

    fn div(&self, rhs: &Self) -> Result<Self> {
        self.binary(OpKind::Div.into(), rhs)
    }

    fn neg(&self) -> Result<Self> {
        self.unary(OpKind::Neg.into())
    }

    fn exp(&self) -> Result<Self> {
        self.unary(OpKind::Exp.into())
    }

    fn ln(&self) -> Result<Self> {
        self.unary(OpKind::Log.into())
    }

    fn sin(&self) -> Result<Self> {
        self.unary(OpKind::Sin.into())
    }

    fn cos(&self) -> Result<Self> {
        self.unary(OpKind::Cos.into())
    }

    fn sqrt(&self) -> Result<Self> {
        self.unary(OpKind::Sqrt.into())
    }

    fn powc(&self, c: f64) -> Result<Self> {
        self.unary(ElementaryOp::with_constant(OpKind::PowConst, c))
    }

    fn add_const(&self, c: f64) -> Result<Self> {
        self.unary(ElementaryOp::with_constant(OpKind::AddConst, c))
    }

    fn mul_const(&self, c: f64) -> Result<Self> {
        self.unary(ElementaryOp::with_constant(OpKind::MulConst, c))
    }
}

impl Active for f64 {
    fn value(&self) -> f64 {
        *self
    }

    fn constant(&self, c: f64) -> Result<Self> {
        Ok(c)
    }

    fn unary(&self, op: ElementaryOp) -> Result<Self> {
        apply_elementary(op, &[*self])
    }

    fn binary(&self, op: ElementaryOp, rhs: &Self) -> Result<Self> {
        apply_elementary(op, &[*self, *rhs])
    }
}

/// A function `F: R^n -> R^m` written once against [`Active`].
///
/// The body may only read its arguments and passive constants, and its
/// control flow must not depend on argument values if it is going to be taped.
pub trait VectorFunction {
    fn n_independents(&self) -> usize;

    fn m_dependents(&self) -> usize;

    fn eval<S: Active>(&self, x: &[S]) -> Result<Vec<S>>;
}

pub(crate) fn check_input_len<F: VectorFunction>(f: &F, got: usize) -> Result<()> {
    if got != f.n_independents() {
        return Err(Error::DimensionMismatch {
            what: "independents",
            expected: f.n_independents(),
            got,
        });
    }
    Ok(())
}

/// Runs `f.eval` and checks the argument and result lengths.
pub fn eval_checked<F: VectorFunction, S: Active>(f: &F, x: &[S]) -> Result<Vec<S>> {
    check_input_len(f, x.len())?;
    let y = f.eval(x)?;
    if y.len() != f.m_dependents() {
        return Err(Error::DimensionMismatch {
            what: "dependents",
            expected: f.m_dependents(),
            got: y.len(),
        });
    }
    Ok(y)
}

/// Plain evaluation of `f` at `x`.
pub fn evaluate<F: VectorFunction>(f: &F, x: &[f64]) -> Result<Vec<f64>> {
    eval_checked(f, x)
}
