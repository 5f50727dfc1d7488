//! The elementary operation set shared by every differentiation mode.

use crate::error::{Error, Result};

/// Kind of an elementary operation.
///
/// The discriminants double as the opcode byte of the tape file format.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[repr(u8)]
pub enum OpKind {
    Const = 0,
    Add = 1,
    Sub = 2,
    Mul = 3,
    Div = 4,
    Neg = 5,
    Exp = 6,
    Log = 7,
    Sin = 8,
    Cos = 9,
    Sqrt = 10,
    PowConst = 11,
    AddConst = 12,
    MulConst = 13,
}

impl OpKind {
    pub const ALL: [OpKind; 14] = [
        OpKind::Const,
        OpKind::Add,
        OpKind::Sub,
        OpKind::Mul,
        OpKind::Div,
        OpKind::Neg,
        OpKind::Exp,
        OpKind::Log,
        OpKind::Sin,
        OpKind::Cos,
        OpKind::Sqrt,
        OpKind::PowConst,
        OpKind::AddConst,
        OpKind::MulConst,
    ];

    pub fn arity(self) -> usize {
        match self {
            OpKind::Const => 0,
            OpKind::Add | OpKind::Sub | OpKind::Mul | OpKind::Div => 2,
            _ => 1,
        }
    }

    /// Whether the op reads its constant payload.
    pub fn has_constant(self) -> bool {
        matches!(
            self,
            OpKind::Const | OpKind::PowConst | OpKind::AddConst | OpKind::MulConst
        )
    }

    pub fn name(self) -> &'static str {
        match self {
            OpKind::Const => "const",
            OpKind::Add => "add",
            OpKind::Sub => "sub",
            OpKind::Mul => "mul",
            OpKind::Div => "div",
            OpKind::Neg => "neg",
            OpKind::Exp => "exp",
            OpKind::Log => "log",
            OpKind::Sin => "sin",
            OpKind::Cos => "cos",
            OpKind::Sqrt => "sqrt",
            OpKind::PowConst => "powc",
            OpKind::AddConst => "addc",
            OpKind::MulConst => "mulc",
        }
    }

    pub fn code(self) -> u8 {
        self as u8
    }

    pub fn from_code(code: u8) -> Option<OpKind> {
        OpKind::ALL.get(code as usize).copied()
    }
}

/// An elementary operation together with its constant payload.
///
/// The payload is ignored (and kept at `0.0`) for ops that do not use one.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ElementaryOp {
    pub kind: OpKind,
    pub constant: f64,
}

impl ElementaryOp {
    pub fn new(kind: OpKind) -> Self {
        ElementaryOp {
            kind,
            constant: 0.0,
        }
    }

    pub fn with_constant(kind: OpKind, constant: f64) -> Self {
        ElementaryOp { kind, constant }
    }

    pub fn arity(&self) -> usize {
        self.kind.arity()
    }
}

impl From<OpKind> for ElementaryOp {
    fn from(kind: OpKind) -> Self {
        ElementaryOp::new(kind)
    }
}

fn check_arity(op: &ElementaryOp, args: &[f64]) -> Result<()> {
    if args.len() != op.arity() {
        return Err(Error::Arity {
            op: op.kind.name(),
            expected: op.arity(),
            got: args.len(),
        });
    }
    Ok(())
}

fn domain(kind: OpKind, arg: f64) -> Error {
    Error::Domain {
        op: kind.name(),
        arg,
    }
}

fn is_integer(c: f64) -> bool {
    libm::trunc(c) == c
}

fn check_pow_value(base: f64, exponent: f64) -> Result<()> {
    if base < 0.0 && !is_integer(exponent) {
        return Err(domain(OpKind::PowConst, base));
    }
    if base == 0.0 && exponent < 0.0 {
        return Err(domain(OpKind::PowConst, base));
    }
    Ok(())
}

/// Evaluates `op` on plain reals.
pub fn apply_elementary(op: ElementaryOp, args: &[f64]) -> Result<f64> {
    check_arity(&op, args)?;
    let c = op.constant;
    let v = match op.kind {
        OpKind::Const => c,
        OpKind::Add => args[0] + args[1],
        OpKind::Sub => args[0] - args[1],
        OpKind::Mul => args[0] * args[1],
        OpKind::Div => {
            if args[1] == 0.0 {
                return Err(Error::DivisionByZero);
            }
            args[0] / args[1]
        }
        OpKind::Neg => -args[0],
        OpKind::Exp => libm::exp(args[0]),
        OpKind::Log => {
            if !(args[0] > 0.0) {
                return Err(domain(op.kind, args[0]));
            }
            libm::log(args[0])
        }
        OpKind::Sin => libm::sin(args[0]),
        OpKind::Cos => libm::cos(args[0]),
        OpKind::Sqrt => {
            if !(args[0] >= 0.0) {
                return Err(domain(op.kind, args[0]));
            }
            libm::sqrt(args[0])
        }
        OpKind::PowConst => {
            check_pow_value(args[0], c)?;
            libm::pow(args[0], c)
        }
        OpKind::AddConst => args[0] + c,
        OpKind::MulConst => args[0] * c,
    };
    Ok(v)
}

/// Partial derivative of `op` with respect to `args[arg_index]`.
///
/// Points where the derivative is unbounded (sqrt at 0, log at 0,
/// fractional powers at 0) are domain errors.
pub fn local_partial(op: ElementaryOp, args: &[f64], arg_index: usize) -> Result<f64> {
    check_arity(&op, args)?;
    if arg_index >= op.arity() {
        return Err(Error::ArgIndex {
            op: op.kind.name(),
            index: arg_index,
        });
    }
    let c = op.constant;
    let d = match op.kind {
        OpKind::Const => unreachable!("const has no arguments"),
        OpKind::Add => 1.0,
        OpKind::Sub => {
            if arg_index == 0 {
                1.0
            } else {
                -1.0
            }
        }
        OpKind::Mul => args[1 - arg_index],
        OpKind::Div => {
            let den = args[1];
            if den == 0.0 {
                return Err(Error::DivisionByZero);
            }
            if arg_index == 0 {
                1.0 / den
            } else {
                -args[0] / (den * den)
            }
        }
        OpKind::Neg => -1.0,
        OpKind::Exp => libm::exp(args[0]),
        OpKind::Log => {
            if !(args[0] > 0.0) {
                return Err(domain(op.kind, args[0]));
            }
            1.0 / args[0]
        }
        OpKind::Sin => libm::cos(args[0]),
        OpKind::Cos => -libm::sin(args[0]),
        OpKind::Sqrt => {
            if !(args[0] > 0.0) {
                return Err(domain(op.kind, args[0]));
            }
            0.5 / libm::sqrt(args[0])
        }
        OpKind::PowConst => {
            let x = args[0];
            check_pow_value(x, c)?;
            if c == 0.0 {
                0.0
            } else if x == 0.0 && c < 1.0 {
                return Err(domain(op.kind, x));
            } else {
                c * libm::pow(x, c - 1.0)
            }
        }
        OpKind::AddConst => 1.0,
        OpKind::MulConst => c,
    };
    Ok(d)
}
