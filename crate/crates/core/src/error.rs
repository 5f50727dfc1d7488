use thiserror::Error;

pub type Result<T, E = Error> = core::result::Result<T, E>;

/// Errors raised by the differentiation engine.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("{op} is undefined at {arg}")]
    Domain { op: &'static str, arg: f64 },
    #[error("division by zero")]
    DivisionByZero,
    #[error("{op} expects {expected} argument(s), got {got}")]
    Arity {
        op: &'static str,
        expected: usize,
        got: usize,
    },
    #[error("argument index {index} out of range for {op}")]
    ArgIndex { op: &'static str, index: usize },
    #[error("invalid dimension: {0}")]
    InvalidDimension(&'static str),
    #[error("dimension mismatch: expected {expected}, got {got} ({what})")]
    DimensionMismatch {
        what: &'static str,
        expected: usize,
        got: usize,
    },
    #[error("index must be >= 1")]
    InvalidIndex,
    #[error("a trace session for tag {0} is already open")]
    SessionAlreadyOpen(u32),
    #[error("trace session is closed")]
    SessionClosed,
    #[error("scalar belongs to a different trace session")]
    ForeignScalar,
    #[error("trace has no {0}")]
    EmptyTrace(&'static str),
    #[error("no tape registered under tag {0}")]
    UnknownTag(u32),
    #[error("reverse sweep requested without a value-keeping forward sweep")]
    ReverseNotPrepared,
    #[error("function has {0} dependents; a gradient needs exactly one")]
    NotScalarValued(usize),
    #[error("invalid sparsity pattern: {0}")]
    InvalidPattern(&'static str),
    #[error("invalid tape: {0}")]
    InvalidTape(&'static str),
    #[error("coloring is not proper: columns {0} and {1} share color and a row")]
    ImproperColoring(usize, usize),
    #[error("row {row} has columns {first} and {second} in the same color class")]
    AmbiguousEntry {
        row: usize,
        first: usize,
        second: usize,
    },
}
