//! Multi-mode automatic differentiation without the standard library.
//!
//! Every differentiation mode in this crate runs the same function body, written
//! once against the [`Active`] scalar contract:
//!
//! - [`f64`] evaluates the plain function,
//! - [`dense::DenseDual`] carries a dense directional-derivative vector (forward vector mode),
//! - [`sparse::SparseDual`] carries sorted `(index, value)` pairs (sparse forward mode),
//! - [`sparse::BitDual`] carries only the dependency pattern,
//! - [`tape::TracingScalar`] records an operation trace that can be replayed
//!   forward and reverse.
//!
//! [`compression`] implements Curtis-Powell-Reid column compression on top of
//! dense forward mode, [`bratu`] provides the discretized thermal-explosion
//! residual used as the reference problem, and [`fd`] is an independent
//! finite-difference oracle.
//!
//! The crate needs `alloc` only.

#![no_std]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod active;
pub mod bratu;
pub mod compression;
pub mod dense;
mod error;
pub mod fd;
pub mod matrix;
pub mod op;
pub mod sparse;
pub mod tape;

pub use active::{Active, VectorFunction};
pub use error::{Error, Result};
pub use matrix::Matrix;
pub use op::{apply_elementary, local_partial, ElementaryOp, OpKind};
