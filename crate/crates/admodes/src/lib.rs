//! File formats, renderers and the command-line harness around `admodes-core`.

pub mod cli;
mod error;
pub mod pattern_text;
pub mod render;
pub mod state;
pub mod tape_file;

pub use error::{AppError, Result};
