//! Whitespace-separated state vectors, one value per line.

use std::path::Path;

use crate::error::{AppError, Result};

pub fn parse_state(text: &str) -> Result<Vec<f64>> {
    text.split_whitespace()
        .map(|tok| {
            tok.parse::<f64>()
                .map_err(|_| AppError::format(format!("not a number: {tok:?}")))
        })
        .collect()
}

pub fn load_state(path: &Path) -> Result<Vec<f64>> {
    parse_state(&std::fs::read_to_string(path)?)
}
