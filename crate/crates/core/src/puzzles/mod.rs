//! ILP models of the lab projects and decoders back into each puzzle's own
//! vocabulary.

use thiserror::Error;

use crate::bnb::SolveError;
use crate::ilp::ModelError;

pub mod knapsack;
pub mod knight;
pub mod path;
pub mod queens;
pub mod sudoku;
pub mod tiling;
pub mod tsp;

#[derive(Debug, Error)]
pub enum PuzzleError {
    #[error("invalid instance size {0}")]
    InvalidSize(usize),
    #[error("invalid instance: {0}")]
    InvalidInstance(String),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Solve(#[from] SolveError),
}

pub(crate) fn invalid(msg: impl Into<String>) -> PuzzleError {
    PuzzleError::InvalidInstance(msg.into())
}

/// Non-empty lines with `#` comments removed.
pub(crate) fn content_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines()
        .enumerate()
        .map(|(k, l)| (k + 1, l.split('#').next().unwrap_or("").trim()))
        .filter(|(_, l)| !l.is_empty())
}

pub(crate) fn parse_num<T: std::str::FromStr>(token: &str, line: usize) -> Result<T, PuzzleError> {
    token.parse().map_err(|_| invalid(format!("line {line}: cannot parse `{token}`")))
}
