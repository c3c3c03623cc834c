use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ParseError {
    #[error("empty grid text")]
    Empty,
    #[error("line {line}: expected {expected} cells, found {found}")]
    Shape {
        line: usize,
        expected: usize,
        found: usize,
    },
    #[error("line {line}, column {column}: illegal cell character {found:?}")]
    Character {
        line: usize,
        column: usize,
        found: char,
    },
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("grid size mismatch: {0} vs {1}")]
    SizeMismatch(usize, usize),
    #[error("vehicle count changed at step {step}: ({lr_before}, {tb_before}) -> ({lr_after}, {tb_after})")]
    Conservation {
        step: u64,
        lr_before: usize,
        tb_before: usize,
        lr_after: usize,
        tb_after: usize,
    },
    #[error("bounded draw requires a positive range")]
    EmptyRange,
    #[error("mobility history is empty")]
    EmptyHistory,
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
