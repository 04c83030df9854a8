use thiserror::Error;

use crate::path::Violation;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid path: {}", format_violations(.0))]
    InvalidPath(Vec<Violation>),
    #[error("invalid time window [{lo}, {hi}]")]
    InvalidWindow { lo: f64, hi: f64 },
    #[error("refinement must be positive and finite, got {0}")]
    InvalidRefinement(f64),
    #[error("oracle input too large: {rows}x{cols} refined vertices exceeds {max} per side")]
    TooLarge { rows: usize, cols: usize, max: usize },
    #[error("ensemble is empty")]
    EmptyEnsemble,
    #[error("operation requires a connected path (domain is not an interval)")]
    RequiresConnected,
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("invalid model: {0}")]
    InvalidModel(String),
    #[error("config error: {0}")]
    Config(String),
    #[error("serialization error: {0}")]
    Serde(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

fn format_violations(v: &[Violation]) -> String {
    v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join("; ")
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Serde(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
