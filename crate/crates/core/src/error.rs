use std::path::PathBuf;

use thiserror::Error;

/// Errors produced anywhere in the pipeline.
#[derive(Debug, Error)]
pub enum Error {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: missing column `{column}` (expected header flow_m3s,opening_pct,air_velocity_ms)")]
    MissingColumn { path: String, column: &'static str },

    #[error("{path}: row {row}: {message}")]
    BadRow {
        path: String,
        row: usize,
        message: String,
    },

    #[error("dataset is empty")]
    EmptyDataset,

    #[error("invalid sample: {field} = {value} violates {bound}")]
    InvalidSample {
        field: &'static str,
        value: f64,
        bound: &'static str,
    },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("column `{0}` has zero range; cannot normalize")]
    ZeroRange(&'static str),

    #[error("parameter vector has length {actual}, expected {expected}")]
    LengthMismatch { expected: usize, actual: usize },

    #[error("invalid membership function parameters: {0}")]
    InvalidMembership(String),

    #[error("fitness returned non-finite value {value} at position {position:?}")]
    NonFiniteFitness { value: f64, position: Vec<f64> },

    #[error("series is constant; correlation is undefined")]
    ConstantSeries,

    #[error("observed mean is zero; scatter index is undefined")]
    ZeroObservedMean,

    #[error("unknown dam preset `{0}` (known: safarood, balarood, sardasht, silve, talvar, kucheri)")]
    UnknownDam(String),

    #[error("config: {0}")]
    Config(String),

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
