use std::path::PathBuf;

use thiserror::Error;

/// Errors raised anywhere in the crate.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("dimension mismatch: expected {expected} layers, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    /// Total event rate is zero; the configuration can never change again.
    #[error("absorbing state: total event rate is zero")]
    Absorbing,

    #[error("time step {dt} exceeds the explicit stability bound {bound}")]
    StabilityBound { dt: f64, bound: f64 },

    #[error("S = {s} exceeds the exact-chain capacity (S <= {cap}, at most 3^{} states)", cap + 2)]
    Capacity { s: usize, cap: usize },

    #[error("invalid distribution: {0}")]
    InvalidDistribution(String),

    #[error("sector with {holes} holes is reducible: {classes} closed classes, stationary law not unique")]
    ReducibleSector { holes: usize, classes: usize },

    #[error("singular system: {0}")]
    Singular(String),

    #[error("argument out of domain: {0}")]
    Domain(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
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
