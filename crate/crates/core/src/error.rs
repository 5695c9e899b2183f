use std::path::PathBuf;

use thiserror::Error;

/// Errors produced by this crate.
#[derive(Debug, Error)]
pub enum Error {
    #[error("{path}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("unsupported image format: {0}")]
    Format(String),

    #[error("dimension mismatch: expected {expected} values, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("spectral argument {0} outside [0, 2]")]
    LambdaOutOfRange(f64),

    #[error("block has {n} nodes, over the dense-spectrum cap of {cap}")]
    BlockTooLarge { n: usize, cap: usize },

    #[error("kernel spec: {0}")]
    KernelSpec(String),

    #[error("strategy mismatch: {0}")]
    StrategyMismatch(String),

    #[error("signal has zero energy")]
    ZeroSignal,

    #[error("numerical failure: {0}")]
    Numerical(String),
}

pub type Result<T> = std::result::Result<T, Error>;
