use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("decorrelation factor {0} outside (0.1, 10]")]
    GammaOutOfRange(f64),

    #[error("zero slope difference: interference duration is unbounded")]
    ZeroSlopeDifference,

    #[error("probability {0} outside [0, 1]")]
    InvalidProbability(f64),

    #[error("target {index} at {range_m:.3} m violates the unambiguous range bound (f_r = {range_freq:.4})")]
    InfeasibleGeometry { index: usize, range_m: f64, range_freq: f64 },

    #[error("target aliases: normalized range frequency {range_freq:.4} outside [0, 1)")]
    AliasedTarget { range_freq: f64 },

    #[error("dimension mismatch: expected {expected:?}, got {got:?}")]
    DimensionMismatch { expected: (usize, usize), got: (usize, usize) },

    #[error("signal of length {len} shorter than window length {window}")]
    SignalTooShort { len: usize, window: usize },

    #[error("time-frequency matrix has inconsistent dimensions: {0}")]
    InconsistentDimensions(String),

    #[error("detector input is empty")]
    EmptyInput,

    #[error("noise estimate degenerate: {target_bins} of {total_bins} bins are target bins")]
    DegenerateNoiseEstimate { target_bins: usize, total_bins: usize },

    #[error("detectable target set is empty")]
    EmptyDetectableSet,

    #[error("target bin set is empty")]
    EmptyBinSet,

    #[error("trial failed at p = {p}, trial {trial_index} (seed {seed:#018x}): {source}")]
    Trial {
        p: f64,
        trial_index: u64,
        seed: u64,
        #[source]
        source: Box<Error>,
    },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: {message}")]
    Parse { path: PathBuf, message: String },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io { path: path.into(), source }
    }
}
