use thiserror::Error;

use crate::solver::RunTrace;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid kernel spec: {0}")]
    InvalidKernel(String),

    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("padding of {pad} nodes needs more than the {n_points} available grid points")]
    PadTooLarge { pad: usize, n_points: usize },

    #[error("non-finite value at node {node}")]
    NonFinite { node: usize },

    #[error(
        "signal of length {len} is too short for {scales} wavelet scales (need at least {min})"
    )]
    SignalTooShort {
        len: usize,
        scales: usize,
        min: usize,
    },

    #[error("decomposition shape mismatch: {0}")]
    ShapeMismatch(String),

    #[error("invalid problem: {0}")]
    InvalidProblem(String),

    /// The solution left the admissible range. The trace holds everything
    /// recorded up to (and including) the offending step.
    #[error("solution blew up at t = {t} (node {node})")]
    BlowUp {
        t: f64,
        node: usize,
        trace: Box<RunTrace>,
    },

    #[error("degenerate calibration: reference run shows no high-pass measure growth")]
    DegenerateCalibration,

    #[error("exact series did not converge at Re = {reynolds}, t = {t}; the series is usable for Re <= 100 or so")]
    SeriesNonConvergence { reynolds: f64, t: f64 },

    #[error("config: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
