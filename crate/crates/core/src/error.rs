// SPDX-License-Identifier: Apache-2.0

use thiserror::Error;

/// Errors raised anywhere in the simulator.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension limit exceeded: {requested} > {limit}")]
    DimensionLimit { requested: usize, limit: usize },

    #[error("cutoff too small to represent coupling")]
    CutoffTooSmall,

    #[error("unknown site: {0}")]
    UnknownSite(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("Hilbert space mismatch")]
    SpaceMismatch,

    #[error("numerical corruption: {0}")]
    NumericalCorruption(String),

    #[error("degenerate detunings: delta1 == delta_cap")]
    DegenerateDetunings,

    #[error("matching condition has no real solution (delta1 - delta_cap = {0} <= 0)")]
    NoMatchingSolution(f64),

    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("at least 2 qutrits required, got {0}")]
    TooFewQutrits(usize),

    #[error("bitstring has length {got}, expected {expected}")]
    WrongLength { expected: usize, got: usize },

    #[error("invalid bitstring: {0}")]
    InvalidBitstring(String),

    #[error("input not encodable: weight {0:.3e} outside the encoded subspace")]
    NotEncodable(f64),

    #[error("integrator step limit exceeded ({0} steps)")]
    StepLimit(usize),

    #[error("integrator accuracy failure: {0}")]
    IntegratorAccuracy(String),

    #[error("config error: {0}")]
    Config(String),

    #[error("io error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl Error {
    /// True for failures of the numerics rather than of the inputs.
    pub fn is_numerical(&self) -> bool {
        matches!(self, Error::NumericalCorruption(_) | Error::StepLimit(_) | Error::IntegratorAccuracy(_))
    }
}

pub type Result<T> = std::result::Result<T, Error>;
