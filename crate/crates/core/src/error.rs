use thiserror::Error;

/// Errors produced by the simulator.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// A potential value fell outside `[0, 1]` (or its derivative bounds).
    #[error("invalid potential at grid point {index} (x = {x}): {reason}")]
    InvalidPotential { index: usize, x: f64, reason: String },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("state is not normalized: norm = {norm}")]
    NotNormalized { norm: f64 },

    #[error("matrix is not unitary: max |U^dagger U - I| = {deviation:e}")]
    NotUnitary { deviation: f64 },

    #[error("power queries require a state in the target eigenbasis")]
    BasisMismatch,

    #[error("dimension limit exceeded: {requested} amplitudes > limit {limit}")]
    DimensionLimit { requested: usize, limit: usize },

    #[error("symbolic limit exceeded at step {step}: {entries} entries > limit {limit}")]
    SymbolicLimit { step: usize, entries: usize, limit: usize },

    #[error("{what} did not converge for index {index} after {iterations} iterations")]
    NonConvergence { what: &'static str, index: usize, iterations: usize },

    #[error("least-squares system is ill-conditioned (condition estimate {condition:e}); use a denser or wider sample grid")]
    Conditioning { condition: f64 },

    #[error("not a partition of {outcomes} outcomes: overlapping {overlaps:?}, missing {missing:?}")]
    InvalidPartition { outcomes: usize, overlaps: Vec<usize>, missing: Vec<usize> },

    #[error("phase {phi} outside [0, 1)")]
    PhaseOutOfRange { phi: f64 },

    #[error("eigensystem has no constant-potential phase factors")]
    MissingPhaseFactors,
}

impl Error {
    /// True for failures of the numerics themselves rather than of the inputs.
    pub fn is_numerical(&self) -> bool {
        matches!(self, Error::NonConvergence { .. } | Error::Conditioning { .. })
    }
}

pub type Result<T> = std::result::Result<T, Error>;
