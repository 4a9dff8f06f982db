//! State-vector simulation over a `c`-qubit control register tensored with
//! the `n`-dimensional target space.
//!
//! States are held in the eigenbasis of the discretized operator, where a
//! power query is diagonal. Control index `k` uses qubit 1 as its most
//! significant bit, so reading `k / 2^c` gives the binary fraction
//! `k_1 / 2 + k_2 / 4 + ...`.

mod measure;
mod schedule;
mod state;
mod unitary;

use serde::{Deserialize, Serialize};

pub use measure::{measurement_distribution, sample_outcomes, MeasurementDistribution, MeasurementScope};
pub use schedule::{run_schedule, AlgorithmSchedule, QueryStep, ScheduleCost};
pub use state::{init_state, StateDump, StateVector, TargetBasis};
pub use unitary::{unitarity_deviation, UnitarySpec, FULL_DENSE_LIMIT, UNITARITY_TOLERANCE};

use crate::error::{Error, Result};

/// Default cap on the number of amplitudes `2^c * n`.
pub const DEFAULT_AMPLITUDE_LIMIT: usize = 1 << 24;

/// Norm tolerance for states handed in by callers.
pub const INPUT_NORM_TOLERANCE: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct RegisterLayout {
    control_qubits: usize,
    target_dim: usize,
}

impl RegisterLayout {
    pub fn new(control_qubits: usize, target_dim: usize) -> Result<Self> {
        Self::with_limit(control_qubits, target_dim, DEFAULT_AMPLITUDE_LIMIT)
    }

    pub fn with_limit(control_qubits: usize, target_dim: usize, limit: usize) -> Result<Self> {
        if target_dim == 0 {
            return Err(Error::InvalidArgument("target dimension must be positive".into()));
        }
        let requested = 1usize
            .checked_shl(control_qubits as u32)
            .filter(|_| control_qubits < usize::BITS as usize - 1)
            .and_then(|d| d.checked_mul(target_dim))
            .unwrap_or(usize::MAX);
        if requested > limit {
            return Err(Error::DimensionLimit { requested, limit });
        }
        Ok(RegisterLayout { control_qubits, target_dim })
    }

    pub fn control_qubits(&self) -> usize {
        self.control_qubits
    }

    pub fn target_dim(&self) -> usize {
        self.target_dim
    }

    pub fn control_dim(&self) -> usize {
        1 << self.control_qubits
    }

    pub fn total_dim(&self) -> usize {
        self.control_dim() * self.target_dim
    }

    /// Bit mask of control qubit `l` (1-based, MSB first) within `k`.
    pub fn control_bit_mask(&self, l: usize) -> Result<usize> {
        if l == 0 || l > self.control_qubits {
            return Err(Error::InvalidArgument(format!(
                "control bit {l} outside 1..={}",
                self.control_qubits
            )));
        }
        Ok(1 << (self.control_qubits - l))
    }
}
