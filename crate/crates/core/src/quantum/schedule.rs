use serde::Serialize;

use super::state::{StateVector, TargetBasis};
use super::unitary::UnitarySpec;
use super::RegisterLayout;
use crate::eigen::EigenSystem;
use crate::error::{Error, Result};
use crate::phase_estimation::OutcomeDecoder;

/// One power query `W_l^p` followed by the fixed unitary that comes after it.
#[derive(Debug, Clone, PartialEq)]
pub struct QueryStep {
    /// Control qubit, 1-based with qubit 1 the most significant bit.
    pub control_bit: usize,
    pub power: u64,
    pub then: UnitarySpec,
}

/// `U_T W_{l_T}^{p_T} ... U_1 W_{l_1}^{p_1} U_0 |psi_0>` together with the
/// classical map from control outcomes to eigenvalue estimates.
#[derive(Debug, Clone, PartialEq)]
pub struct AlgorithmSchedule {
    layout: RegisterLayout,
    initial_state: StateVector,
    initial_unitary: UnitarySpec,
    steps: Vec<QueryStep>,
    decoder: OutcomeDecoder,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct ScheduleCost {
    pub queries: usize,
    /// Sum of all powers: the query count if each `W^p` were paid as `p` plain queries.
    pub total_power: u64,
}

impl AlgorithmSchedule {
    pub fn new(
        initial_state: StateVector,
        initial_unitary: UnitarySpec,
        steps: Vec<QueryStep>,
        decoder: OutcomeDecoder,
    ) -> Result<Self> {
        let layout = initial_state.layout();
        if initial_state.basis() != TargetBasis::Eigen {
            return Err(Error::BasisMismatch);
        }
        initial_unitary.validate_for(&layout)?;
        for (j, step) in steps.iter().enumerate() {
            layout
                .control_bit_mask(step.control_bit)
                .map_err(|e| Error::InvalidArgument(format!("step {}: {e}", j + 1)))?;
            if step.power == 0 {
                return Err(Error::InvalidArgument(format!("step {}: power must be at least 1", j + 1)));
            }
            step.then.validate_for(&layout)?;
        }
        if decoder.len() != layout.control_dim() {
            return Err(Error::InvalidArgument(format!(
                "decoder covers {} outcomes, control register has {}",
                decoder.len(),
                layout.control_dim()
            )));
        }
        Ok(AlgorithmSchedule { layout, initial_state, initial_unitary, steps, decoder })
    }

    pub fn layout(&self) -> RegisterLayout {
        self.layout
    }

    pub fn initial_state(&self) -> &StateVector {
        &self.initial_state
    }

    pub fn initial_unitary(&self) -> &UnitarySpec {
        &self.initial_unitary
    }

    pub fn steps(&self) -> &[QueryStep] {
        &self.steps
    }

    /// Number of power queries `T`.
    pub fn query_count(&self) -> usize {
        self.steps.len()
    }

    /// `U_T`, the last unitary applied.
    pub fn final_unitary(&self) -> &UnitarySpec {
        self.steps.last().map_or(&self.initial_unitary, |s| &s.then)
    }

    /// Powers `p_1, ..., p_T` in application order.
    pub fn powers(&self) -> Vec<u64> {
        self.steps.iter().map(|s| s.power).collect()
    }

    pub fn decoder(&self) -> &OutcomeDecoder {
        &self.decoder
    }

    pub fn with_decoder(mut self, decoder: OutcomeDecoder) -> Result<Self> {
        if decoder.len() != self.layout.control_dim() {
            return Err(Error::InvalidArgument("decoder size does not match the control register".into()));
        }
        self.decoder = decoder;
        Ok(self)
    }

    pub fn cost(&self) -> ScheduleCost {
        ScheduleCost { queries: self.steps.len(), total_power: self.steps.iter().map(|s| s.power).sum() }
    }
}

/// Runs the schedule for the input whose query unitary has eigensystem `eig`.
pub fn run_schedule(schedule: &AlgorithmSchedule, eig: &EigenSystem) -> Result<StateVector> {
    if eig.n() != schedule.layout.target_dim() {
        return Err(Error::InvalidArgument(format!(
            "eigensystem has n = {}, schedule expects n = {}",
            eig.n(),
            schedule.layout.target_dim()
        )));
    }
    let mut state = schedule.initial_state.clone().apply_unitary(&schedule.initial_unitary)?;
    for step in &schedule.steps {
        state = state.apply_power_query(step.control_bit, step.power, eig)?.apply_unitary(&step.then)?;
    }
    Ok(state)
}
