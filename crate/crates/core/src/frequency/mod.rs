//! Frequency structure of power-query algorithms with constant potential.

mod beta;
mod fit;
mod sets;
mod symbolic;

pub use beta::{beta_coefficients, beta_coefficients_in, validate_partition, BetaCoefficients, OutcomeSpace};
pub use fit::{fit_trig_poly, period_grid, TrigFit, DEFAULT_FIT_POINTS, MAX_CONDITION};
pub use sets::{difference_set, frequency_sets, FrequencySet, FREQUENCY_SET_LIMIT};
pub use symbolic::{
    coefficient_matrix, evaluate_symbolic, symbolic_run, symbolic_run_with_limit, TrigCoefficients,
    DEFAULT_SYMBOLIC_LIMIT, PRUNE_THRESHOLD,
};

pub(crate) use beta::block_beta;
