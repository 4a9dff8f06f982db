//! Phase estimation with power queries: Hadamard layer, controlled powers
//! `2^{T-l}` on control qubit `l`, inverse QFT, then the classical decoding
//! `lambda = 4 pi phi` of the measured binary fraction `phi`.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_xoshiro::SplitMix64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::eigen::{constant_eigensystem, solve_eigensystem, EigenSystem, DEFAULT_TOLERANCE};
use crate::error::{Error, Result};
use crate::potential::PotentialSpec;
use crate::quantum::{
    init_state, measurement_distribution, run_schedule, AlgorithmSchedule, MeasurementDistribution, MeasurementScope,
    QueryStep, RegisterLayout, TargetBasis, UnitarySpec, DEFAULT_AMPLITUDE_LIMIT,
};
use crate::discretization::build_matrix;

/// Success probability the algorithm must reach.
pub const SUCCESS_THRESHOLD: f64 = 0.75;

/// Smallest squared ground-state overlap accepted for perturbed inputs.
pub const MIN_OVERLAP_SQ: f64 = 0.8;

/// Map from control outcomes `k` to eigenvalue estimates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OutcomeDecoder {
    lambdas: Vec<f64>,
}

impl OutcomeDecoder {
    /// `k -> 4 pi k / 2^t`.
    pub fn binary_phase(t: usize) -> Self {
        let size = 1usize << t;
        OutcomeDecoder { lambdas: (0..size).map(|k| decode_eigenvalue_unchecked(k as f64 / size as f64)).collect() }
    }

    pub fn from_lambdas(lambdas: Vec<f64>) -> Result<Self> {
        if lambdas.is_empty() || !lambdas.len().is_power_of_two() {
            return Err(Error::InvalidArgument(format!("decoder needs 2^c entries, got {}", lambdas.len())));
        }
        Ok(OutcomeDecoder { lambdas })
    }

    /// The binary-phase decoder with its table randomly permuted.
    pub fn shuffled(t: usize, seed: u64) -> Self {
        let mut d = Self::binary_phase(t);
        d.lambdas.shuffle(&mut SplitMix64::seed_from_u64(seed));
        d
    }

    pub fn len(&self) -> usize {
        self.lambdas.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lambdas.is_empty()
    }

    pub fn lambda(&self, k: usize) -> f64 {
        self.lambdas[k]
    }

    pub fn lambdas(&self) -> &[f64] {
        &self.lambdas
    }
}

/// `k_1 / 2 + ... + k_T / 2^T` for the bits of `k`, qubit 1 first.
pub fn decode_phase(k: usize, t: usize) -> Result<f64> {
    if t >= usize::BITS as usize || k >= 1usize << t {
        return Err(Error::InvalidArgument(format!("outcome {k} outside 0..2^{t}")));
    }
    Ok(k as f64 / (1u64 << t) as f64)
}

/// `lambda = 4 pi phi`.
pub fn decode_eigenvalue(phi: f64) -> Result<f64> {
    if !(0.0..1.0).contains(&phi) {
        return Err(Error::PhaseOutOfRange { phi });
    }
    Ok(decode_eigenvalue_unchecked(phi))
}

fn decode_eigenvalue_unchecked(phi: f64) -> f64 {
    4.0 * PI * phi
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "kebab-case")]
pub enum InitialMode {
    ExactGround,
    /// Amplitude `overlap` on the ground eigenvector, the rest spread
    /// evenly over the other eigenvectors.
    Perturbed { overlap: f64 },
}

impl InitialMode {
    pub fn validate(&self, n: usize) -> Result<()> {
        if let InitialMode::Perturbed { overlap } = *self {
            if !(overlap > 0.0 && overlap <= 1.0) {
                return Err(Error::InvalidArgument(format!("overlap {overlap} outside (0, 1]")));
            }
            if overlap * overlap < MIN_OVERLAP_SQ {
                return Err(Error::InvalidArgument(format!(
                    "overlap^2 = {} below the minimum {MIN_OVERLAP_SQ}",
                    overlap * overlap
                )));
            }
            if n == 1 && overlap < 1.0 {
                return Err(Error::InvalidArgument("n = 1 has no other eigenvector to perturb towards".into()));
            }
        }
        Ok(())
    }

    /// Initial target amplitudes in the eigenbasis.
    pub fn target_amplitudes(&self, n: usize) -> Result<Vec<Complex64>> {
        self.validate(n)?;
        let mut t = vec![Complex64::new(0.0, 0.0); n];
        match *self {
            InitialMode::ExactGround => t[0] = Complex64::new(1.0, 0.0),
            InitialMode::Perturbed { overlap } => {
                t[0] = Complex64::new(overlap, 0.0);
                if n > 1 {
                    let rest = ((1.0 - overlap * overlap) / (n - 1) as f64).sqrt();
                    t[1..].iter_mut().for_each(|a| *a = Complex64::new(rest, 0.0));
                }
            }
        }
        Ok(t)
    }
}

impl fmt::Display for InitialMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            InitialMode::ExactGround => write!(f, "exact"),
            InitialMode::Perturbed { overlap } => write!(f, "perturbed:{overlap}"),
        }
    }
}

impl FromStr for InitialMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        if s == "exact" {
            return Ok(InitialMode::ExactGround);
        }
        if let Some(v) = s.strip_prefix("perturbed:") {
            let overlap = v.parse::<f64>().map_err(|_| Error::InvalidArgument(format!("bad overlap {v:?}")))?;
            return Ok(InitialMode::Perturbed { overlap });
        }
        Err(Error::InvalidArgument(format!("unknown mode {s:?}; expected exact or perturbed:OVERLAP")))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PEConfig {
    /// Control qubits, equal to the number of queries.
    pub t: usize,
    pub n: usize,
    pub q: PotentialSpec,
    pub initial_mode: InitialMode,
    pub epsilon: f64,
}

impl PEConfig {
    pub fn validate(&self) -> Result<()> {
        if self.t == 0 {
            return Err(Error::InvalidArgument("T must be at least 1".into()));
        }
        if self.n == 0 {
            return Err(Error::InvalidArgument("n must be at least 1".into()));
        }
        if !(self.epsilon > 0.0) {
            return Err(Error::InvalidArgument(format!("epsilon must be positive, got {}", self.epsilon)));
        }
        RegisterLayout::new(self.t, self.n)?;
        self.initial_mode.validate(self.n)
    }
}

/// The phase-estimation schedule with `t` control qubits.
///
/// Queries are applied in circuit order: qubit `t` with power `1`, then qubit
/// `t - 1` with power `2`, ..., qubit 1 with power `2^{t-1}`.
pub fn build_pe_schedule(t: usize, n: usize, mode: InitialMode) -> Result<AlgorithmSchedule> {
    if t == 0 {
        return Err(Error::InvalidArgument("T must be at least 1".into()));
    }
    let layout = RegisterLayout::new(t, n)?;
    let initial = init_state(layout, &mode.target_amplitudes(n)?, TargetBasis::Eigen)?;
    let steps = (1..=t)
        .map(|j| QueryStep {
            control_bit: t - j + 1,
            power: 1u64 << (j - 1),
            then: if j == t { UnitarySpec::inverse_qft(t) } else { UnitarySpec::Identity },
        })
        .collect();
    AlgorithmSchedule::new(initial, UnitarySpec::HadamardLayer, steps, OutcomeDecoder::binary_phase(t))
}

/// Eigensystem of `M_q`: closed form for constants, bisection otherwise.
pub fn eigensystem_for(q: &PotentialSpec, n: usize) -> Result<EigenSystem> {
    match q.as_constant() {
        Some(v) => constant_eigensystem(v, n),
        None => solve_eigensystem(&build_matrix(q, n)?, DEFAULT_TOLERANCE),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PEResult {
    pub t: usize,
    pub n: usize,
    pub lambda_ground: f64,
    pub phase: f64,
    pub epsilon: f64,
    pub success_probability: f64,
    pub distribution: MeasurementDistribution,
    /// Decoded estimate for each outcome label.
    pub estimates: Vec<f64>,
}

pub fn run_phase_estimation(cfg: &PEConfig) -> Result<PEResult> {
    cfg.validate()?;
    let eig = eigensystem_for(&cfg.q, cfg.n)?;
    run_phase_estimation_with(cfg.t, cfg.initial_mode, &eig, cfg.epsilon)
}

/// Phase estimation against an explicit eigensystem, which may be synthetic.
pub fn run_phase_estimation_with(t: usize, mode: InitialMode, eig: &EigenSystem, epsilon: f64) -> Result<PEResult> {
    let lambda_ground = eig.ground_eigenvalue();
    let phase = lambda_ground / (4.0 * PI);
    if !(0.0..1.0).contains(&phase) {
        return Err(Error::PhaseOutOfRange { phi: phase });
    }
    let schedule = build_pe_schedule(t, eig.n(), mode)?;
    let state = run_schedule(&schedule, eig)?;
    let distribution = measurement_distribution(&state, MeasurementScope::ControlOnly, eig)?;
    let decoder = schedule.decoder();
    let success_probability = success_probability(&distribution, decoder, lambda_ground, epsilon);
    let estimates = distribution.labels.iter().map(|&k| decoder.lambda(k)).collect();
    Ok(PEResult { t, n: eig.n(), lambda_ground, phase, epsilon, success_probability, distribution, estimates })
}

/// Mass on outcomes whose estimate lies within `epsilon` of `reference`
/// (inclusive).
pub fn success_probability(dist: &MeasurementDistribution, decoder: &OutcomeDecoder, reference: f64, epsilon: f64) -> f64 {
    dist.labels
        .iter()
        .zip(&dist.probabilities)
        .filter(|(&k, _)| (decoder.lambda(k) - reference).abs() <= epsilon)
        .map(|(_, p)| p)
        .sum()
}

/// Smallest `epsilon` with `success_probability >= threshold`.
///
/// Success is a step function of `epsilon` with jumps at the outcome
/// distances, so the infimum is one of those distances (or zero).
pub fn minimal_epsilon(dist: &MeasurementDistribution, decoder: &OutcomeDecoder, reference: f64, threshold: f64) -> f64 {
    if threshold <= 0.0 {
        return 0.0;
    }
    let mut by_distance: Vec<(f64, f64)> = dist
        .labels
        .iter()
        .zip(&dist.probabilities)
        .map(|(&k, &p)| ((decoder.lambda(k) - reference).abs(), p))
        .collect();
    by_distance.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut mass = 0.0;
    let mut i = 0;
    while i < by_distance.len() {
        let d = by_distance[i].0;
        while i < by_distance.len() && by_distance[i].0 == d {
            mass += by_distance[i].1;
            i += 1;
        }
        if mass >= threshold {
            return d;
        }
    }
    // unreachable for a normalized distribution and threshold <= 1
    by_distance.last().map_or(0.0, |x| x.0)
}

/// Default grid of constant potentials: `points` cell midpoints of `[0, 1)`
/// plus the endpoints `0` and `1 - 2^-20`.
pub fn default_q_grid(points: usize) -> Vec<f64> {
    let mut grid = vec![0.0];
    grid.extend((0..points).map(|j| (j as f64 + 0.5) / points as f64));
    grid.push(1.0 - 2f64.powi(-20));
    grid
}

/// Grid estimate of the worst-case error.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ErrorReport {
    pub t: usize,
    pub n: usize,
    pub threshold: f64,
    /// Max over the grid of the per-input minimal epsilon; a lower estimate
    /// of the supremum over all inputs.
    pub epsilon_achieved: f64,
    /// Min over the grid of the success probability at `epsilon_achieved`.
    pub success_probability_min: f64,
    pub grid: Vec<f64>,
    pub per_input_epsilon: Vec<f64>,
}

pub fn worst_case_error_sweep(t: usize, n: usize, q_grid: &[f64], threshold: f64) -> Result<ErrorReport> {
    if q_grid.is_empty() {
        return Err(Error::InvalidArgument("q grid is empty".into()));
    }
    if !(0.0..=1.0).contains(&threshold) {
        return Err(Error::InvalidArgument(format!("threshold {threshold} outside [0, 1]")));
    }
    let runs: Vec<(f64, MeasurementDistribution, f64)> = q_grid
        .par_iter()
        .map(|&q| {
            let eig = constant_eigensystem(q, n)?;
            let r = run_phase_estimation_with(t, InitialMode::ExactGround, &eig, 0.0)?;
            let decoder = OutcomeDecoder::binary_phase(t);
            let eps = minimal_epsilon(&r.distribution, &decoder, r.lambda_ground, threshold);
            Ok((eps, r.distribution, r.lambda_ground))
        })
        .collect::<Result<_>>()?;
    let per_input_epsilon: Vec<f64> = runs.iter().map(|r| r.0).collect();
    let epsilon_achieved = per_input_epsilon.iter().copied().fold(0.0, f64::max);
    let decoder = OutcomeDecoder::binary_phase(t);
    let success_probability_min = runs
        .iter()
        .map(|(_, d, l)| success_probability(d, &decoder, *l, epsilon_achieved))
        .fold(f64::INFINITY, f64::min);
    Ok(ErrorReport {
        t,
        n,
        threshold,
        epsilon_achieved,
        success_probability_min,
        grid: q_grid.to_vec(),
        per_input_epsilon,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScalingRow {
    pub epsilon: f64,
    pub min_t: usize,
    pub error_at_t: f64,
}

/// For each target accuracy, the smallest `T` whose grid error estimate is at
/// most that accuracy. Rows follow the input order.
pub fn query_count_scaling(epsilons: &[f64], n: usize, q_grid: &[f64]) -> Result<Vec<ScalingRow>> {
    if let Some(e) = epsilons.iter().find(|e| !(**e > 0.0 && **e <= 1.0)) {
        return Err(Error::InvalidArgument(format!("epsilon {e} outside (0, 1]")));
    }
    let max_t = (1..usize::BITS as usize)
        .take_while(|&t| RegisterLayout::with_limit(t, n, DEFAULT_AMPLITUDE_LIMIT).is_ok())
        .last()
        .ok_or(Error::DimensionLimit { requested: 2 * n, limit: DEFAULT_AMPLITUDE_LIMIT })?;
    let mut errors: Vec<Option<f64>> = vec![None; max_t + 1];
    let mut rows = Vec::with_capacity(epsilons.len());
    for &eps in epsilons {
        let mut found = None;
        for t in 1..=max_t {
            let e = match errors[t] {
                Some(e) => e,
                None => {
                    let e = worst_case_error_sweep(t, n, q_grid, SUCCESS_THRESHOLD)?.epsilon_achieved;
                    errors[t] = Some(e);
                    e
                }
            };
            if e <= eps {
                found = Some((t, e));
                break;
            }
        }
        let (min_t, error_at_t) = found.ok_or(Error::DimensionLimit {
            requested: (1usize << max_t) * n * 2,
            limit: DEFAULT_AMPLITUDE_LIMIT,
        })?;
        rows.push(ScalingRow { epsilon: eps, min_t, error_at_t });
    }
    Ok(rows)
}

/// Grid size with discretization error at most `epsilon / 2`, from
/// `pi^4 / (12 (n+1)^2) <= epsilon / 2`.
pub fn discretization_points_for(epsilon: f64) -> usize {
    let c = PI * PI / 6f64.sqrt();
    ((c / epsilon.sqrt()).ceil() as usize).saturating_sub(1).max(1)
}

/// Control qubits with phase resolution `4 pi / 2^T <= epsilon / 2`.
pub fn control_qubits_for(epsilon: f64) -> usize {
    (8.0 * PI / epsilon).log2().ceil().max(1.0) as usize
}
