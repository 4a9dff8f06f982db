//! Amplitudes of a power-query schedule as trigonometric polynomials in the
//! constant potential: `amplitude(k, s; q) = sum_m eta[k, s, m] exp(i m q / 2)`.

use std::collections::BTreeMap;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::eigen::EigenSystem;
use crate::error::{Error, Result};
use crate::format::float17;
use crate::quantum::{AlgorithmSchedule, RegisterLayout, StateVector, TargetBasis, UnitarySpec};

/// Default cap on stored coefficients (`columns * 2^c`).
pub const DEFAULT_SYMBOLIC_LIMIT: usize = 1 << 22;

/// Coefficients below this modulus are dropped after each unitary.
pub const PRUNE_THRESHOLD: f64 = 1e-15;

/// Sparse `eta[k, s, m]`, stored as one vector over `k` per `(m, s)` column.
#[derive(Debug, Clone, PartialEq)]
pub struct TrigCoefficients {
    layout: RegisterLayout,
    columns: BTreeMap<(i64, usize), Vec<Complex64>>,
    /// `sum |eta|^2` after `U_0` and after every query and unitary.
    norm_history: Vec<f64>,
}

impl TrigCoefficients {
    pub fn layout(&self) -> RegisterLayout {
        self.layout
    }

    pub fn get(&self, k: usize, s: usize, m: i64) -> Complex64 {
        self.columns.get(&(m, s)).map_or(Complex64::new(0.0, 0.0), |c| c[k])
    }

    /// Frequencies with at least one nonzero coefficient, ascending.
    pub fn frequencies(&self) -> Vec<i64> {
        let mut m: Vec<i64> = self.columns.keys().map(|&(m, _)| m).collect();
        m.dedup();
        m
    }

    /// Nonzero entries as `(k, s, m, eta)`, ordered by `(m, s, k)`.
    pub fn entries(&self) -> impl Iterator<Item = (usize, usize, i64, Complex64)> + '_ {
        self.columns.iter().flat_map(|(&(m, s), col)| {
            col.iter().enumerate().filter(|(_, v)| **v != Complex64::new(0.0, 0.0)).map(move |(k, &v)| (k, s, m, v))
        })
    }

    /// Nonzero `(m, eta)` pairs of the polynomial at `(k, s)`.
    pub(crate) fn polynomial(&self, k: usize, s: usize) -> Vec<(i64, Complex64)> {
        self.columns
            .iter()
            .filter(|((_, cs), _)| *cs == s)
            .map(|(&(m, _), col)| (m, col[k]))
            .filter(|(_, v)| *v != Complex64::new(0.0, 0.0))
            .collect()
    }

    pub fn norm_sqr(&self) -> f64 {
        self.columns.values().flatten().map(|v| v.norm_sqr()).sum()
    }

    pub fn norm_history(&self) -> &[f64] {
        &self.norm_history
    }

    /// CSV with header `k,s,m,re,im`; `s` is the 0-based eigen index.
    pub fn to_csv(&self) -> String {
        let mut rows: Vec<_> = self.entries().collect();
        rows.sort_by_key(|&(k, s, m, _)| (k, s, m));
        let mut out = String::from("k,s,m,re,im\n");
        for (k, s, m, v) in rows {
            out.push_str(&format!("{k},{s},{m},{},{}\n", float17(v.re), float17(v.im)));
        }
        out
    }

    fn stored(&self) -> usize {
        self.columns.len() * self.layout.control_dim()
    }
}

pub fn symbolic_run(schedule: &AlgorithmSchedule, eig: &EigenSystem) -> Result<TrigCoefficients> {
    symbolic_run_with_limit(schedule, eig, DEFAULT_SYMBOLIC_LIMIT)
}

/// Runs the coefficient recursion: a query `W_l^p` moves the coefficients of
/// every `k` with bit `l` set from `m` to `m + p` and multiplies them by
/// `zeta_s^p`; a fixed unitary mixes coefficients sharing the same `m`.
pub fn symbolic_run_with_limit(schedule: &AlgorithmSchedule, eig: &EigenSystem, limit: usize) -> Result<TrigCoefficients> {
    let layout = schedule.layout();
    let (c, dim, n) = (layout.control_qubits(), layout.control_dim(), layout.target_dim());
    if eig.n() != n {
        return Err(Error::InvalidArgument(format!("eigensystem has n = {}, schedule expects n = {n}", eig.n())));
    }
    let zeta = eig.phase_factors().ok_or(Error::MissingPhaseFactors)?;

    let init = schedule.initial_state();
    let mut columns = BTreeMap::new();
    for s in 0..n {
        let col: Vec<Complex64> = (0..dim).map(|k| init.amplitude(k, s)).collect();
        if col.iter().any(|v| *v != Complex64::new(0.0, 0.0)) {
            columns.insert((0, s), col);
        }
    }
    let mut coeffs = TrigCoefficients { layout, columns, norm_history: Vec::new() };
    apply_fixed(&mut coeffs, schedule.initial_unitary(), c)?;
    coeffs.norm_history.push(coeffs.norm_sqr());
    check_limit(&coeffs, 0, limit)?;

    for (j, step) in schedule.steps().iter().enumerate() {
        let mask = layout.control_bit_mask(step.control_bit)?;
        let p = i64::try_from(step.power).map_err(|_| Error::InvalidArgument(format!("power {} too large", step.power)))?;
        let mut next: BTreeMap<(i64, usize), Vec<Complex64>> = BTreeMap::new();
        for (&(m, s), col) in &coeffs.columns {
            let phase = zeta[s].powf(step.power as f64);
            let (mut stay, mut moved) = (vec![Complex64::new(0.0, 0.0); dim], vec![Complex64::new(0.0, 0.0); dim]);
            for (k, &v) in col.iter().enumerate() {
                if k & mask != 0 {
                    moved[k] = v * phase;
                } else {
                    stay[k] = v;
                }
            }
            let m2 = m.checked_add(p).ok_or_else(|| Error::InvalidArgument("frequency overflow".into()))?;
            accumulate(&mut next, (m, s), stay);
            accumulate(&mut next, (m2, s), moved);
        }
        coeffs.columns = next;
        coeffs.norm_history.push(coeffs.norm_sqr());
        check_limit(&coeffs, j + 1, limit)?;
        apply_fixed(&mut coeffs, &step.then, c)?;
        coeffs.norm_history.push(coeffs.norm_sqr());
        check_limit(&coeffs, j + 1, limit)?;
    }
    Ok(coeffs)
}

fn accumulate(into: &mut BTreeMap<(i64, usize), Vec<Complex64>>, key: (i64, usize), col: Vec<Complex64>) {
    if col.iter().all(|v| *v == Complex64::new(0.0, 0.0)) {
        return;
    }
    match into.get_mut(&key) {
        Some(existing) => existing.iter_mut().zip(col).for_each(|(a, b)| *a += b),
        None => {
            into.insert(key, col);
        }
    }
}

fn check_limit(coeffs: &TrigCoefficients, step: usize, limit: usize) -> Result<()> {
    let entries = coeffs.stored();
    if entries > limit {
        return Err(Error::SymbolicLimit { step, entries, limit });
    }
    Ok(())
}

fn apply_fixed(coeffs: &mut TrigCoefficients, u: &UnitarySpec, c: usize) -> Result<()> {
    if u.is_identity() {
        return Ok(());
    }
    let n = coeffs.layout.target_dim();
    let dim = coeffs.layout.control_dim();
    match u.control_matrix(c) {
        Some(mat) => {
            for col in coeffs.columns.values_mut() {
                let v = &mat * DVector::from_column_slice(col);
                col.copy_from_slice(v.as_slice());
            }
        }
        None => {
            let UnitarySpec::FullDense(mat) = u else { unreachable!("only full-space unitaries lack a control matrix") };
            let mut by_m: BTreeMap<i64, DVector<Complex64>> = BTreeMap::new();
            for (&(m, s), col) in &coeffs.columns {
                let joint = by_m.entry(m).or_insert_with(|| DVector::zeros(dim * n));
                for (k, &v) in col.iter().enumerate() {
                    joint[k * n + s] = v;
                }
            }
            let mut next = BTreeMap::new();
            for (m, joint) in by_m {
                let out: DVector<Complex64> = mat * joint;
                for s in 0..n {
                    next.insert((m, s), (0..dim).map(|k| out[k * n + s]).collect::<Vec<_>>());
                }
            }
            coeffs.columns = next;
        }
    }
    prune(coeffs);
    Ok(())
}

fn prune(coeffs: &mut TrigCoefficients) {
    coeffs.columns.retain(|_, col| {
        col.iter_mut().filter(|v| v.norm() < PRUNE_THRESHOLD).for_each(|v| *v = Complex64::new(0.0, 0.0));
        col.iter().any(|v| *v != Complex64::new(0.0, 0.0))
    });
}

/// The state for constant potential `q`. Any real `q` is accepted; the
/// expansion holds for every constant shift of the spectrum.
pub fn evaluate_symbolic(coeffs: &TrigCoefficients, q: f64) -> Result<StateVector> {
    if !q.is_finite() {
        return Err(Error::InvalidArgument(format!("q must be finite, got {q}")));
    }
    let (dim, n) = (coeffs.layout.control_dim(), coeffs.layout.target_dim());
    let mut joint = vec![Complex64::new(0.0, 0.0); dim * n];
    for (&(m, s), col) in &coeffs.columns {
        let e = Complex64::from_polar(1.0, 0.5 * m as f64 * q);
        for (k, &v) in col.iter().enumerate() {
            joint[k * n + s] += v * e;
        }
    }
    StateVector::from_joint(coeffs.layout, &joint, TargetBasis::Eigen)
}

/// `|eta|` table as a dense matrix over `(k, m)` for one eigen index; used in
/// diagnostics and tests.
pub fn coefficient_matrix(coeffs: &TrigCoefficients, s: usize) -> (Vec<i64>, DMatrix<Complex64>) {
    let ms: Vec<i64> = coeffs.columns.keys().filter(|(_, cs)| *cs == s).map(|&(m, _)| m).collect();
    let dim = coeffs.layout.control_dim();
    let mat = DMatrix::from_fn(dim, ms.len(), |k, j| coeffs.get(k, s, ms[j]));
    (ms, mat)
}
