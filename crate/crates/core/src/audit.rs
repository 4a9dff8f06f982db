//! Numerical audit of the Fourier/gap argument behind the logarithmic lower
//! bound on the number of power queries.
//!
//! For an accuracy `epsilon` the inputs `x_r = (r + 1/2) / N` are spaced by
//! more than `2 epsilon`, so their sets of acceptable outcomes are disjoint.
//! Each `p_r(q)` (the probability of an answer acceptable for `x_r`) is a
//! trigonometric polynomial with frequencies in `L_T`; its `N`-point DFT at a
//! well-chosen `k` is both large (from success) and small (if `L_T` is
//! small), which forces `|L_T|^2 >= N / 10`.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::eigen::EigenSystem;
use crate::error::{Error, Result};
use crate::frequency::{block_beta, frequency_sets, symbolic_run, OutcomeSpace};
use crate::phase_estimation::SUCCESS_THRESHOLD;
use crate::quantum::{measurement_distribution, run_schedule, AlgorithmSchedule, MeasurementScope};

/// Tolerance for the DFT closed-form comparison.
pub const DFT_TOLERANCE: f64 = 1e-9;

/// Distance below which a projected frequency counts as equal to `k`.
pub const CONGRUENCE_TOLERANCE: f64 = 1e-12;

/// Slack in the gap-width bound.
pub const GAP_SLACK: f64 = 1e-12;

/// Which eigenvalue an input `q` is expected to be answered with.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum EigenvalueMap {
    /// Smallest eigenvalue of the discretized operator at the schedule's `n`.
    #[default]
    Discrete,
    /// `pi^2 + q`.
    Continuum,
}

/// `N` with `1 / (N + 1) <= 2 epsilon < 1 / N`.
pub fn grid_size_for_epsilon(epsilon: f64) -> Result<usize> {
    if !(epsilon > 0.0 && epsilon < 0.5) {
        return Err(Error::InvalidArgument(format!("epsilon must lie in (0, 1/2), got {epsilon}")));
    }
    let n = ((1.0 / (2.0 * epsilon)).ceil() - 1.0) as usize;
    let two_eps = 2.0 * epsilon;
    if n == 0 || !(1.0 / (n as f64 + 1.0) <= two_eps && two_eps < 1.0 / n as f64) {
        return Err(Error::InvalidArgument(format!("no grid size satisfies the spacing rule for epsilon {epsilon}")));
    }
    Ok(n)
}

/// `l / (4 pi)` reduced into `[0, N)`, sorted, exact duplicates removed.
pub fn project_frequencies(l_set: &[i64], n: usize) -> Vec<f64> {
    let mut out: Vec<f64> = l_set.iter().map(|&l| project(l, n)).collect();
    out.sort_by(f64::total_cmp);
    out.dedup();
    out
}

fn project(l: i64, n: usize) -> f64 {
    let v = (l as f64 / (4.0 * PI)).rem_euclid(n as f64);
    // rem_euclid can round up to exactly n for tiny negative inputs
    if v >= n as f64 {
        0.0
    } else {
        v
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Gap {
    pub start: f64,
    /// May exceed `N` for the wrap-around gap.
    pub end: f64,
    pub width: f64,
    /// Integer in `[0, N)` nearest the gap midpoint, ties to the smaller.
    pub k: usize,
}

/// Widest gap between consecutive projected frequencies, wrapping around
/// at `N`. The first widest gap in sorted order wins ties.
pub fn widest_gap(l_set: &[i64], n: usize) -> Result<Gap> {
    if n == 0 || l_set.is_empty() {
        return Err(Error::InvalidArgument("need N >= 1 and a nonempty frequency set".into()));
    }
    let t = project_frequencies(l_set, n);
    let mut best: Option<(f64, f64)> = None;
    for j in 0..t.len() {
        let start = t[j];
        let end = if j + 1 < t.len() { t[j + 1] } else { t[0] + n as f64 };
        if best.is_none_or(|(s, e)| end - start > e - s) {
            best = Some((start, end));
        }
    }
    let (start, end) = best.expect("nonempty");
    let mid = 0.5 * (start + end);
    let k = ((mid - 0.5).ceil() as i64).rem_euclid(n as i64) as usize;
    Ok(Gap { start, end, width: end - start, k })
}

/// `(max_gap_width, chosen_k)`.
pub fn gap_audit(l_set: &[i64], n: usize) -> Result<(f64, usize)> {
    let g = widest_gap(l_set, n)?;
    Ok((g.width, g.k))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Verdicts {
    /// (a) the acceptable-outcome sets are pairwise disjoint.
    pub sets_disjoint: bool,
    /// (b) `|R^<| >= N / 2`.
    pub census: bool,
    /// (c) numeric DFT equals the closed form from the beta coefficients.
    pub dft_closed_form: bool,
    /// (d) `|DFT| > 1/4` at the gap `k` for some `r` in `R^<`.
    pub dft_above_quarter: bool,
    /// (e) `|L_T|^2 >= N / 10`.
    pub frequency_count: bool,
    /// (f) widest gap `>= N / |L_T|`.
    pub gap_width: bool,
}

impl Verdicts {
    pub fn all(&self) -> bool {
        self.sets_disjoint
            && self.census
            && self.dft_closed_form
            && self.dft_above_quarter
            && self.frequency_count
            && self.gap_width
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum AuditStatus {
    Passed,
    VerdictFailed,
    /// The schedule does not reach the success threshold on the grid, so
    /// the argument does not apply.
    PremiseFailed,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GapAudit {
    pub status: AuditStatus,
    pub grid_size: usize,
    pub epsilon: f64,
    pub eigenvalue_map: EigenvalueMap,
    pub query_count: usize,
    pub x_points: Vec<f64>,
    pub reference_eigenvalues: Vec<f64>,
    pub acceptable_sets: Vec<Vec<usize>>,
    /// `p_r(x_r)`.
    pub success_at_grid: Vec<f64>,
    /// `sum_{n != r} p_r(x_n)`.
    pub off_grid_mass: Vec<f64>,
    pub r_below: Vec<usize>,
    pub r_below_census: usize,
    pub l_set_size: usize,
    pub projected: Vec<f64>,
    pub max_gap: Gap,
    pub max_gap_width: f64,
    pub chosen_k: usize,
    /// `dft_values[r][k] = sum_n p_r(x_n) exp(-2 pi i k n / N)`.
    pub dft_values: Vec<Vec<Complex64>>,
    pub dft_max_deviation: f64,
    pub verdicts: Verdicts,
}

/// Runs the audit for `schedule` over the constant-potential family whose
/// `q = 0` member is `base`. The schedule's decoder supplies the answers.
pub fn lower_bound_audit(
    schedule: &AlgorithmSchedule,
    base: &EigenSystem,
    epsilon: f64,
    map: EigenvalueMap,
) -> Result<GapAudit> {
    let kinetic = base.kinetic().ok_or(Error::MissingPhaseFactors)?.to_vec();
    if base.n() != schedule.layout().target_dim() {
        return Err(Error::InvalidArgument(format!(
            "eigensystem has n = {}, schedule expects n = {}",
            base.n(),
            schedule.layout().target_dim()
        )));
    }
    let grid = grid_size_for_epsilon(epsilon)?;
    let x_points: Vec<f64> = (0..grid).map(|r| (r as f64 + 0.5) / grid as f64).collect();
    let reference: Vec<f64> = x_points
        .iter()
        .map(|&x| match map {
            EigenvalueMap::Discrete => kinetic[0] + x,
            EigenvalueMap::Continuum => PI * PI + x,
        })
        .collect();

    let decoder = schedule.decoder();
    let acceptable_sets: Vec<Vec<usize>> = reference
        .iter()
        .map(|&lam| (0..decoder.len()).filter(|&k| (decoder.lambda(k) - lam).abs() <= epsilon).collect())
        .collect();
    let mut owner = vec![usize::MAX; decoder.len()];
    let mut sets_disjoint = true;
    for (r, set) in acceptable_sets.iter().enumerate() {
        for &k in set {
            sets_disjoint &= owner[k] == usize::MAX;
            owner[k] = r;
        }
    }

    // outcome distributions at every grid input
    let shift0 = base.eigenvalues()[0] - kinetic[0];
    let distributions: Vec<Vec<f64>> = x_points
        .par_iter()
        .map(|&x| {
            let eig = base.shifted(x - shift0);
            let state = run_schedule(schedule, &eig)?;
            Ok(measurement_distribution(&state, MeasurementScope::ControlOnly, &eig)?.probabilities)
        })
        .collect::<Result<_>>()?;
    // p[r][n] = p_r(x_n)
    let p: Vec<Vec<f64>> = acceptable_sets
        .iter()
        .map(|set| distributions.iter().map(|d| set.iter().map(|&k| d[k]).sum()).collect())
        .collect();
    let success_at_grid: Vec<f64> = (0..grid).map(|r| p[r][r]).collect();
    let premise = success_at_grid.iter().all(|&s| s >= SUCCESS_THRESHOLD);
    let off_grid_mass: Vec<f64> = (0..grid).map(|r| p[r].iter().enumerate().filter(|(n, _)| *n != r).map(|(_, v)| v).sum()).collect();
    let r_below: Vec<usize> = (0..grid).filter(|&r| off_grid_mass[r] < 0.5).collect();

    let l_set = frequency_sets(&schedule.powers())?.l_set;
    let projected = project_frequencies(&l_set, grid);
    let max_gap = widest_gap(&l_set, grid)?;

    let dft_values: Vec<Vec<Complex64>> = p
        .iter()
        .map(|pr| {
            (0..grid)
                .map(|k| {
                    pr.iter()
                        .enumerate()
                        .map(|(n, &v)| v * Complex64::from_polar(1.0, -2.0 * PI * (k * n) as f64 / grid as f64))
                        .sum()
                })
                .collect()
        })
        .collect();

    let coeffs = symbolic_run(schedule, base)?;
    let dft_max_deviation = acceptable_sets
        .par_iter()
        .zip(&dft_values)
        .map(|(set, row)| {
            let beta = block_beta(&coeffs, set, OutcomeSpace::Control);
            (0..grid).map(|k| (closed_form_dft(&beta, k, grid) - row[k]).norm()).fold(0.0, f64::max)
        })
        .reduce(|| 0.0, f64::max);

    let verdicts = Verdicts {
        sets_disjoint,
        census: 2 * r_below.len() >= grid,
        dft_closed_form: dft_max_deviation <= DFT_TOLERANCE,
        dft_above_quarter: r_below.iter().any(|&r| dft_values[r][max_gap.k].norm() > 0.25),
        frequency_count: 10 * l_set.len() * l_set.len() >= grid,
        gap_width: max_gap.width >= grid as f64 / l_set.len() as f64 - GAP_SLACK,
    };
    let status = if !premise {
        AuditStatus::PremiseFailed
    } else if verdicts.all() {
        AuditStatus::Passed
    } else {
        AuditStatus::VerdictFailed
    };
    Ok(GapAudit {
        status,
        grid_size: grid,
        epsilon,
        eigenvalue_map: map,
        query_count: schedule.query_count(),
        x_points,
        reference_eigenvalues: reference,
        acceptable_sets,
        success_at_grid,
        off_grid_mass,
        r_below_census: r_below.len(),
        r_below,
        l_set_size: l_set.len(),
        projected,
        max_gap_width: max_gap.width,
        chosen_k: max_gap.k,
        max_gap,
        dft_values,
        dft_max_deviation,
        verdicts,
    })
}

/// `sum_l beta_l e^{i l / (4N)} sum_n e^{2 pi i (l / 4pi - k) n / N}` with
/// the geometric sum in closed form.
fn closed_form_dft(beta: &std::collections::BTreeMap<i64, Complex64>, k: usize, grid: usize) -> Complex64 {
    let nf = grid as f64;
    beta.iter()
        .map(|(&l, &b)| {
            let d = (project(l, grid) - k as f64).rem_euclid(nf);
            let congruent = d.min(nf - d) <= CONGRUENCE_TOLERANCE;
            let sum = if congruent {
                Complex64::new(nf, 0.0)
            } else {
                let delta = l as f64 / (4.0 * PI) - k as f64;
                (Complex64::from_polar(1.0, 2.0 * PI * delta) - 1.0) / (Complex64::from_polar(1.0, 2.0 * PI * delta / nf) - 1.0)
            };
            b * Complex64::from_polar(1.0, l as f64 / (4.0 * nf)) * sum
        })
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::eigen::constant_eigensystem;
    use crate::phase_estimation::{build_pe_schedule, InitialMode, OutcomeDecoder};
    use crate::quantum::{init_state, RegisterLayout, TargetBasis, UnitarySpec};
    use proptest::prelude::*;

    #[test]
    fn grid_rule() {
        assert_eq!(grid_size_for_epsilon(4.0 * PI / 256.0).unwrap(), 10);
        assert_eq!(grid_size_for_epsilon(4.0 * PI / 64.0).unwrap(), 2);
        assert_eq!(grid_size_for_epsilon(0.25).unwrap(), 1);
        assert_eq!(grid_size_for_epsilon(0.3).unwrap(), 1);
        assert_eq!(grid_size_for_epsilon(0.05).unwrap(), 9);
        assert!(grid_size_for_epsilon(0.5).is_err());
        assert!(grid_size_for_epsilon(0.0).is_err());
        for i in 1..200 {
            let eps = 0.4 / i as f64;
            let n = grid_size_for_epsilon(eps).unwrap() as f64;
            assert!(1.0 / (n + 1.0) <= 2.0 * eps && 2.0 * eps < 1.0 / n);
        }
    }

    #[test]
    fn projection() {
        assert_eq!(project_frequencies(&[0], 10), vec![0.0]);
        let p = project_frequencies(&[38], 10)[0];
        assert!((p - 38.0 / (4.0 * PI)).abs() < 1e-15 && (p - 3.0239).abs() < 1e-4);
        let m = project_frequencies(&[-38], 10)[0];
        assert!((m - (10.0 - 38.0 / (4.0 * PI))).abs() < 1e-12 && (m - 6.9761).abs() < 1e-4);
        // 4 pi N wraps back to the origin
        assert!(project_frequencies(&[126], 10)[0] < 0.03);
    }

    #[test]
    fn gap_examples() {
        let single = widest_gap(&[0], 10).unwrap();
        assert_eq!((single.width, single.k), (10.0, 5));
        // a frequency projecting to exactly 5 is impossible, so build the
        // two-point case through the midpoint rule directly
        let l = (5.0 * 4.0 * PI).round() as i64;
        let g = widest_gap(&[0, l], 10).unwrap();
        assert!(g.width >= 5.0 - 1e-2);
        assert!(g.k == 2 || g.k == 3 || g.k == 7 || g.k == 8);
        assert_eq!(widest_gap(&[0], 1).unwrap().k, 0);
        assert!(widest_gap(&[], 4).is_err());
    }

    proptest! {
        #[test]
        fn widest_gap_is_at_least_average(l_set in prop::collection::btree_set(-500i64..500, 1..60), n in 1usize..40) {
            let l_set: Vec<i64> = l_set.into_iter().collect();
            let g = widest_gap(&l_set, n).unwrap();
            prop_assert!(g.width >= n as f64 / l_set.len() as f64 - GAP_SLACK);
            prop_assert!(g.k < n);
        }
    }

    #[test]
    fn phase_estimation_passes() {
        for (t, n) in [(6, 8), (8, 8)] {
            let sched = build_pe_schedule(t, n, InitialMode::ExactGround).unwrap();
            let base = constant_eigensystem(0.0, n).unwrap();
            let eps = 4.0 * PI * 2f64.powi(-(t as i32));
            let audit = lower_bound_audit(&sched, &base, eps, EigenvalueMap::Discrete).unwrap();
            assert_eq!(audit.status, AuditStatus::Passed, "{:?}", audit.verdicts);
            assert_eq!(audit.l_set_size, (1 << (t + 1)) - 1);
            assert!(audit.dft_max_deviation <= DFT_TOLERANCE);
        }
    }

    #[test]
    fn shuffled_decoder_fails_premise() {
        let sched = build_pe_schedule(8, 4, InitialMode::ExactGround)
            .unwrap()
            .with_decoder(OutcomeDecoder::shuffled(8, 3))
            .unwrap();
        let base = constant_eigensystem(0.0, 4).unwrap();
        let audit = lower_bound_audit(&sched, &base, 4.0 * PI / 256.0, EigenvalueMap::Discrete).unwrap();
        assert_eq!(audit.status, AuditStatus::PremiseFailed);
    }

    #[test]
    fn zero_query_degenerate_case() {
        let layout = RegisterLayout::new(0, 1).unwrap();
        let s0 = init_state(layout, &[Complex64::new(1.0, 0.0)], TargetBasis::Eigen).unwrap();
        let base = constant_eigensystem(0.0, 1).unwrap();
        let answer = OutcomeDecoder::from_lambdas(vec![base.ground_eigenvalue() + 0.5]).unwrap();
        let sched = AlgorithmSchedule::new(s0, UnitarySpec::Identity, vec![], answer).unwrap();
        let audit = lower_bound_audit(&sched, &base, 0.3, EigenvalueMap::Discrete).unwrap();
        assert_eq!(audit.grid_size, 1);
        assert_eq!(audit.status, AuditStatus::Passed);
        assert_eq!(audit.chosen_k, 0);
    }

    #[test]
    fn continuum_map_option() {
        let sched = build_pe_schedule(6, 32, InitialMode::ExactGround).unwrap();
        let base = constant_eigensystem(0.0, 32).unwrap();
        let audit = lower_bound_audit(&sched, &base, 4.0 * PI / 64.0, EigenvalueMap::Continuum).unwrap();
        assert_eq!(audit.eigenvalue_map, EigenvalueMap::Continuum);
        assert!((audit.reference_eigenvalues[0] - (PI * PI + 0.25)).abs() < 1e-15);
    }
}
