//! Outcome-set probabilities as trigonometric polynomials:
//! `p_B(q) = sum_l beta[B, l] exp(i l q / 2)`.

use std::collections::BTreeMap;

use num_complex::Complex64;
use serde::Serialize;

use super::symbolic::TrigCoefficients;
use crate::error::{Error, Result};

/// Which outcome index a partition refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum OutcomeSpace {
    /// Control outcomes `k`; the target is traced out.
    Control,
    /// Joint eigenbasis labels `k * n + s`.
    JointEigen,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BetaCoefficients {
    pub space: OutcomeSpace,
    pub blocks: Vec<Vec<usize>>,
    /// One map `l -> beta` per block, zero entries omitted.
    pub entries: Vec<BTreeMap<i64, Complex64>>,
}

impl BetaCoefficients {
    pub fn get(&self, block: usize, l: i64) -> Complex64 {
        self.entries[block].get(&l).copied().unwrap_or_default()
    }

    /// `p_B(q)`; the imaginary part cancels up to rounding.
    pub fn probability(&self, block: usize, q: f64) -> Complex64 {
        evaluate(&self.entries[block], q)
    }

    /// All `l` with a nonzero coefficient in some block.
    pub fn support(&self) -> Vec<i64> {
        let mut l: Vec<i64> = self.entries.iter().flat_map(|e| e.keys().copied()).collect();
        l.sort_unstable();
        l.dedup();
        l
    }

    /// `max_l sum_B |beta[B, l]|`.
    pub fn max_block_sum(&self) -> f64 {
        self.support()
            .into_iter()
            .map(|l| (0..self.blocks.len()).map(|b| self.get(b, l).norm()).sum::<f64>())
            .fold(0.0, f64::max)
    }
}

pub(crate) fn evaluate(beta: &BTreeMap<i64, Complex64>, q: f64) -> Complex64 {
    beta.iter().map(|(&l, &b)| b * Complex64::from_polar(1.0, 0.5 * l as f64 * q)).sum()
}

/// Checks that `blocks` partition `0..outcomes`.
pub fn validate_partition(blocks: &[Vec<usize>], outcomes: usize) -> Result<()> {
    let mut seen = vec![0usize; outcomes];
    let mut overlaps = Vec::new();
    for &o in blocks.iter().flatten() {
        if o >= outcomes {
            return Err(Error::InvalidArgument(format!("outcome {o} outside 0..{outcomes}")));
        }
        seen[o] += 1;
        if seen[o] == 2 {
            overlaps.push(o);
        }
    }
    let missing: Vec<usize> = (0..outcomes).filter(|&o| seen[o] == 0).collect();
    if !overlaps.is_empty() || !missing.is_empty() {
        overlaps.sort_unstable();
        return Err(Error::InvalidPartition { outcomes, overlaps, missing });
    }
    Ok(())
}

/// `beta[B, l] = sum_{k in B} sum_s sum_{m2 - m1 = l} conj(eta[k, s, m1]) eta[k, s, m2]`.
pub fn beta_coefficients(coeffs: &TrigCoefficients, partition: &[Vec<usize>]) -> Result<BetaCoefficients> {
    beta_coefficients_in(coeffs, partition, OutcomeSpace::Control)
}

pub fn beta_coefficients_in(
    coeffs: &TrigCoefficients,
    partition: &[Vec<usize>],
    space: OutcomeSpace,
) -> Result<BetaCoefficients> {
    let layout = coeffs.layout();
    let outcomes = match space {
        OutcomeSpace::Control => layout.control_dim(),
        OutcomeSpace::JointEigen => layout.total_dim(),
    };
    validate_partition(partition, outcomes)?;
    let entries = partition.iter().map(|b| block_beta(coeffs, b, space)).collect();
    Ok(BetaCoefficients { space, blocks: partition.to_vec(), entries })
}

/// Coefficients of one outcome set, without requiring a full partition.
pub(crate) fn block_beta(coeffs: &TrigCoefficients, block: &[usize], space: OutcomeSpace) -> BTreeMap<i64, Complex64> {
    let n = coeffs.layout().target_dim();
    let mut out: BTreeMap<i64, Complex64> = BTreeMap::new();
    let mut add_pairs = |poly: &[(i64, Complex64)]| {
        for &(m1, a) in poly {
            for &(m2, b) in poly {
                *out.entry(m2 - m1).or_default() += a.conj() * b;
            }
        }
    };
    for &o in block {
        match space {
            OutcomeSpace::Control => (0..n).for_each(|s| add_pairs(&coeffs.polynomial(o, s))),
            OutcomeSpace::JointEigen => add_pairs(&coeffs.polynomial(o / n, o % n)),
        }
    }
    out.retain(|_, v| *v != Complex64::new(0.0, 0.0));
    out
}
