//! Second-order finite-difference discretization of `-u'' + q u` on `[0, 1]`
//! with Dirichlet boundaries.

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::eigen::smallest_eigenvalue;
use crate::error::{Error, Result};
use crate::potential::PotentialSpec;

/// Limit of `(lambda(q) - lambda_1(M_q)) (n + 1)^2` for constant `q`.
pub const SCALED_ERROR_LIMIT: f64 = PI * PI * PI * PI / 12.0;

/// The `n x n` matrix `(n+1)^2 tridiag(-1, 2, -1) + diag(q(j / (n+1)))`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TridiagonalSystem {
    pub n: usize,
    pub diag: Vec<f64>,
    pub offdiag: f64,
    /// The potential value when `q` is constant; its eigenvectors are then
    /// independent of `q`.
    pub constant_potential: Option<f64>,
}

impl TridiagonalSystem {
    /// `(n + 1)^2`, the natural scale of every entry.
    pub fn scale(&self) -> f64 {
        let m = (self.n + 1) as f64;
        m * m
    }

    /// `y = M x`.
    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        let n = self.n;
        (0..n)
            .map(|i| {
                let mut y = self.diag[i] * x[i];
                if i > 0 {
                    y += self.offdiag * x[i - 1];
                }
                if i + 1 < n {
                    y += self.offdiag * x[i + 1];
                }
                y
            })
            .collect()
    }

    /// Upper bound on the spectral radius (Gershgorin).
    pub fn norm_bound(&self) -> f64 {
        let dmax = self.diag.iter().fold(0.0f64, |a, &d| a.max(d.abs()));
        dmax + 2.0 * self.offdiag.abs()
    }
}

pub fn build_matrix(q: &PotentialSpec, n: usize) -> Result<TridiagonalSystem> {
    if n == 0 {
        return Err(Error::InvalidArgument("grid size n must be at least 1".into()));
    }
    let scale = ((n + 1) * (n + 1)) as f64;
    let mut diag = Vec::with_capacity(n);
    for j in 1..=n {
        let v = q.grid_value(j, n)?;
        if !(0.0..=1.0).contains(&v) || !v.is_finite() {
            return Err(Error::InvalidPotential {
                index: j,
                x: j as f64 / (n + 1) as f64,
                reason: format!("q = {v} outside [0, 1]"),
            });
        }
        diag.push(2.0 * scale + v);
    }
    Ok(TridiagonalSystem { n, diag, offdiag: -scale, constant_potential: q.as_constant() })
}

/// Smallest eigenvalue of the continuous operator for constant `q`: `pi^2 + q`.
pub fn continuum_eigenvalue(q: f64) -> f64 {
    PI * PI + q
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErrorStudyRow {
    pub n: usize,
    pub lambda_continuum: f64,
    pub lambda_discrete: f64,
    pub error: f64,
    pub scaled_error: f64,
}

/// Compares `pi^2 + q` with the numerically computed `lambda_1(M_q)` for
/// each grid size. Rows come back in input order.
pub fn discretization_error_study(q: f64, n_list: &[usize]) -> Result<Vec<ErrorStudyRow>> {
    if n_list.is_empty() {
        return Err(Error::InvalidArgument("n list is empty".into()));
    }
    if n_list.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidArgument("n list must be strictly ascending".into()));
    }
    let potential = PotentialSpec::constant(q)?;
    n_list
        .par_iter()
        .map(|&n| {
            let m = build_matrix(&potential, n)?;
            let lambda_discrete = smallest_eigenvalue(&m)?;
            let lambda_continuum = continuum_eigenvalue(q);
            let error = lambda_continuum - lambda_discrete;
            Ok(ErrorStudyRow { n, lambda_continuum, lambda_discrete, error, scaled_error: error * m.scale() })
        })
        .collect()
}
