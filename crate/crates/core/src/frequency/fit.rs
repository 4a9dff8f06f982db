//! Least-squares fit of sampled probabilities against `exp(i l q / 2)`.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};

/// Default number of sample points.
pub const DEFAULT_FIT_POINTS: usize = 1024;

/// Fits with a larger singular-value ratio are rejected.
pub const MAX_CONDITION: f64 = 1e12;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrigFit {
    /// `(l, coefficient)` in the order of the requested support.
    pub coefficients: Vec<(i64, Complex64)>,
    /// Root-mean-square misfit over the samples.
    pub residual: f64,
    pub condition: f64,
}

impl TrigFit {
    pub fn coefficient(&self, l: i64) -> Option<Complex64> {
        self.coefficients.iter().find(|(x, _)| *x == l).map(|(_, c)| *c)
    }
}

/// `points` equally spaced values covering one full period `[0, 4 pi)` of
/// every basis function; on this grid distinct frequencies below
/// `points` in absolute difference are exactly orthogonal.
pub fn period_grid(points: usize) -> Vec<f64> {
    (0..points).map(|j| 4.0 * PI * j as f64 / points as f64).collect()
}

pub fn fit_trig_poly(samples: &[(f64, f64)], l_set: &[i64]) -> Result<TrigFit> {
    if l_set.is_empty() {
        return Err(Error::InvalidArgument("empty frequency support".into()));
    }
    if samples.len() < 2 * l_set.len() {
        return Err(Error::InvalidArgument(format!(
            "{} samples for {} frequencies; need at least {}",
            samples.len(),
            l_set.len(),
            2 * l_set.len()
        )));
    }
    let mut qs: Vec<f64> = samples.iter().map(|s| s.0).collect();
    if qs.iter().any(|q| !q.is_finite()) {
        return Err(Error::InvalidArgument("sample positions must be finite".into()));
    }
    qs.sort_by(f64::total_cmp);
    if qs.windows(2).any(|w| w[0] == w[1]) {
        return Err(Error::InvalidArgument("sample positions must be distinct".into()));
    }

    let a = DMatrix::from_fn(samples.len(), l_set.len(), |i, j| {
        Complex64::from_polar(1.0, 0.5 * l_set[j] as f64 * samples[i].0)
    });
    let b = DVector::from_iterator(samples.len(), samples.iter().map(|s| Complex64::new(s.1, 0.0)));
    let svd = a.clone().svd(true, true);
    let max = svd.singular_values.max();
    let min = svd.singular_values.min();
    let condition = if min > 0.0 { max / min } else { f64::INFINITY };
    if condition > MAX_CONDITION {
        return Err(Error::Conditioning { condition });
    }
    let x = svd.solve(&b, 0.0).map_err(|e| Error::InvalidArgument(e.to_string()))?;
    let misfit = &a * &x - &b;
    let residual = (misfit.norm_squared() / samples.len() as f64).sqrt();
    Ok(TrigFit { coefficients: l_set.iter().copied().zip(x.iter().copied()).collect(), residual, condition })
}
