//! Eigensystems of the discretized operator.
//!
//! Constant potentials have the closed form
//! `lambda_s = 4 (n+1)^2 sin^2(s pi / (2 (n+1))) + q` with sine eigenvectors.
//! General potentials go through Sturm-sequence bisection for the
//! eigenvalues followed by inverse iteration for the eigenvectors.

use std::f64::consts::PI;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::Serialize;

use crate::discretization::TridiagonalSystem;
use crate::error::{Error, Result};

pub const MAX_BISECTION_STEPS: usize = 100;
pub const MAX_INVERSE_ITERATIONS: usize = 50;
pub const DEFAULT_TOLERANCE: f64 = 1e-12;

/// Relative eigenvalue distance (in units of the matrix norm) below which
/// inverse-iteration vectors are reorthogonalized against each other.
const CLUSTER_RELATIVE_GAP: f64 = 1e-3;

/// Inverse-iteration sweeps after the residual test first passes.
const EXTRA_SWEEPS: usize = 2;

/// Spectral decomposition with eigenvalues ascending and eigenvector `s`
/// stored as column `s` (0-based here; `s + 1` in the usual 1-based labels).
#[derive(Debug, Clone, PartialEq)]
pub struct EigenSystem {
    eigenvalues: Vec<f64>,
    eigenvectors: DMatrix<f64>,
    /// `lambda_s - q` for constant potentials.
    kinetic: Option<Vec<f64>>,
}

impl EigenSystem {
    /// Assembles an eigensystem from explicit parts, checking orthonormality
    /// to `1e-10` and ascending order.
    pub fn from_parts(eigenvalues: Vec<f64>, eigenvectors: DMatrix<f64>) -> Result<Self> {
        let n = eigenvalues.len();
        if n == 0 || eigenvectors.nrows() != n || eigenvectors.ncols() != n {
            return Err(Error::InvalidArgument(format!(
                "eigensystem shape mismatch: {} values, {}x{} vectors",
                n,
                eigenvectors.nrows(),
                eigenvectors.ncols()
            )));
        }
        if eigenvalues.windows(2).any(|w| w[0] > w[1]) {
            return Err(Error::InvalidArgument("eigenvalues must be ascending".into()));
        }
        let sys = EigenSystem { eigenvalues, eigenvectors, kinetic: None };
        let dev = sys.orthonormality_deviation();
        if dev > 1e-10 {
            return Err(Error::InvalidArgument(format!("eigenvectors not orthonormal (deviation {dev:e})")));
        }
        Ok(sys)
    }

    /// An eigensystem with the given eigenvalues and standard-basis
    /// eigenvectors, for driving the simulator with artificial phases.
    pub fn synthetic(eigenvalues: Vec<f64>) -> Result<Self> {
        let n = eigenvalues.len();
        Self::from_parts(eigenvalues, DMatrix::identity(n, n))
    }

    /// Attaches the constant-potential split `lambda_s = kinetic_s + shift`.
    pub fn with_constant_shift(mut self, shift: f64) -> Self {
        self.kinetic = Some(self.eigenvalues.iter().map(|l| l - shift).collect());
        self
    }

    pub fn n(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    pub fn eigenvectors(&self) -> &DMatrix<f64> {
        &self.eigenvectors
    }

    pub fn ground_eigenvalue(&self) -> f64 {
        self.eigenvalues[0]
    }

    /// Eigenvalues without the constant potential, when known.
    pub fn kinetic(&self) -> Option<&[f64]> {
        self.kinetic.as_deref()
    }

    /// `zeta_s = exp(i kinetic_s / 2)`, defined only for constant potentials.
    pub fn phase_factors(&self) -> Option<Vec<Complex64>> {
        self.kinetic
            .as_ref()
            .map(|k| k.iter().map(|&v| Complex64::from_polar(1.0, 0.5 * v)).collect())
    }

    /// The same eigenvectors with every eigenvalue moved by `delta`, i.e. the
    /// system of `M + delta I`. Not restricted to `q` in `[0, 1]`.
    pub fn shifted(&self, delta: f64) -> Self {
        EigenSystem {
            eigenvalues: self.eigenvalues.iter().map(|l| l + delta).collect(),
            eigenvectors: self.eigenvectors.clone(),
            kinetic: self.kinetic.clone(),
        }
    }

    /// `max |Psi^T Psi - I|`.
    pub fn orthonormality_deviation(&self) -> f64 {
        let n = self.n();
        let gram = self.eigenvectors.transpose() * &self.eigenvectors;
        let mut dev = 0.0f64;
        for i in 0..n {
            for j in 0..n {
                let target = if i == j { 1.0 } else { 0.0 };
                dev = dev.max((gram[(i, j)] - target).abs());
            }
        }
        dev
    }

    /// `max_s || M psi_s - lambda_s psi_s ||_inf / (n+1)^2`.
    pub fn scaled_residual(&self, m: &TridiagonalSystem) -> f64 {
        let mut worst = 0.0f64;
        for s in 0..self.n() {
            let v: Vec<f64> = self.eigenvectors.column(s).iter().copied().collect();
            let mv = m.apply(&v);
            for (a, b) in mv.iter().zip(&v) {
                worst = worst.max((a - self.eigenvalues[s] * b).abs());
            }
        }
        worst / m.scale()
    }
}

/// Closed form for a constant potential `q`.
pub fn constant_eigensystem(q: f64, n: usize) -> Result<EigenSystem> {
    if !(0.0..=1.0).contains(&q) {
        return Err(Error::InvalidArgument(format!("constant potential {q} outside [0, 1]")));
    }
    if n == 0 {
        return Err(Error::InvalidArgument("grid size n must be at least 1".into()));
    }
    let m = (n + 1) as f64;
    let kinetic: Vec<f64> = (1..=n)
        .map(|s| {
            let sn = (s as f64 * PI / (2.0 * m)).sin();
            4.0 * m * m * sn * sn
        })
        .collect();
    let norm = (2.0 / m).sqrt();
    let vectors = DMatrix::from_fn(n, n, |x, s| norm * ((s + 1) as f64 * PI * (x + 1) as f64 / m).sin());
    Ok(EigenSystem {
        eigenvalues: kinetic.iter().map(|k| k + q).collect(),
        eigenvectors: vectors,
        kinetic: Some(kinetic),
    })
}

/// Number of eigenvalues of the symmetric tridiagonal matrix strictly below `x`.
pub fn sturm_count(diag: &[f64], offdiag: f64, x: f64) -> usize {
    let e2 = offdiag * offdiag;
    let guard = f64::MIN_POSITIVE.sqrt() * (1.0 + offdiag.abs());
    let mut count = 0;
    let mut pivot = 1.0;
    for (i, &d) in diag.iter().enumerate() {
        pivot = if i == 0 { d - x } else { d - x - e2 / pivot };
        if pivot.abs() < guard {
            pivot = -guard;
        }
        if pivot < 0.0 {
            count += 1;
        }
    }
    count
}

/// Bisection for the `index`-th (0-based) eigenvalue down to the
/// floating-point resolution.
fn bisect(m: &TridiagonalSystem, index: usize) -> Result<f64> {
    let radius = 2.0 * m.offdiag.abs();
    let mut lo = m.diag.iter().copied().fold(f64::INFINITY, f64::min) - radius;
    let mut hi = m.diag.iter().copied().fold(f64::NEG_INFINITY, f64::max) + radius;
    for _ in 0..MAX_BISECTION_STEPS {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            return Ok(mid);
        }
        if sturm_count(&m.diag, m.offdiag, mid) > index {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Err(Error::NonConvergence { what: "bisection", index, iterations: MAX_BISECTION_STEPS })
}

/// `lambda_1(M)` by bisection to full floating-point resolution.
pub fn smallest_eigenvalue(m: &TridiagonalSystem) -> Result<f64> {
    bisect(m, 0)
}

/// Tridiagonal LU with partial pivoting of `M - mu I` (LAPACK `gttrf` layout).
struct ShiftedLu {
    dl: Vec<f64>,
    d: Vec<f64>,
    du: Vec<f64>,
    du2: Vec<f64>,
    swapped: Vec<bool>,
}

impl ShiftedLu {
    fn factor(m: &TridiagonalSystem, mu: f64, tiny: f64) -> Self {
        let n = m.n;
        let mut dl = vec![m.offdiag; n.saturating_sub(1)];
        let mut d: Vec<f64> = m.diag.iter().map(|v| v - mu).collect();
        let mut du = vec![m.offdiag; n.saturating_sub(1)];
        let mut du2 = vec![0.0; n.saturating_sub(2)];
        let mut swapped = vec![false; n.saturating_sub(1)];
        for i in 0..n.saturating_sub(1) {
            if d[i].abs() >= dl[i].abs() {
                if d[i] != 0.0 {
                    let fact = dl[i] / d[i];
                    dl[i] = fact;
                    d[i + 1] -= fact * du[i];
                } else {
                    dl[i] = 0.0;
                }
            } else {
                let fact = d[i] / dl[i];
                d[i] = dl[i];
                dl[i] = fact;
                let temp = du[i];
                du[i] = d[i + 1];
                d[i + 1] = temp - fact * d[i + 1];
                if i + 2 < n {
                    du2[i] = du[i + 1];
                    du[i + 1] *= -fact;
                }
                swapped[i] = true;
            }
        }
        // exact singularity: perturb the pivot so the solve still amplifies the null direction
        for p in d.iter_mut() {
            if p.abs() < tiny {
                *p = if *p < 0.0 { -tiny } else { tiny };
            }
        }
        ShiftedLu { dl, d, du, du2, swapped }
    }

    fn solve(&self, b: &mut [f64]) {
        let n = b.len();
        for i in 0..n.saturating_sub(1) {
            if self.swapped[i] {
                let temp = b[i];
                b[i] = b[i + 1];
                b[i + 1] = temp - self.dl[i] * b[i];
            } else {
                b[i + 1] -= self.dl[i] * b[i];
            }
        }
        b[n - 1] /= self.d[n - 1];
        if n >= 2 {
            b[n - 2] = (b[n - 2] - self.du[n - 2] * b[n - 1]) / self.d[n - 2];
        }
        for i in (0..n.saturating_sub(2)).rev() {
            b[i] = (b[i] - self.du[i] * b[i + 1] - self.du2[i] * b[i + 2]) / self.d[i];
        }
    }
}

fn normalize(v: &mut [f64]) {
    let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    v.iter_mut().for_each(|x| *x /= norm);
}

/// Deterministic start vector with no special symmetry.
fn start_vector(n: usize, index: usize) -> Vec<f64> {
    let mut state = 0x9E37_79B9_7F4A_7C15u64 ^ (index as u64).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    (0..n)
        .map(|_| {
            state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            0.5 + (state >> 11) as f64 / (1u64 << 53) as f64
        })
        .collect()
}

/// Full eigensystem by Sturm bisection plus inverse iteration.
///
/// Eigenvalues are bisected to full floating-point resolution. `tol` is
/// relative to `(n + 1)^2`: every eigenvector must reach a residual of at
/// most `tol (n+1)^2`, after which two more sweeps polish it.
pub fn solve_eigensystem(m: &TridiagonalSystem, tol: f64) -> Result<EigenSystem> {
    if !(tol > 0.0) {
        return Err(Error::InvalidArgument(format!("tolerance must be positive, got {tol}")));
    }
    let n = m.n;
    let scale = m.scale();
    let abs_tol = tol * scale;
    let norm = m.norm_bound();
    let eps = f64::EPSILON;

    let mut eigenvalues = Vec::with_capacity(n);
    for i in 0..n {
        eigenvalues.push(bisect(m, i)?);
    }

    let mut vectors = DMatrix::<f64>::zeros(n, n);
    let mut cluster_start = 0;
    for i in 0..n {
        if i > 0 && eigenvalues[i] - eigenvalues[i - 1] > CLUSTER_RELATIVE_GAP * norm {
            cluster_start = i;
        }
        // separate coincident shifts so each solve has its own dominant direction
        let mut mu = eigenvalues[i];
        if i > cluster_start && mu - eigenvalues[i - 1] < 10.0 * eps * norm {
            mu = eigenvalues[i - 1] + 10.0 * eps * norm;
        }
        let lu = ShiftedLu::factor(m, mu, eps * norm);
        let mut x = start_vector(n, i);
        normalize(&mut x);
        let mut converged = false;
        let mut extra = 0;
        for _ in 0..MAX_INVERSE_ITERATIONS {
            lu.solve(&mut x);
            for j in cluster_start..i {
                let col = vectors.column(j);
                let dot: f64 = col.iter().zip(&x).map(|(a, b)| a * b).sum();
                x.iter_mut().zip(col.iter()).for_each(|(a, b)| *a -= dot * b);
            }
            normalize(&mut x);
            let mx = m.apply(&x);
            let residual = mx.iter().zip(&x).fold(0.0f64, |r, (a, b)| r.max((a - eigenvalues[i] * b).abs()));
            if residual <= abs_tol {
                converged = true;
            }
            if converged {
                if extra == EXTRA_SWEEPS {
                    break;
                }
                extra += 1;
            }
        }
        if !converged {
            return Err(Error::NonConvergence { what: "inverse iteration", index: i, iterations: MAX_INVERSE_ITERATIONS });
        }
        if let Some(first) = x.iter().copied().find(|v| v.abs() > 1e-10) {
            if first < 0.0 {
                x.iter_mut().for_each(|v| *v = -*v);
            }
        }
        vectors.set_column(i, &nalgebra::DVector::from_vec(x));
    }

    let sys = EigenSystem { eigenvalues, eigenvectors: vectors, kinetic: None };
    Ok(match m.constant_potential {
        Some(q) => sys.with_constant_shift(q),
        None => sys,
    })
}

/// Eigenvalues and eigenvector columns in a serializable layout.
#[derive(Debug, Clone, Serialize)]
pub struct EigenSummary {
    pub n: usize,
    pub eigenvalues: Vec<f64>,
    pub eigenvectors: Option<Vec<Vec<f64>>>,
}

impl EigenSystem {
    pub fn summary(&self, with_vectors: bool) -> EigenSummary {
        EigenSummary {
            n: self.n(),
            eigenvalues: self.eigenvalues.clone(),
            eigenvectors: with_vectors
                .then(|| (0..self.n()).map(|s| self.eigenvectors.column(s).iter().copied().collect()).collect()),
        }
    }
}
