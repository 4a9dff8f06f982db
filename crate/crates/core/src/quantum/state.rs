use std::f64::consts::FRAC_1_SQRT_2;

use num_complex::Complex64;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use super::unitary::UnitarySpec;
use super::{RegisterLayout, INPUT_NORM_TOLERANCE};
use crate::eigen::EigenSystem;
use crate::error::{Error, Result};

const ZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };

/// Basis in which the target register amplitudes are expressed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TargetBasis {
    /// Coordinates with respect to the eigenvectors `psi_s`.
    Eigen,
    /// Coordinates with respect to the grid points `|x>`.
    Standard,
}

/// Pure state on `C^{2^c} (x) C^n`.
///
/// Amplitudes are grouped by target index `s`; each group holds the `2^c`
/// control amplitudes and is left unallocated while it is identically zero.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    layout: RegisterLayout,
    basis: TargetBasis,
    blocks: Vec<Option<Vec<Complex64>>>,
}

/// `|0...0> (x) |target>`.
pub fn init_state(layout: RegisterLayout, target: &[Complex64], basis: TargetBasis) -> Result<StateVector> {
    if target.len() != layout.target_dim() {
        return Err(Error::InvalidArgument(format!(
            "target has {} amplitudes, layout expects {}",
            target.len(),
            layout.target_dim()
        )));
    }
    let norm = target.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
    if (norm - 1.0).abs() > INPUT_NORM_TOLERANCE {
        return Err(Error::NotNormalized { norm });
    }
    let blocks = target
        .iter()
        .map(|&a| {
            (a != ZERO).then(|| {
                let mut b = vec![ZERO; layout.control_dim()];
                b[0] = a;
                b
            })
        })
        .collect();
    Ok(StateVector { layout, basis, blocks })
}

/// Serializable snapshot, amplitudes ordered by joint index `k * n + s`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StateDump {
    pub control_qubits: usize,
    pub target_dim: usize,
    pub basis: TargetBasis,
    pub amplitudes: Vec<[f64; 2]>,
}

impl StateVector {
    /// Builds a state from amplitudes ordered by joint index `k * n + s`.
    pub fn from_joint(layout: RegisterLayout, amplitudes: &[Complex64], basis: TargetBasis) -> Result<Self> {
        if amplitudes.len() != layout.total_dim() {
            return Err(Error::InvalidArgument(format!(
                "expected {} amplitudes, got {}",
                layout.total_dim(),
                amplitudes.len()
            )));
        }
        let norm = amplitudes.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        if (norm - 1.0).abs() > INPUT_NORM_TOLERANCE {
            return Err(Error::NotNormalized { norm });
        }
        Ok(Self::from_joint_unchecked(layout, amplitudes, basis))
    }

    pub(crate) fn from_joint_unchecked(layout: RegisterLayout, amplitudes: &[Complex64], basis: TargetBasis) -> Self {
        let n = layout.target_dim();
        let blocks = (0..n)
            .map(|s| {
                let b: Vec<Complex64> = (0..layout.control_dim()).map(|k| amplitudes[k * n + s]).collect();
                b.iter().any(|a| *a != ZERO).then_some(b)
            })
            .collect();
        StateVector { layout, basis, blocks }
    }

    pub fn layout(&self) -> RegisterLayout {
        self.layout
    }

    pub fn basis(&self) -> TargetBasis {
        self.basis
    }

    /// Amplitude of `|k>|s>`.
    pub fn amplitude(&self, k: usize, s: usize) -> Complex64 {
        self.blocks[s].as_ref().map_or(ZERO, |b| b[k])
    }

    /// All amplitudes ordered by joint index `k * n + s`.
    pub fn to_joint(&self) -> Vec<Complex64> {
        let n = self.layout.target_dim();
        let mut out = vec![ZERO; self.layout.total_dim()];
        for (s, block) in self.blocks.iter().enumerate() {
            if let Some(b) = block {
                for (k, a) in b.iter().enumerate() {
                    out[k * n + s] = *a;
                }
            }
        }
        out
    }

    pub fn norm(&self) -> f64 {
        self.blocks.iter().flatten().flatten().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Control amplitudes of target component `s`, if any are nonzero.
    pub(crate) fn block(&self, s: usize) -> Option<&[Complex64]> {
        self.blocks[s].as_deref()
    }

    pub fn dump(&self) -> StateDump {
        StateDump {
            control_qubits: self.layout.control_qubits(),
            target_dim: self.layout.target_dim(),
            basis: self.basis,
            amplitudes: self.to_joint().iter().map(|a| [a.re, a.im]).collect(),
        }
    }

    pub fn from_dump(dump: &StateDump) -> Result<Self> {
        let layout = RegisterLayout::new(dump.control_qubits, dump.target_dim)?;
        let amps: Vec<Complex64> = dump.amplitudes.iter().map(|[re, im]| Complex64::new(*re, *im)).collect();
        Self::from_joint(layout, &amps, dump.basis)
    }

    /// Rewrites the target register in the eigenbasis of `eig`.
    pub fn into_eigenbasis(self, eig: &EigenSystem) -> Result<Self> {
        self.change_target_basis(eig, TargetBasis::Eigen)
    }

    /// Rewrites the target register in the grid basis.
    pub fn into_standard_basis(self, eig: &EigenSystem) -> Result<Self> {
        self.change_target_basis(eig, TargetBasis::Standard)
    }

    fn change_target_basis(self, eig: &EigenSystem, to: TargetBasis) -> Result<Self> {
        let n = self.layout.target_dim();
        if eig.n() != n {
            return Err(Error::InvalidArgument(format!("eigensystem has n = {}, state has n = {n}", eig.n())));
        }
        if self.basis == to {
            return Ok(self);
        }
        let psi = eig.eigenvectors();
        let dim = self.layout.control_dim();
        let mut out: Vec<Option<Vec<Complex64>>> = vec![None; n];
        for (t, slot) in out.iter_mut().enumerate() {
            let mut acc = vec![ZERO; dim];
            let mut any = false;
            for (s, block) in self.blocks.iter().enumerate() {
                let Some(b) = block else { continue };
                // standard -> eigen uses Psi^T, eigen -> standard uses Psi
                let w = match to {
                    TargetBasis::Eigen => psi[(s, t)],
                    TargetBasis::Standard => psi[(t, s)],
                };
                if w == 0.0 {
                    continue;
                }
                any = true;
                acc.iter_mut().zip(b).for_each(|(a, x)| *a += x * w);
            }
            if any {
                *slot = Some(acc);
            }
        }
        Ok(StateVector { layout: self.layout, basis: to, blocks: out })
    }

    /// Power query `W_l^p`: multiplies `|k>|psi_s>` by `exp(i p lambda_s / 2)`
    /// whenever control bit `l` of `k` is set.
    pub fn apply_power_query(mut self, l: usize, p: u64, eig: &EigenSystem) -> Result<Self> {
        if self.basis != TargetBasis::Eigen {
            return Err(Error::BasisMismatch);
        }
        if p == 0 {
            return Err(Error::InvalidArgument("query power must be at least 1".into()));
        }
        if eig.n() != self.layout.target_dim() {
            return Err(Error::InvalidArgument(format!(
                "eigensystem has n = {}, state has n = {}",
                eig.n(),
                self.layout.target_dim()
            )));
        }
        let mask = self.layout.control_bit_mask(l)?;
        for (s, block) in self.blocks.iter_mut().enumerate() {
            let Some(b) = block else { continue };
            let phase = Complex64::from_polar(1.0, 0.5 * p as f64 * eig.eigenvalues()[s]);
            for (k, a) in b.iter_mut().enumerate() {
                if k & mask != 0 {
                    *a *= phase;
                }
            }
        }
        Ok(self)
    }

    /// `H` on every control qubit.
    pub fn apply_hadamard_layer(mut self) -> Self {
        let dim = self.layout.control_dim();
        for b in self.blocks.iter_mut().flatten() {
            let mut half = 1;
            while half < dim {
                for start in (0..dim).step_by(2 * half) {
                    for i in start..start + half {
                        let (x, y) = (b[i], b[i + half]);
                        b[i] = (x + y) * FRAC_1_SQRT_2;
                        b[i + half] = (x - y) * FRAC_1_SQRT_2;
                    }
                }
                half <<= 1;
            }
        }
        self
    }

    /// Inverse QFT on control qubits `first..=last` (1-based, MSB first):
    /// `|j> -> 2^{-t/2} sum_k exp(-2 pi i j k / 2^t) |k>` on the sub-register.
    pub fn apply_inverse_qft(self, first: usize, last: usize) -> Result<Self> {
        self.apply_fourier(first, last, true)
    }

    pub fn apply_qft(self, first: usize, last: usize) -> Result<Self> {
        self.apply_fourier(first, last, false)
    }

    fn apply_fourier(mut self, first: usize, last: usize, inverse: bool) -> Result<Self> {
        let c = self.layout.control_qubits();
        UnitarySpec::Qft { first, last }.validate_for(&self.layout)?;
        let t = last - first + 1;
        let size = 1usize << t;
        let shift = c - last;
        let mask = (size - 1) << shift;
        let mut planner = FftPlanner::<f64>::new();
        // the inverse transform has the negative exponent, i.e. the FFT "forward" direction
        let fft = if inverse { planner.plan_fft_forward(size) } else { planner.plan_fft_inverse(size) };
        let scale = (size as f64).sqrt().recip();
        let mut buf = vec![ZERO; size];
        for b in self.blocks.iter_mut().flatten() {
            if size == b.len() {
                fft.process(b);
                b.iter_mut().for_each(|a| *a *= scale);
                continue;
            }
            for outer in (0..b.len()).filter(|k| k & mask == 0) {
                for (r, slot) in buf.iter_mut().enumerate() {
                    *slot = b[outer | (r << shift)];
                }
                fft.process(&mut buf);
                for (r, v) in buf.iter().enumerate() {
                    b[outer | (r << shift)] = v * scale;
                }
            }
        }
        Ok(self)
    }

    pub fn apply_unitary(mut self, spec: &UnitarySpec) -> Result<Self> {
        spec.validate_for(&self.layout)?;
        match spec {
            UnitarySpec::Identity => Ok(self),
            UnitarySpec::HadamardLayer => Ok(self.apply_hadamard_layer()),
            UnitarySpec::InverseQft { first, last } => self.apply_inverse_qft(*first, *last),
            UnitarySpec::Qft { first, last } => self.apply_qft(*first, *last),
            UnitarySpec::ControlDense(m) => {
                for b in self.blocks.iter_mut().flatten() {
                    let x = nalgebra::DVector::from_column_slice(b);
                    let y = m * x;
                    b.copy_from_slice(y.as_slice());
                }
                Ok(self)
            }
            UnitarySpec::FullDense(m) => {
                let x = nalgebra::DVector::from_vec(self.to_joint());
                let y = m * x;
                Ok(Self::from_joint_unchecked(self.layout, y.as_slice(), self.basis))
            }
        }
    }
}
