use std::f64::consts::PI;

use nalgebra::DMatrix;
use num_complex::Complex64;

use super::RegisterLayout;
use crate::error::{Error, Result};

/// Largest joint dimension for which full-space dense unitaries are allowed.
pub const FULL_DENSE_LIMIT: usize = 4096;

/// Unitarity tolerance for user-supplied matrices.
pub const UNITARITY_TOLERANCE: f64 = 1e-10;

/// A fixed (input-independent) unitary.
///
/// Qubit ranges are 1-based and inclusive, with qubit 1 the most
/// significant bit of the control index. Full-space matrices act on the
/// joint index `k * n + s` in whatever target basis the state is held.
#[derive(Debug, Clone, PartialEq)]
pub enum UnitarySpec {
    Identity,
    HadamardLayer,
    Qft { first: usize, last: usize },
    InverseQft { first: usize, last: usize },
    ControlDense(DMatrix<Complex64>),
    FullDense(DMatrix<Complex64>),
}

impl UnitarySpec {
    /// Inverse QFT over the whole control register of `c` qubits.
    pub fn inverse_qft(c: usize) -> Self {
        UnitarySpec::InverseQft { first: 1, last: c }
    }

    pub fn control_dense(m: DMatrix<Complex64>) -> Result<Self> {
        check_unitary(&m)?;
        if !m.nrows().is_power_of_two() {
            return Err(Error::InvalidArgument(format!("control matrix dimension {} is not a power of two", m.nrows())));
        }
        Ok(UnitarySpec::ControlDense(m))
    }

    pub fn full_dense(m: DMatrix<Complex64>) -> Result<Self> {
        check_unitary(&m)?;
        if m.nrows() > FULL_DENSE_LIMIT {
            return Err(Error::DimensionLimit { requested: m.nrows(), limit: FULL_DENSE_LIMIT });
        }
        Ok(UnitarySpec::FullDense(m))
    }

    /// Pauli-X on control qubit `qubit` (1-based, MSB first) as a dense
    /// control-register matrix.
    pub fn pauli_x(c: usize, qubit: usize) -> Result<Self> {
        if qubit == 0 || qubit > c {
            return Err(Error::InvalidArgument(format!("qubit {qubit} outside 1..={c}")));
        }
        let dim = 1usize << c;
        let bit = 1usize << (c - qubit);
        let m = DMatrix::from_fn(dim, dim, |i, j| if i == j ^ bit { Complex64::new(1.0, 0.0) } else { Complex64::new(0.0, 0.0) });
        Ok(UnitarySpec::ControlDense(m))
    }

    pub fn adjoint(&self) -> Self {
        match self {
            UnitarySpec::Identity => UnitarySpec::Identity,
            UnitarySpec::HadamardLayer => UnitarySpec::HadamardLayer,
            UnitarySpec::Qft { first, last } => UnitarySpec::InverseQft { first: *first, last: *last },
            UnitarySpec::InverseQft { first, last } => UnitarySpec::Qft { first: *first, last: *last },
            UnitarySpec::ControlDense(m) => UnitarySpec::ControlDense(m.adjoint()),
            UnitarySpec::FullDense(m) => UnitarySpec::FullDense(m.adjoint()),
        }
    }

    pub fn is_identity(&self) -> bool {
        matches!(self, UnitarySpec::Identity)
    }

    /// Checks that this unitary fits the register layout.
    pub fn validate_for(&self, layout: &RegisterLayout) -> Result<()> {
        let c = layout.control_qubits();
        match self {
            UnitarySpec::Identity | UnitarySpec::HadamardLayer => Ok(()),
            UnitarySpec::Qft { first, last } | UnitarySpec::InverseQft { first, last } => {
                if *first == 0 || first > last || *last > c {
                    Err(Error::InvalidArgument(format!("qubit range {first}..={last} outside the {c}-qubit control register")))
                } else {
                    Ok(())
                }
            }
            UnitarySpec::ControlDense(m) => {
                if m.nrows() != layout.control_dim() {
                    Err(Error::InvalidArgument(format!(
                        "control matrix is {}x{} but the control register has dimension {}",
                        m.nrows(),
                        m.ncols(),
                        layout.control_dim()
                    )))
                } else {
                    Ok(())
                }
            }
            UnitarySpec::FullDense(m) => {
                if layout.total_dim() > FULL_DENSE_LIMIT {
                    Err(Error::DimensionLimit { requested: layout.total_dim(), limit: FULL_DENSE_LIMIT })
                } else if m.nrows() != layout.total_dim() {
                    Err(Error::InvalidArgument(format!(
                        "full-space matrix is {}x{} but the joint dimension is {}",
                        m.nrows(),
                        m.ncols(),
                        layout.total_dim()
                    )))
                } else {
                    Ok(())
                }
            }
        }
    }

    /// Dense `2^c x 2^c` matrix of a control-register unitary, built entry by
    /// entry from its definition. `None` for full-space matrices.
    pub fn control_matrix(&self, c: usize) -> Option<DMatrix<Complex64>> {
        let dim = 1usize << c;
        let zero = Complex64::new(0.0, 0.0);
        match self {
            UnitarySpec::Identity => Some(DMatrix::identity(dim, dim)),
            UnitarySpec::HadamardLayer => {
                let amp = (dim as f64).sqrt().recip();
                Some(DMatrix::from_fn(dim, dim, |i, j| {
                    let sign = if (i & j).count_ones() % 2 == 0 { 1.0 } else { -1.0 };
                    Complex64::new(sign * amp, 0.0)
                }))
            }
            UnitarySpec::Qft { first, last } | UnitarySpec::InverseQft { first, last } => {
                let sign = if matches!(self, UnitarySpec::Qft { .. }) { 1.0 } else { -1.0 };
                let t = last - first + 1;
                let shift = c - last;
                let mask = ((1usize << t) - 1) << shift;
                let size = (1usize << t) as f64;
                Some(DMatrix::from_fn(dim, dim, |out, inp| {
                    if out & !mask != inp & !mask {
                        return zero;
                    }
                    let (ro, ri) = ((out & mask) >> shift, (inp & mask) >> shift);
                    let angle = sign * 2.0 * PI * ((ro * ri) as f64) / size;
                    Complex64::from_polar(size.sqrt().recip(), angle)
                }))
            }
            UnitarySpec::ControlDense(m) => Some(m.clone()),
            UnitarySpec::FullDense(_) => None,
        }
    }
}

/// `max |U^dagger U - I|`.
pub fn unitarity_deviation(m: &DMatrix<Complex64>) -> f64 {
    let gram = m.adjoint() * m;
    let mut dev = 0.0f64;
    for i in 0..gram.nrows() {
        for j in 0..gram.ncols() {
            let target = if i == j { 1.0 } else { 0.0 };
            dev = dev.max((gram[(i, j)] - Complex64::new(target, 0.0)).norm());
        }
    }
    dev
}

fn check_unitary(m: &DMatrix<Complex64>) -> Result<()> {
    if m.nrows() != m.ncols() || m.nrows() == 0 {
        return Err(Error::InvalidArgument(format!("matrix must be square, got {}x{}", m.nrows(), m.ncols())));
    }
    let deviation = unitarity_deviation(m);
    if deviation > UNITARITY_TOLERANCE {
        return Err(Error::NotUnitary { deviation });
    }
    Ok(())
}
