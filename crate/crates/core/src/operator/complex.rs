use std::f64::consts::PI;

use nalgebra::DMatrix;
use num_complex::Complex64;

use super::matrices::{ComplexOperator, Operator};
use crate::error::{check_size, Error, Result};

/// Largest accepted `‖ΨΨ† − I‖_F` for a basis change.
pub const BASIS_UNITARITY_TOL: f64 = 1e-10;

/// A unitary change of basis `Ψ`, applied as `X ↦ Ψ X Ψ†`.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexBasisChange {
    matrix: DMatrix<Complex64>,
    label: String,
}

impl ComplexBasisChange {
    pub fn new(matrix: DMatrix<Complex64>, label: impl Into<String>) -> Result<Self> {
        if !matrix.is_square() {
            return Err(Error::InvalidBasis(f64::INFINITY));
        }
        let n = matrix.nrows();
        let defect = (&matrix * matrix.adjoint() - DMatrix::identity(n, n)).norm();
        if !(defect <= BASIS_UNITARITY_TOL) {
            return Err(Error::InvalidBasis(defect));
        }
        Ok(Self {
            matrix,
            label: label.into(),
        })
    }

    /// `F[j][k] = exp(−2πi·jk/N) / √N`.
    pub fn fourier(n: usize) -> Self {
        let scale = 1.0 / (n as f64).sqrt();
        let matrix = DMatrix::from_fn(n, n, |j, k| {
            // Reduce jk mod N first so the angle stays small and exact.
            let angle = -2.0 * PI * ((j * k) % n) as f64 / n as f64;
            Complex64::from_polar(scale, angle)
        });
        Self {
            matrix,
            label: "fourier".into(),
        }
    }

    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.matrix
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }
}

/// Re-expresses an operator in the rotated basis: `X = Ψ op Ψ†`.
pub fn to_complex<X: Operator + ?Sized>(op: &X, psi: &ComplexBasisChange) -> Result<ComplexOperator> {
    check_size(op.dim(), psi.dim())?;
    let entries = psi.matrix() * op.complex_entries() * psi.matrix().adjoint();
    Ok(ComplexOperator {
        entries,
        basis: op.basis().rotated(psi.label()),
        origin: Some(psi.matrix().clone()),
    })
}
