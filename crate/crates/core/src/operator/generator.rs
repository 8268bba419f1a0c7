use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use super::basis::BasisTag;
use super::eigen::diagonalize_unitary;
use super::matrices::Operator;
use crate::error::{Error, Result};

/// Largest accepted `‖U†U − I‖_F` for unitary inputs.
pub const UNITARITY_TOL: f64 = 1e-10;

/// Hermitian `H` with `U = exp(−i H Δt)` (ħ = 1).
#[derive(Debug, Clone, PartialEq)]
pub struct Generator {
    pub hamiltonian: DMatrix<Complex64>,
    pub dt: f64,
    /// Eigenphases of `U` in `(−π, π]`, in the order the diagonalization returned them.
    pub eigenphases: Vec<f64>,
    pub basis: BasisTag,
}

impl Generator {
    /// `exp(−i H Δt)` by scaling and squaring, independent of the
    /// diagonalization used to build `H`.
    pub fn propagator(&self) -> DMatrix<Complex64> {
        (&self.hamiltonian * Complex64::new(0.0, -self.dt)).exp()
    }

    /// `‖exp(−i H Δt) − U‖_F`.
    pub fn round_trip_error<X: Operator + ?Sized>(&self, u: &X) -> f64 {
        (self.propagator() - u.complex_entries()).norm()
    }

    pub fn hermiticity_defect(&self) -> f64 {
        (&self.hamiltonian - self.hamiltonian.adjoint()).norm()
    }
}

/// Maps an angle from `atan2`'s `[−π, π]` into `(−π, π]`, treating angles
/// within `1e-9` of `−π` as sitting on the branch cut.
fn principal_phase(z: Complex64) -> f64 {
    let theta = z.arg();
    if theta <= -PI + 1e-9 {
        theta + 2.0 * PI
    } else {
        theta
    }
}

/// `H = (i/Δt) log U`, with the logarithm taken on the principal branch of
/// each eigenphase.
pub fn extract_generator<X: Operator + ?Sized>(u: &X, dt: f64) -> Result<Generator> {
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(Error::InvalidArgument(format!("dt must be positive, got {dt}")));
    }
    let defect = u.unitarity_defect();
    if !(defect <= UNITARITY_TOL) {
        return Err(Error::NonUnitary(defect));
    }
    let (q, values) = diagonalize_unitary(&u.complex_entries());
    let eigenphases: Vec<f64> = values.iter().map(|&z| principal_phase(z)).collect();
    // e^{iθ} = e^{−i h Δt}  ⇒  h = −θ/Δt
    let energies = DVector::from_iterator(
        eigenphases.len(),
        eigenphases.iter().map(|&theta| Complex64::new(-theta / dt, 0.0)),
    );
    let hamiltonian = &q * DMatrix::from_diagonal(&energies) * q.adjoint();
    Ok(Generator {
        hamiltonian,
        dt,
        eigenphases,
        basis: u.basis().clone(),
    })
}
