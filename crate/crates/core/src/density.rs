//! Density matrices, the trace rule and von Neumann evolution.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{check_size, Error, Result};
use crate::operator::{
    eigensolve, BasisTag, ComplexOperator, EigenDecomposition, Operator, UNITARITY_TOL,
};
use crate::space::validate_probabilities;

/// `ρ = Σ_i p_i u_i u_i†` over an orthonormal eigenbasis.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    pub entries: DMatrix<Complex64>,
    pub basis: BasisTag,
}

/// Measured invariants of a density matrix.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DensityChecks {
    pub hermiticity_defect: f64,
    pub trace: f64,
    pub min_eigenvalue: f64,
    pub purity: f64,
}

impl DensityChecks {
    /// Hermitian and unit trace within `tol`, PSD down to `−tol`, purity at most `1 + tol`.
    pub fn valid(&self, tol: f64) -> bool {
        self.hermiticity_defect <= tol
            && (self.trace - 1.0).abs() <= tol
            && self.min_eigenvalue >= -tol
            && self.purity > 0.0
            && self.purity <= 1.0 + tol
    }
}

impl DensityMatrix {
    pub fn dim(&self) -> usize {
        self.entries.nrows()
    }

    pub fn trace(&self) -> f64 {
        self.entries.trace().re
    }

    /// `Tr(ρ²)`.
    pub fn purity(&self) -> f64 {
        (&self.entries * &self.entries).trace().re
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.dim()).map(|i| self.entries[(i, i)].re).collect()
    }

    /// Ascending eigenvalues of `ρ`.
    pub fn spectrum(&self) -> Result<Vec<f64>> {
        Ok(eigensolve(self)?.eigenvalues)
    }

    pub fn checks(&self) -> Result<DensityChecks> {
        let spectrum = self.spectrum()?;
        Ok(DensityChecks {
            hermiticity_defect: self.hermiticity_defect(),
            trace: self.trace(),
            min_eigenvalue: spectrum.first().copied().unwrap_or(0.0),
            purity: self.purity(),
        })
    }
}

impl Operator for DensityMatrix {
    fn basis(&self) -> &BasisTag {
        &self.basis
    }

    fn dim(&self) -> usize {
        self.entries.nrows()
    }

    fn complex_entries(&self) -> DMatrix<Complex64> {
        self.entries.clone()
    }
}

/// `ρ = Σ_i p_i u_i u_i†`, pairing `probs[i]` with the `i`-th (ascending) eigenvector.
pub fn build_density(eig: &EigenDecomposition, probs: &[f64]) -> Result<DensityMatrix> {
    if probs.len() != eig.dim() {
        return Err(Error::InvalidProbabilities(format!(
            "expected {} probabilities, got {}",
            eig.dim(),
            probs.len()
        )));
    }
    validate_probabilities(probs)?;
    let n = eig.dim();
    let mut entries = DMatrix::zeros(n, n);
    for (i, &p) in probs.iter().enumerate() {
        if p == 0.0 {
            continue;
        }
        let u = eig.eigenvector(i);
        entries += (&u * u.adjoint()) * Complex64::new(p, 0.0);
    }
    Ok(DensityMatrix {
        entries,
        basis: eig.basis.clone(),
    })
}

/// `Tr(ρ X)` as a complex number.
pub fn trace_product<X: Operator + ?Sized>(rho: &DensityMatrix, op: &X) -> Result<Complex64> {
    rho.basis.ensure_same(op.basis())?;
    check_size(rho.dim(), op.dim())?;
    let x = op.complex_entries();
    let mut total = Complex64::new(0.0, 0.0);
    for l in 0..rho.dim() {
        for m in 0..rho.dim() {
            total += rho.entries[(m, l)] * x[(l, m)];
        }
    }
    Ok(total)
}

/// Expectation by the trace rule, `⟨X⟩ = Re Tr(ρ X)`.
pub fn trace_expectation<X: Operator + ?Sized>(rho: &DensityMatrix, op: &X) -> Result<f64> {
    Ok(trace_product(rho, op)?.re)
}

/// `ρ ↦ U ρ U†`.
pub fn evolve_density<X: Operator + ?Sized>(rho: &DensityMatrix, u: &X) -> Result<DensityMatrix> {
    check_size(rho.dim(), u.dim())?;
    rho.basis.ensure_same(u.basis())?;
    let defect = u.unitarity_defect();
    if !(defect <= UNITARITY_TOL) {
        return Err(Error::NonUnitary(defect));
    }
    let u = u.complex_entries();
    Ok(DensityMatrix {
        entries: &u * &rho.entries * u.adjoint(),
        basis: rho.basis.clone(),
    })
}

/// Wraps a density matrix as a plain complex operator.
impl From<DensityMatrix> for ComplexOperator {
    fn from(rho: DensityMatrix) -> Self {
        ComplexOperator {
            entries: rho.entries,
            basis: rho.basis,
            origin: None,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernels::{apply_kernel, build_scrambling_kernel, identity_kernel, DynamicsKernel};
    use crate::operator::{build_basis, build_observable_operator, build_propagator, BasisMode, OperatorMatrix, OperatorRole};
    use crate::space::{classical_expectation, HiddenVariableSpace, KnowledgeState, Observable};

    fn diag_op(values: &[f64], tag: &str) -> OperatorMatrix {
        OperatorMatrix::new(
            DMatrix::from_diagonal(&nalgebra::DVector::from_column_slice(values)),
            BasisTag::new(tag),
            OperatorRole::Observable,
        )
    }

    #[test]
    fn density_from_diagonal_operator() {
        let op = diag_op(&[1.0, 2.0], "b");
        let eig = eigensolve(&op).unwrap();
        let rho = build_density(&eig, &[0.8, 0.2]).unwrap();
        assert!((rho.diagonal()[0] - 0.8).abs() < 1e-15);
        assert!((rho.diagonal()[1] - 0.2).abs() < 1e-15);
        assert!(rho.entries[(0, 1)].norm() < 1e-15);
        assert!(rho.checks().unwrap().valid(1e-12));

        let pure = build_density(&eig, &[1.0, 0.0]).unwrap();
        assert!((pure.purity() - 1.0).abs() < 1e-15);

        let mixed = build_density(&eig, &[0.5, 0.5]).unwrap();
        assert!((mixed.entries.clone() - DMatrix::identity(2, 2) * Complex64::new(0.5, 0.0)).norm() < 1e-15);

        assert!(build_density(&eig, &[0.9, 0.2]).is_err());
        assert!(build_density(&eig, &[1.0]).is_err());
    }

    #[test]
    fn maximally_mixed_from_rotated_eigenvectors() {
        let c = std::f64::consts::FRAC_1_SQRT_2;
        let op = OperatorMatrix::new(
            DMatrix::from_row_slice(2, 2, &[1.0, c, c, 1.0]),
            BasisTag::new("b"),
            OperatorRole::Observable,
        );
        let eig = eigensolve(&op).unwrap();
        let rho = build_density(&eig, &[0.5, 0.5]).unwrap();
        assert!((rho.entries.clone() - DMatrix::identity(2, 2) * Complex64::new(0.5, 0.0)).norm() < 1e-15);
        let e = trace_expectation(&rho, &op).unwrap();
        assert!((e - op.entries.trace() / 2.0).abs() < 1e-15);
    }

    #[test]
    fn trace_rule_sys3() {
        let a = Observable::new("A", vec![1.0, 1.0, 2.0]).unwrap();
        let basis = build_basis(&a, BasisMode::Outcome);
        let op = build_observable_operator(&a, &build_scrambling_kernel(&a), &basis).unwrap();
        let rho = build_density(&eigensolve(&op).unwrap(), &[0.8, 0.2]).unwrap();
        let e = trace_expectation(&rho, &op).unwrap();
        assert!((e - 1.2).abs() < 1e-15);
        let uniformized = KnowledgeState::new(vec![0.4, 0.4, 0.2]).unwrap();
        assert!((e - classical_expectation(&a, &uniformized).unwrap()).abs() < 1e-15);
    }

    #[test]
    fn trace_rule_sys4() {
        let a = Observable::new("A", vec![1.0, 1.0, -1.0, -1.0]).unwrap();
        let basis = build_basis(&a, BasisMode::Outcome);
        let op = build_observable_operator(&a, &identity_kernel(&HiddenVariableSpace::new(4).unwrap()), &basis).unwrap();
        // Outcomes ascend (-1, +1): P(+1) = 0.75.
        let rho = build_density(&eigensolve(&op).unwrap(), &[0.25, 0.75]).unwrap();
        assert!((trace_expectation(&rho, &op).unwrap() - 0.5).abs() < 1e-15);
    }

    #[test]
    fn basis_mismatch_is_rejected() {
        let rho = build_density(&eigensolve(&diag_op(&[1.0, 2.0], "x")).unwrap(), &[0.5, 0.5]).unwrap();
        assert!(matches!(trace_expectation(&rho, &diag_op(&[1.0, 2.0], "y")), Err(Error::BasisMismatch { .. })));
    }

    #[test]
    fn von_neumann_examples() {
        let space = HiddenVariableSpace::new(4).unwrap();
        let lambda = space.maximal_observable();
        let full = build_basis(&lambda, BasisMode::Full);
        let op = build_observable_operator(&lambda, &identity_kernel(&space), &full).unwrap();
        let state = KnowledgeState::new(vec![0.5, 0.25, 0.25, 0.0]).unwrap();
        let rho = build_density(&eigensolve(&op).unwrap(), state.probs()).unwrap();

        let still = build_propagator(&DynamicsKernel::permutation(vec![0, 1, 2, 3]).unwrap(), &full).unwrap();
        assert_eq!(evolve_density(&rho, &still.operator).unwrap(), rho);

        let shift = DynamicsKernel::cyclic_shift(4).unwrap();
        let u = build_propagator(&shift, &full).unwrap();
        let evolved = evolve_density(&rho, &u.operator).unwrap();
        assert_eq!(evolved.diagonal(), vec![0.0, 0.5, 0.25, 0.25]);
        assert_eq!(evolved.diagonal(), apply_kernel(&state, &shift).unwrap().probs());

        let not_unitary = diag_op(&[1.0, 1.0, 1.0, 0.5], "full:4");
        assert!(matches!(evolve_density(&rho, &not_unitary), Err(Error::NonUnitary(_))));
    }
}
