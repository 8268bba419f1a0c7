use nalgebra::DMatrix;
use num_complex::Complex64;

use super::basis::{BasisMode, BasisTag, OutcomeBasis};
use crate::error::{check_size, Result};
use crate::kernels::{DynamicsKernel, StochasticKernel};
use crate::space::Observable;

/// Common view over real and complex operators.
pub trait Operator {
    fn basis(&self) -> &BasisTag;
    fn dim(&self) -> usize;
    fn complex_entries(&self) -> DMatrix<Complex64>;

    /// `‖X − X†‖_F`.
    fn hermiticity_defect(&self) -> f64 {
        let x = self.complex_entries();
        (&x - x.adjoint()).norm()
    }

    /// `‖X†X − I‖_F`.
    fn unitarity_defect(&self) -> f64 {
        let x = self.complex_entries();
        let n = self.dim();
        (x.adjoint() * &x - DMatrix::identity(n, n)).norm()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OperatorRole {
    Transfer,
    Observable,
    Propagator,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OperatorMatrix {
    pub entries: DMatrix<f64>,
    pub basis: BasisTag,
    pub role: OperatorRole,
}

impl OperatorMatrix {
    pub fn new(entries: DMatrix<f64>, basis: BasisTag, role: OperatorRole) -> Self {
        Self { entries, basis, role }
    }

    /// `‖XᵀX − I‖_F`, the quantity reported for projected transfer and
    /// propagator matrices.
    pub fn orthogonality_defect(&self) -> f64 {
        let n = self.entries.nrows();
        (self.entries.transpose() * &self.entries - DMatrix::identity(n, n)).norm()
    }

    /// `‖X − I‖_F`.
    pub fn identity_defect(&self) -> f64 {
        let n = self.entries.nrows();
        (&self.entries - DMatrix::identity(n, n)).norm()
    }
}

impl Operator for OperatorMatrix {
    fn basis(&self) -> &BasisTag {
        &self.basis
    }

    fn dim(&self) -> usize {
        self.entries.nrows()
    }

    fn complex_entries(&self) -> DMatrix<Complex64> {
        self.entries.map(|v| Complex64::new(v, 0.0))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ComplexOperator {
    pub entries: DMatrix<Complex64>,
    pub basis: BasisTag,
    /// The unitary that produced this operator from a real one, if any.
    pub origin: Option<DMatrix<Complex64>>,
}

impl Operator for ComplexOperator {
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

/// `Φ K diag(weights) Φᵀ`, i.e. `Σ_{λ,λ'} φ_i(λ') K[λ'][λ] w(λ) φ_j(λ)`.
fn sandwich(basis: &OutcomeBasis, kernel: &DMatrix<f64>, weights: Option<&[f64]>) -> DMatrix<f64> {
    let phi = basis.phi();
    let mut right = phi.transpose();
    if let Some(w) = weights {
        for (l, mut row) in right.row_iter_mut().enumerate() {
            row *= w[l];
        }
    }
    phi * kernel * right
}

/// `T_ij = Σ_{λ,λ'} φ_i(λ') P(λ'|λ) φ_j(λ)`, so that `w = T v`.
pub fn build_transfer<K: StochasticKernel + ?Sized>(kernel: &K, basis: &OutcomeBasis) -> Result<OperatorMatrix> {
    check_size(basis.space_size(), kernel.size())?;
    Ok(OperatorMatrix::new(
        sandwich(basis, kernel.matrix(), None),
        basis.tag().clone(),
        OperatorRole::Transfer,
    ))
}

/// `A_ij = Σ_{λ,λ'} R(λ) φ_i(λ') P(λ'|λ) φ_j(λ)`.
pub fn build_observable_operator<K: StochasticKernel + ?Sized>(
    obs: &Observable,
    kernel: &K,
    basis: &OutcomeBasis,
) -> Result<OperatorMatrix> {
    check_size(basis.space_size(), kernel.size())?;
    check_size(basis.space_size(), obs.space_size())?;
    Ok(OperatorMatrix::new(
        sandwich(basis, kernel.matrix(), Some(obs.values())),
        basis.tag().clone(),
        OperatorRole::Observable,
    ))
}

#[derive(Debug, Clone, PartialEq)]
pub struct Propagator {
    pub operator: OperatorMatrix,
    /// `‖UᵀU − I‖_F`.
    pub unitarity_defect: f64,
    /// True when unitarity follows from construction (full basis, permutation dynamics).
    pub unitary_by_construction: bool,
}

/// `U_ij = Σ_{λ,λ'} φ_i(λ') P(λ'|λ, Δt) φ_j(λ)`.
///
/// Only full-basis propagators of permutation dynamics are guaranteed
/// orthogonal; otherwise the defect is measured and reported.
pub fn build_propagator(dynamics: &DynamicsKernel, basis: &OutcomeBasis) -> Result<Propagator> {
    check_size(basis.space_size(), dynamics.size())?;
    let operator = OperatorMatrix::new(
        sandwich(basis, dynamics.matrix(), None),
        basis.tag().clone(),
        OperatorRole::Propagator,
    );
    Ok(Propagator {
        unitarity_defect: operator.orthogonality_defect(),
        unitary_by_construction: basis.mode() == BasisMode::Full && dynamics.map().is_some(),
        operator,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct Commutator {
    pub matrix: DMatrix<Complex64>,
    pub frobenius_norm: f64,
}

/// `[X, Y] = XY − YX` for two operators in the same basis.
pub fn commutator<X: Operator + ?Sized, Y: Operator + ?Sized>(x: &X, y: &Y) -> Result<Commutator> {
    x.basis().ensure_same(y.basis())?;
    check_size(x.dim(), y.dim())?;
    let (a, b) = (x.complex_entries(), y.complex_entries());
    let matrix = &a * &b - &b * &a;
    Ok(Commutator {
        frobenius_norm: matrix.norm(),
        matrix,
    })
}
