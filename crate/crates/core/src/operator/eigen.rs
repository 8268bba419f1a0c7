//! Spectral decompositions for Hermitian and unitary operators.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use super::basis::BasisTag;
use super::matrices::Operator;
use crate::error::{Error, Result};

/// Inputs whose `‖X − X†‖_F` exceeds this are rejected by [`eigensolve`].
pub const HERMITIAN_TOL: f64 = 1e-10;

/// Consecutive eigenvalues closer than this share a degeneracy group.
pub const DEGENERACY_GAP: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub struct EigenDecomposition {
    /// Ascending.
    pub eigenvalues: Vec<f64>,
    /// Column `i` is the unit eigenvector for `eigenvalues[i]`.
    pub eigenvectors: DMatrix<Complex64>,
    /// Index groups of (near-)degenerate eigenvalues.
    pub groups: Vec<Vec<usize>>,
    pub basis: BasisTag,
}

impl EigenDecomposition {
    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn eigenvector(&self, i: usize) -> DVector<Complex64> {
        self.eigenvectors.column(i).into_owned()
    }

    /// `‖X u_i − a_i u_i‖₂` for each pair.
    pub fn residuals<X: Operator + ?Sized>(&self, op: &X) -> Vec<f64> {
        let x = op.complex_entries();
        (0..self.dim())
            .map(|i| {
                let u = self.eigenvector(i);
                (&x * &u - &u * Complex64::new(self.eigenvalues[i], 0.0)).norm()
            })
            .collect()
    }

    /// Spectral projector `Σ_{i∈group} u_i u_i†`, the basis-independent object
    /// to compare when eigenvalues are degenerate.
    pub fn projector(&self, group: usize) -> DMatrix<Complex64> {
        let n = self.dim();
        let mut p = DMatrix::zeros(n, n);
        for &i in &self.groups[group] {
            let u = self.eigenvector(i);
            p += &u * u.adjoint();
        }
        p
    }

    /// `‖U†U − I‖_F` for the eigenvector matrix.
    pub fn orthonormality_defect(&self) -> f64 {
        let n = self.dim();
        (self.eigenvectors.adjoint() * &self.eigenvectors - DMatrix::identity(n, n)).norm()
    }
}

/// Eigen-decomposition of a symmetric or Hermitian operator.
pub fn eigensolve<X: Operator + ?Sized>(op: &X) -> Result<EigenDecomposition> {
    let x = op.complex_entries();
    let defect = (&x - x.adjoint()).norm();
    if !(defect <= HERMITIAN_TOL) {
        return Err(Error::Asymmetric(defect));
    }
    let hermitian = (&x + x.adjoint()) * Complex64::new(0.5, 0.0);
    let (values, vectors) = if hermitian.iter().all(|z| z.im == 0.0) {
        let eig = hermitian.map(|z| z.re).symmetric_eigen();
        (eig.eigenvalues, eig.eigenvectors.map(|v| Complex64::new(v, 0.0)))
    } else {
        let eig = hermitian.symmetric_eigen();
        (eig.eigenvalues, eig.eigenvectors)
    };
    let (eigenvalues, eigenvectors) = sort_ascending(&values, &vectors);
    let groups = group_degenerate(&eigenvalues, DEGENERACY_GAP);
    Ok(EigenDecomposition {
        eigenvalues,
        eigenvectors,
        groups,
        basis: op.basis().clone(),
    })
}

fn sort_ascending(values: &DVector<f64>, vectors: &DMatrix<Complex64>) -> (Vec<f64>, DMatrix<Complex64>) {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let sorted_values = order.iter().map(|&i| values[i]).collect();
    let columns: Vec<_> = order.iter().map(|&i| vectors.column(i).into_owned()).collect();
    (sorted_values, DMatrix::from_columns(&columns))
}

pub(crate) fn group_degenerate(sorted: &[f64], gap: f64) -> Vec<Vec<usize>> {
    let mut groups: Vec<Vec<usize>> = Vec::new();
    for (i, &v) in sorted.iter().enumerate() {
        match groups.last_mut() {
            Some(group) if v - sorted[*group.last().unwrap()] < gap => group.push(i),
            _ => groups.push(vec![i]),
        }
    }
    groups
}

/// Mixing coefficients for the Hermitian pencil used by [`diagonalize_unitary`].
/// Irrational-looking values keep distinct eigenphases from colliding.
const PENCIL_MIX: [f64; 5] = [
    0.577_215_664_901_532_9,
    1.324_717_957_244_746,
    0.236_067_977_499_789_7,
    std::f64::consts::E,
    0.414_213_562_373_095_1,
];

/// Eigenvalues of the pencil closer than this are re-split recursively.
const PENCIL_CLUSTER: f64 = 1e-2;

/// Unitary diagonalization `U = Q diag(z) Q†` of a unitary (normal) matrix.
///
/// The real and imaginary parts `(U + U†)/2` and `(U − U†)/2i` are commuting
/// Hermitian matrices; an eigenbasis of `Re + c·Im` diagonalizes `U` unless
/// two eigenphases collide under the mix, in which case each cluster is
/// re-diagonalized with the next coefficient.
pub fn diagonalize_unitary(u: &DMatrix<Complex64>) -> (DMatrix<Complex64>, Vec<Complex64>) {
    let q = diagonalize_normal(u, 0);
    let d = q.adjoint() * u * &q;
    let values = (0..u.nrows()).map(|i| d[(i, i)]).collect();
    (q, values)
}

fn diagonalize_normal(u: &DMatrix<Complex64>, depth: usize) -> DMatrix<Complex64> {
    let half = Complex64::new(0.5, 0.0);
    let mix = PENCIL_MIX[depth % PENCIL_MIX.len()];
    let ud = u.adjoint();
    let pencil = (u + &ud) * half + (u - &ud) * Complex64::new(0.0, -0.5 * mix);
    let pencil = (&pencil + pencil.adjoint()) * half;
    let eig = pencil.symmetric_eigen();
    let (values, mut q) = sort_ascending(&eig.eigenvalues, &eig.eigenvectors);

    if depth >= 3 * PENCIL_MIX.len() {
        return q;
    }
    for cluster in group_degenerate(&values, PENCIL_CLUSTER) {
        if cluster.len() < 2 {
            continue;
        }
        let cols: Vec<_> = cluster.iter().map(|&i| q.column(i).into_owned()).collect();
        let qc = DMatrix::from_columns(&cols);
        let block = qc.adjoint() * u * &qc;
        let k = cluster.len();
        let mean = block.trace() / Complex64::new(k as f64, 0.0);
        if (&block - DMatrix::identity(k, k) * mean).norm() <= 1e-13 {
            continue;
        }
        let refined = &qc * diagonalize_normal(&block, depth + 1);
        for (j, &i) in cluster.iter().enumerate() {
            q.set_column(i, &refined.column(j));
        }
    }
    q
}
