//! Matrix representation of states, kernels and observables in the
//! outcome basis, plus spectral tools on the resulting operators.

mod basis;
mod complex;
mod eigen;
mod generator;
mod matrices;

pub use basis::{
    build_basis, lift_coefficients, project_state, BasisCoefficients, BasisMode, BasisTag,
    OutcomeBasis,
};
pub use complex::{to_complex, ComplexBasisChange, BASIS_UNITARITY_TOL};
pub use eigen::{diagonalize_unitary, eigensolve, EigenDecomposition, DEGENERACY_GAP, HERMITIAN_TOL};
pub use generator::{extract_generator, Generator, UNITARITY_TOL};
pub use matrices::{
    build_observable_operator, build_propagator, build_transfer, commutator, Commutator,
    ComplexOperator, Operator, OperatorMatrix, OperatorRole, Propagator,
};
