//! Quantum-style operator formalism reconstructed from classical
//! probability over finite hidden-variable spaces.
//!
//! A system has internal states `λ ∈ 0..M` that are disturbed when measured.
//! Knowledge about the system is a probability vector over `λ`; a
//! measurement acts on it through a column-stochastic kernel. From those
//! ingredients this crate builds:
//!
//! - the orthonormal outcome basis and the transfer, observable and
//!   propagator matrices ([`operator`]),
//! - density matrices with the trace rule and unitary evolution ([`density`]),
//! - two-party models with detector settings and the CHSH test ([`bell`]),
//! - loop-only reference implementations for cross-checking ([`oracle`]).
//!
//! ```
//! use fragile_core::prelude::*;
//!
//! let a = Observable::new("A", vec![1.0, 1.0, 2.0])?;
//! let kernel = build_scrambling_kernel(&a);
//! let basis = build_basis(&a, BasisMode::Outcome);
//! let op = build_observable_operator(&a, &kernel, &basis)?;
//! let eig = eigensolve(&op)?;
//! assert!((eig.eigenvalues[0] - 1.0).abs() < 1e-12);
//! assert!((eig.eigenvalues[1] - 2.0).abs() < 1e-12);
//! # Ok::<(), fragile_core::Error>(())
//! ```

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bell;
pub mod density;
mod error;
pub mod kernels;
pub mod operator;
pub mod oracle;
pub mod random;
pub mod space;

pub use error::{Error, Result};

pub mod prelude {
    pub use crate::bell::{
        chsh, chsh_scan, correlation, local_strategy_oracle, singlet_model, AngleGrid,
        BipartiteModel, ChshResult, ChshSettings, LocalModel, SingletModel, Spin,
    };
    pub use crate::density::{
        build_density, evolve_density, trace_expectation, trace_product, DensityMatrix,
    };
    pub use crate::kernels::{
        apply_kernel, build_birkhoff_kernel, build_scrambling_kernel, check_fixed_points,
        identity_kernel, sequential_joint, DynamicsKernel, FixedPointReport, JointDistribution,
        KernelKind, MeasurementKernel, Protocol, StochasticKernel,
    };
    pub use crate::operator::{
        build_basis, build_observable_operator, build_propagator, build_transfer, commutator,
        eigensolve, extract_generator, lift_coefficients, project_state, to_complex, BasisMode,
        BasisTag, ComplexBasisChange, ComplexOperator, EigenDecomposition, Generator, Operator,
        OperatorMatrix, OutcomeBasis,
    };
    pub use crate::space::{
        bayes_posterior, class_posterior, classical_expectation, outcome_distribution,
        uniform_prior, HiddenVariableSpace, KnowledgeState, Observable, OutcomeDistribution,
    };
    pub use crate::Error;
}
