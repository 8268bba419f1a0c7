use std::fmt;

use nalgebra::{DMatrix, DVector};

use crate::error::{check_size, Error, Result};
use crate::space::{validate_probabilities, KnowledgeState, Observable, NORMALIZATION_TOL};

/// Identifies the basis an operator is expressed in.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct BasisTag(String);

impl BasisTag {
    pub fn new(label: impl Into<String>) -> Self {
        Self(label.into())
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }

    /// Tag of the basis obtained by rotating this one with a named unitary.
    pub fn rotated(&self, by: &str) -> Self {
        Self(format!("{by}({})", self.0))
    }

    pub(crate) fn ensure_same(&self, other: &BasisTag) -> Result<()> {
        if self == other {
            Ok(())
        } else {
            Err(Error::BasisMismatch {
                left: self.0.clone(),
                right: other.0.clone(),
            })
        }
    }
}

impl fmt::Display for BasisTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BasisMode {
    /// One normalized class indicator per outcome of the observable.
    Outcome,
    /// One indicator per internal state (the maximal observable `R(λ) = λ`).
    Full,
}

/// Orthonormal basis `φ_i(λ) = δ(R(λ), a_i) / √Ω(a_i)`, stored row-wise.
#[derive(Debug, Clone, PartialEq)]
pub struct OutcomeBasis {
    observable: Observable,
    mode: BasisMode,
    phi: DMatrix<f64>,
    tag: BasisTag,
}

impl OutcomeBasis {
    pub fn observable(&self) -> &Observable {
        &self.observable
    }

    pub fn mode(&self) -> BasisMode {
        self.mode
    }

    /// `phi()[(i, λ)] = φ_i(λ)`.
    pub fn phi(&self) -> &DMatrix<f64> {
        &self.phi
    }

    pub fn tag(&self) -> &BasisTag {
        &self.tag
    }

    pub fn dim(&self) -> usize {
        self.phi.nrows()
    }

    pub fn space_size(&self) -> usize {
        self.phi.ncols()
    }

    /// `‖Φ Φᵀ − I‖_F`.
    pub fn orthonormality_defect(&self) -> f64 {
        (&self.phi * self.phi.transpose() - DMatrix::identity(self.dim(), self.dim())).norm()
    }
}

pub fn build_basis(obs: &Observable, mode: BasisMode) -> OutcomeBasis {
    let (observable, tag) = match mode {
        BasisMode::Outcome => (obs.clone(), BasisTag::new(format!("outcome:{}", obs.name()))),
        BasisMode::Full => {
            let maximal = Observable::new("lambda", (0..obs.space_size()).map(|l| l as f64).collect())
                .expect("index values are finite");
            (maximal, BasisTag::new(format!("full:{}", obs.space_size())))
        }
    };
    let phi = DMatrix::from_fn(observable.num_outcomes(), observable.space_size(), |i, l| {
        if observable.class_of(l) == i {
            1.0 / (observable.multiplicity(i) as f64).sqrt()
        } else {
            0.0
        }
    });
    OutcomeBasis {
        observable,
        mode,
        phi,
        tag,
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BasisCoefficients {
    pub coeffs: Vec<f64>,
    /// L1 gap between the state and its reconstruction from `coeffs`.
    pub residual: f64,
}

/// Inner products `v_i = Σ_λ φ_i(λ) P(λ|S)` plus the reconstruction gap.
pub fn project_state(state: &KnowledgeState, basis: &OutcomeBasis) -> Result<BasisCoefficients> {
    check_size(basis.space_size(), state.size())?;
    let s = DVector::from_column_slice(state.probs());
    let coeffs = basis.phi() * &s;
    let rebuilt = basis.phi().transpose() * &coeffs;
    let residual = (s - rebuilt).iter().map(|d| d.abs()).sum();
    Ok(BasisCoefficients {
        coeffs: coeffs.iter().copied().collect(),
        residual,
    })
}

/// `P(λ) = Σ_i v_i φ_i(λ)`; the coefficients must describe a probability vector.
pub fn lift_coefficients(coeffs: &[f64], basis: &OutcomeBasis) -> Result<KnowledgeState> {
    check_size(basis.dim(), coeffs.len())?;
    if let Some(i) = coeffs.iter().position(|c| !c.is_finite() || *c < 0.0) {
        return Err(Error::InvalidCoefficients(format!(
            "coefficient {i} = {} is negative or not finite",
            coeffs[i]
        )));
    }
    let mass: f64 = coeffs
        .iter()
        .enumerate()
        .map(|(i, c)| c * (basis.observable().multiplicity(i) as f64).sqrt())
        .sum();
    if (mass - 1.0).abs() > NORMALIZATION_TOL {
        return Err(Error::InvalidCoefficients(format!(
            "lifted state has total mass {mass}, expected 1"
        )));
    }
    let probs: Vec<f64> = (basis.phi().transpose() * DVector::from_column_slice(coeffs))
        .iter()
        .copied()
        .collect();
    validate_probabilities(&probs).map_err(|e| Error::InvalidCoefficients(e.to_string()))?;
    KnowledgeState::new(probs).map_err(|e| Error::InvalidCoefficients(e.to_string()))
}
