//! Finite hidden-variable spaces, observables and states of knowledge.
//!
//! Internal states are indexed `0..M`. Every integral over internal states
//! becomes a sum over this index set, and outcome identity is exact equality
//! of the stored observable values.

use std::collections::HashSet;

use crate::error::{check_size, Error, Result};

/// Tolerance on `sum(p) == 1` accepted when constructing probability vectors.
pub const NORMALIZATION_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct HiddenVariableSpace {
    size: usize,
    labels: Option<Vec<String>>,
}

impl HiddenVariableSpace {
    pub fn new(size: usize) -> Result<Self> {
        if size < 2 {
            return Err(Error::TrivialSpace(size));
        }
        Ok(Self { size, labels: None })
    }

    pub fn with_labels(labels: Vec<String>) -> Result<Self> {
        let mut space = Self::new(labels.len())?;
        let mut seen = HashSet::new();
        for label in &labels {
            if !seen.insert(label.as_str()) {
                return Err(Error::Labels(format!("duplicate label {label:?}")));
            }
        }
        space.labels = Some(labels);
        Ok(space)
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn labels(&self) -> Option<&[String]> {
        self.labels.as_deref()
    }

    /// Builds an observable on this space, checking the value count.
    pub fn observable(&self, name: impl Into<String>, values: Vec<f64>) -> Result<Observable> {
        check_size(self.size, values.len())?;
        Observable::new(name, values)
    }

    /// The maximal observable `R(λ) = λ`, whose outcome classes are singletons.
    pub fn maximal_observable(&self) -> Observable {
        Observable::new("lambda", (0..self.size).map(|i| i as f64).collect())
            .expect("index values are finite and distinct")
    }
}

/// A real-valued response function `R(λ)` with finitely many outcomes.
///
/// Outcomes are sorted ascending; every matrix built from an observable is
/// indexed in that order.
#[derive(Debug, Clone, PartialEq)]
pub struct Observable {
    name: String,
    values: Vec<f64>,
    outcomes: Vec<f64>,
    class_of: Vec<usize>,
    classes: Vec<Vec<usize>>,
}

impl Observable {
    pub fn new(name: impl Into<String>, values: Vec<f64>) -> Result<Self> {
        let name = name.into();
        if values.len() < 2 {
            return Err(Error::TrivialSpace(values.len()));
        }
        if let Some(index) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFiniteValue { name, index });
        }
        let mut outcomes = values.clone();
        outcomes.sort_by(f64::total_cmp);
        outcomes.dedup_by(|a, b| a == b);

        let class_of: Vec<usize> = values
            .iter()
            .map(|v| outcomes.iter().position(|a| a == v).unwrap())
            .collect();
        let mut classes = vec![Vec::new(); outcomes.len()];
        for (lambda, &k) in class_of.iter().enumerate() {
            classes[k].push(lambda);
        }
        Ok(Self {
            name,
            values,
            outcomes,
            class_of,
            classes,
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    /// Number of internal states `M`.
    pub fn space_size(&self) -> usize {
        self.values.len()
    }

    /// `values()[λ] = R(λ)`.
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn outcomes(&self) -> &[f64] {
        &self.outcomes
    }

    pub fn num_outcomes(&self) -> usize {
        self.outcomes.len()
    }

    /// Outcome-class index of internal state `lambda`.
    pub fn class_of(&self, lambda: usize) -> usize {
        self.class_of[lambda]
    }

    pub fn classes(&self) -> &[Vec<usize>] {
        &self.classes
    }

    /// Multiplicity `Ω(a_k) = |C_k|`.
    pub fn multiplicity(&self, k: usize) -> usize {
        self.classes[k].len()
    }

    pub fn multiplicities(&self) -> Vec<usize> {
        self.classes.iter().map(Vec::len).collect()
    }

    /// Index of `outcome` in [`Self::outcomes`], compared exactly.
    pub fn outcome_index(&self, outcome: f64) -> Result<usize> {
        self.outcomes
            .iter()
            .position(|&a| a == outcome)
            .ok_or(Error::UnknownOutcome(outcome))
    }

    /// True when `state` is uniform inside every outcome class.
    pub fn is_class_uniform(&self, state: &KnowledgeState, tol: f64) -> bool {
        self.classes.iter().all(|class| {
            let first = state.probs()[class[0]];
            class.iter().all(|&l| (state.probs()[l] - first).abs() <= tol)
        })
    }
}

/// A probability vector `P(λ|S)` over internal states.
#[derive(Debug, Clone, PartialEq)]
pub struct KnowledgeState {
    probs: Vec<f64>,
}

impl KnowledgeState {
    /// Validates non-negativity and normalization; never renormalizes.
    pub fn new(probs: Vec<f64>) -> Result<Self> {
        if probs.len() < 2 {
            return Err(Error::TrivialSpace(probs.len()));
        }
        validate_probabilities(&probs)?;
        Ok(Self { probs })
    }

    /// Point mass at `lambda`. Permitted as an input even though no fragile
    /// measurement can prepare it.
    pub fn delta(size: usize, lambda: usize) -> Result<Self> {
        if lambda >= size {
            return Err(Error::InvalidArgument(format!(
                "index {lambda} outside space of size {size}"
            )));
        }
        let mut probs = vec![0.0; size];
        probs[lambda] = 1.0;
        Self::new(probs)
    }

    pub(crate) fn from_raw(probs: Vec<f64>) -> Self {
        debug_assert!(validate_probabilities(&probs).is_ok());
        Self { probs }
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn size(&self) -> usize {
        self.probs.len()
    }

    /// True when all mass sits on a single internal state.
    pub fn is_sharp(&self) -> bool {
        self.probs.contains(&1.0)
    }

    /// L1 distance to another state of the same size.
    pub fn l1_distance(&self, other: &KnowledgeState) -> Result<f64> {
        check_size(self.size(), other.size())?;
        Ok(self
            .probs
            .iter()
            .zip(&other.probs)
            .map(|(a, b)| (a - b).abs())
            .sum())
    }
}

/// `P(a_k|S)` for each outcome of an observable, in ascending outcome order.
#[derive(Debug, Clone, PartialEq)]
pub struct OutcomeDistribution {
    observable: String,
    outcomes: Vec<f64>,
    probs: Vec<f64>,
}

impl OutcomeDistribution {
    pub fn observable(&self) -> &str {
        &self.observable
    }

    pub fn outcomes(&self) -> &[f64] {
        &self.outcomes
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    /// Probability of an outcome value, or an error if it is not realized.
    pub fn prob_of(&self, outcome: f64) -> Result<f64> {
        self.outcomes
            .iter()
            .position(|&a| a == outcome)
            .map(|k| self.probs[k])
            .ok_or(Error::UnknownOutcome(outcome))
    }
}

pub(crate) fn validate_probabilities(probs: &[f64]) -> Result<()> {
    if let Some(i) = probs.iter().position(|p| !p.is_finite() || *p < 0.0) {
        return Err(Error::InvalidProbabilities(format!(
            "entry {i} = {} is negative or not finite",
            probs[i]
        )));
    }
    let total: f64 = probs.iter().sum();
    if (total - 1.0).abs() > NORMALIZATION_TOL {
        return Err(Error::InvalidProbabilities(format!(
            "entries sum to {total}, expected 1"
        )));
    }
    Ok(())
}

/// Flat prior `P(λ|I₀) = 1/M`.
pub fn uniform_prior(space: &HiddenVariableSpace) -> KnowledgeState {
    let m = space.size();
    KnowledgeState::from_raw(vec![1.0 / m as f64; m])
}

pub fn outcome_distribution(obs: &Observable, state: &KnowledgeState) -> Result<OutcomeDistribution> {
    check_size(obs.space_size(), state.size())?;
    let probs = obs
        .classes()
        .iter()
        .map(|class| class.iter().map(|&l| state.probs()[l]).sum())
        .collect();
    Ok(OutcomeDistribution {
        observable: obs.name().to_owned(),
        outcomes: obs.outcomes().to_vec(),
        probs,
    })
}

/// `Σ_λ R(λ) P(λ|S)`.
pub fn classical_expectation(obs: &Observable, state: &KnowledgeState) -> Result<f64> {
    check_size(obs.space_size(), state.size())?;
    Ok(obs
        .values()
        .iter()
        .zip(state.probs())
        .map(|(r, p)| r * p)
        .sum())
}

/// Bayes update on observing `outcome`: the prior restricted to the outcome
/// class and renormalized by the evidence `P(outcome|prior)`.
pub fn bayes_posterior(
    obs: &Observable,
    outcome: f64,
    prior: &KnowledgeState,
) -> Result<KnowledgeState> {
    check_size(obs.space_size(), prior.size())?;
    let k = obs.outcome_index(outcome)?;
    let evidence: f64 = obs.classes()[k].iter().map(|&l| prior.probs()[l]).sum();
    if evidence <= 0.0 {
        return Err(Error::ZeroEvidence(outcome));
    }
    let probs = (0..obs.space_size())
        .map(|l| {
            if obs.class_of(l) == k {
                prior.probs()[l] / evidence
            } else {
                0.0
            }
        })
        .collect();
    Ok(KnowledgeState::from_raw(probs))
}

/// Flat-prior posterior `g_k(λ) = δ(R(λ), a_k) / Ω(a_k)`.
pub fn class_posterior(obs: &Observable, outcome: f64) -> Result<KnowledgeState> {
    let k = obs.outcome_index(outcome)?;
    Ok(class_posterior_at(obs, k))
}

pub(crate) fn class_posterior_at(obs: &Observable, k: usize) -> KnowledgeState {
    let weight = 1.0 / obs.multiplicity(k) as f64;
    let probs = (0..obs.space_size())
        .map(|l| if obs.class_of(l) == k { weight } else { 0.0 })
        .collect();
    KnowledgeState::from_raw(probs)
}
