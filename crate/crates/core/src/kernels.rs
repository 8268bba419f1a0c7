//! Measurement-disturbance and dynamics kernels.
//!
//! A kernel is stored as `matrix[(λ', λ)] = P(λ'|λ, ·)`: columns index the
//! source state and each column sums to one, so applying a kernel to a state
//! is a matrix-vector product.

use nalgebra::DMatrix;
use rand::seq::SliceRandom;
use rand::Rng;
use rand_distr::Exp1;

use crate::error::{check_size, Error, Result};
use crate::random::seeded_rng;
use crate::space::{
    bayes_posterior, class_posterior_at, outcome_distribution, HiddenVariableSpace,
    KnowledgeState, Observable,
};

/// Tolerance for column/row sums when validating stochastic matrices.
pub const STOCHASTIC_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KernelKind {
    Scramble,
    BirkhoffBlock,
    Identity,
    Custom,
}

/// Anything that acts on a state of knowledge through a column-stochastic matrix.
pub trait StochasticKernel {
    fn matrix(&self) -> &DMatrix<f64>;

    fn size(&self) -> usize {
        self.matrix().nrows()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MeasurementKernel {
    observable: Option<String>,
    matrix: DMatrix<f64>,
    kind: KernelKind,
}

impl MeasurementKernel {
    /// A user-supplied kernel. Only column stochasticity is enforced; block
    /// support and fixed points are reported by [`Self::admissibility`] and
    /// [`check_fixed_points`].
    pub fn custom(obs: &Observable, matrix: DMatrix<f64>) -> Result<Self> {
        check_size(obs.space_size(), matrix.nrows())?;
        validate_column_stochastic(&matrix)?;
        Ok(Self {
            observable: Some(obs.name().to_owned()),
            matrix,
            kind: KernelKind::Custom,
        })
    }

    pub fn observable(&self) -> Option<&str> {
        self.observable.as_deref()
    }

    pub fn kind(&self) -> KernelKind {
        self.kind
    }

    pub fn is_identity(&self) -> bool {
        is_identity(&self.matrix)
    }

    /// Measures how far the kernel is from the admissible class for `obs`:
    /// block-supported on outcome classes with doubly stochastic blocks.
    pub fn admissibility(&self, obs: &Observable) -> Result<Admissibility> {
        check_size(obs.space_size(), self.size())?;
        let m = self.size();
        let mut leakage = 0.0_f64;
        for src in 0..m {
            let leaked: f64 = (0..m)
                .filter(|&dst| obs.class_of(dst) != obs.class_of(src))
                .map(|dst| self.matrix[(dst, src)])
                .sum();
            leakage = leakage.max(leaked);
        }
        let mut row_deviation = 0.0_f64;
        for class in obs.classes() {
            for &dst in class {
                let row: f64 = class.iter().map(|&src| self.matrix[(dst, src)]).sum();
                row_deviation = row_deviation.max((row - 1.0).abs());
            }
        }
        Ok(Admissibility {
            max_leakage: leakage,
            max_block_row_deviation: row_deviation,
        })
    }
}

impl StochasticKernel for MeasurementKernel {
    fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Admissibility {
    /// Largest probability a single source state sends outside its class.
    pub max_leakage: f64,
    /// Largest `|row sum - 1|` over rows of the within-class blocks.
    pub max_block_row_deviation: f64,
}

impl Admissibility {
    pub fn is_admissible(&self, tol: f64) -> bool {
        self.max_leakage <= tol && self.max_block_row_deviation <= tol
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DynamicsKind {
    Permutation,
    Custom,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DynamicsKernel {
    matrix: DMatrix<f64>,
    permutation: Option<Vec<usize>>,
}

impl DynamicsKernel {
    /// Deterministic dynamics `λ → map[λ]`. `map` must be a bijection.
    pub fn permutation(map: Vec<usize>) -> Result<Self> {
        let m = map.len();
        if m < 2 {
            return Err(Error::TrivialSpace(m));
        }
        let mut seen = vec![false; m];
        for (src, &dst) in map.iter().enumerate() {
            if dst >= m || seen[dst] {
                return Err(Error::InvalidKernel(format!(
                    "permutation map is not a bijection at index {src}"
                )));
            }
            seen[dst] = true;
        }
        let mut matrix = DMatrix::zeros(m, m);
        for (src, &dst) in map.iter().enumerate() {
            matrix[(dst, src)] = 1.0;
        }
        Ok(Self {
            matrix,
            permutation: Some(map),
        })
    }

    /// `λ → λ + 1 mod M`.
    pub fn cyclic_shift(size: usize) -> Result<Self> {
        Self::permutation((0..size).map(|l| (l + 1) % size.max(1)).collect())
    }

    pub fn custom(matrix: DMatrix<f64>) -> Result<Self> {
        if matrix.nrows() < 2 {
            return Err(Error::TrivialSpace(matrix.nrows()));
        }
        validate_column_stochastic(&matrix)?;
        Ok(Self {
            matrix,
            permutation: None,
        })
    }

    pub fn kind(&self) -> DynamicsKind {
        if self.permutation.is_some() {
            DynamicsKind::Permutation
        } else {
            DynamicsKind::Custom
        }
    }

    pub fn map(&self) -> Option<&[usize]> {
        self.permutation.as_deref()
    }
}

impl StochasticKernel for DynamicsKernel {
    fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }
}

fn is_identity(matrix: &DMatrix<f64>) -> bool {
    matrix.is_square()
        && matrix
            .iter()
            .enumerate()
            .all(|(idx, &v)| v == if idx % matrix.nrows() == idx / matrix.nrows() { 1.0 } else { 0.0 })
}

fn validate_column_stochastic(matrix: &DMatrix<f64>) -> Result<()> {
    if !matrix.is_square() {
        return Err(Error::InvalidKernel(format!(
            "matrix is {}x{}, expected square",
            matrix.nrows(),
            matrix.ncols()
        )));
    }
    if let Some(bad) = matrix.iter().position(|v| !v.is_finite() || *v < 0.0) {
        let n = matrix.nrows();
        return Err(Error::InvalidKernel(format!(
            "entry ({}, {}) is negative or not finite",
            bad % n,
            bad / n
        )));
    }
    for (src, column) in matrix.column_iter().enumerate() {
        let total: f64 = column.iter().sum();
        if (total - 1.0).abs() > STOCHASTIC_TOL {
            return Err(Error::InvalidKernel(format!(
                "column {src} sums to {total}, expected 1"
            )));
        }
    }
    Ok(())
}

/// Fragile update: `out[λ'] = Σ_λ P(λ'|λ) state[λ]`.
pub fn apply_kernel<K: StochasticKernel + ?Sized>(
    state: &KnowledgeState,
    kernel: &K,
) -> Result<KnowledgeState> {
    let matrix = kernel.matrix();
    check_size(matrix.ncols(), state.size())?;
    let out = (0..matrix.nrows())
        .map(|dst| {
            state
                .probs()
                .iter()
                .enumerate()
                .map(|(src, p)| matrix[(dst, src)] * p)
                .sum()
        })
        .collect();
    Ok(KnowledgeState::from_raw(out))
}

/// Uniform redistribution inside each outcome class:
/// `P(λ'|λ) = δ(R(λ'), R(λ)) / Ω(R(λ))`.
pub fn build_scrambling_kernel(obs: &Observable) -> MeasurementKernel {
    let m = obs.space_size();
    let matrix = DMatrix::from_fn(m, m, |dst, src| {
        let k = obs.class_of(src);
        if obs.class_of(dst) == k {
            1.0 / obs.multiplicity(k) as f64
        } else {
            0.0
        }
    });
    MeasurementKernel {
        observable: Some(obs.name().to_owned()),
        matrix,
        kind: KernelKind::Scramble,
    }
}

/// Random convex mixture of within-class permutations.
///
/// The stream is ChaCha8 seeded with `seed`. Classes are visited in
/// ascending outcome order; for each class, `num_perms` flat-Dirichlet
/// weights are drawn first (unit exponentials, normalized), then
/// `num_perms` Fisher-Yates shuffles of the class members. The j-th shuffle
/// sends `class[i]` to `shuffled[i]` with weight `w_j`.
pub fn build_birkhoff_kernel(obs: &Observable, seed: u64, num_perms: usize) -> Result<MeasurementKernel> {
    if num_perms == 0 {
        return Err(Error::InvalidArgument("num_perms must be at least 1".into()));
    }
    let m = obs.space_size();
    let mut rng = seeded_rng(seed);
    let mut matrix = DMatrix::zeros(m, m);
    for class in obs.classes() {
        let raw: Vec<f64> = (0..num_perms).map(|_| rng.sample::<f64, _>(Exp1)).collect();
        let total: f64 = raw.iter().sum();
        for w in raw {
            // A singleton block is exactly 1 whatever the rounded weights sum to.
            let weight = if class.len() == 1 { 1.0 / num_perms as f64 } else { w / total };
            let mut image = class.clone();
            image.shuffle(&mut rng);
            for (&src, &dst) in class.iter().zip(&image) {
                matrix[(dst, src)] += weight;
            }
        }
        if class.len() == 1 {
            matrix[(class[0], class[0])] = 1.0;
        }
    }
    Ok(MeasurementKernel {
        observable: Some(obs.name().to_owned()),
        matrix,
        kind: KernelKind::BirkhoffBlock,
    })
}

/// The non-fragile kernel `P(λ'|λ) = δ(λ', λ)`.
pub fn identity_kernel(space: &HiddenVariableSpace) -> MeasurementKernel {
    MeasurementKernel {
        observable: None,
        matrix: DMatrix::identity(space.size(), space.size()),
        kind: KernelKind::Identity,
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FixedPointReport {
    pub tolerance: f64,
    pub outcomes: Vec<f64>,
    /// `‖K g_k − g_k‖₁` per outcome.
    pub residuals: Vec<f64>,
    pub passes: Vec<bool>,
}

impl FixedPointReport {
    pub fn all_pass(&self) -> bool {
        self.passes.iter().all(|&p| p)
    }

    pub fn max_residual(&self) -> f64 {
        self.residuals.iter().copied().fold(0.0, f64::max)
    }
}

/// Checks that every flat-prior posterior of `obs` is left unchanged by `kernel`.
pub fn check_fixed_points(
    kernel: &MeasurementKernel,
    obs: &Observable,
    tol: f64,
) -> Result<FixedPointReport> {
    check_size(obs.space_size(), kernel.size())?;
    if !(tol > 0.0) {
        return Err(Error::InvalidArgument(format!("tolerance must be positive, got {tol}")));
    }
    let residuals = (0..obs.num_outcomes())
        .map(|k| {
            let g = class_posterior_at(obs, k);
            apply_kernel(&g, kernel)?.l1_distance(&g)
        })
        .collect::<Result<Vec<f64>>>()?;
    let passes = residuals.iter().map(|&r| r <= tol).collect();
    Ok(FixedPointReport {
        tolerance: tol,
        outcomes: obs.outcomes().to_vec(),
        residuals,
        passes,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Protocol {
    /// The post-measurement state is the flat-prior class posterior.
    Fragile,
    /// Both kernels are identities; the post-measurement state is the Bayes
    /// posterior of the prior.
    NonFragile,
}

/// Joint distribution of two consecutive measurements.
#[derive(Debug, Clone, PartialEq)]
pub struct JointDistribution {
    pub first_outcomes: Vec<f64>,
    pub second_outcomes: Vec<f64>,
    /// `probs[i][j] = P(first = a_i, then second = b_j)`.
    pub probs: Vec<Vec<f64>>,
    pub protocol: Protocol,
}

impl JointDistribution {
    pub fn first_marginal(&self) -> Vec<f64> {
        self.probs.iter().map(|row| row.iter().sum()).collect()
    }

    pub fn transpose(&self) -> JointDistribution {
        let probs = (0..self.second_outcomes.len())
            .map(|j| self.probs.iter().map(|row| row[j]).collect())
            .collect();
        JointDistribution {
            first_outcomes: self.second_outcomes.clone(),
            second_outcomes: self.first_outcomes.clone(),
            probs,
            protocol: self.protocol,
        }
    }

    /// Total-variation distance to a table over the same outcome grid.
    pub fn total_variation(&self, other: &JointDistribution) -> Result<f64> {
        if self.first_outcomes != other.first_outcomes || self.second_outcomes != other.second_outcomes {
            return Err(Error::InvalidArgument("joint tables index different outcomes".into()));
        }
        let diff: f64 = self
            .probs
            .iter()
            .flatten()
            .zip(other.probs.iter().flatten())
            .map(|(a, b)| (a - b).abs())
            .sum();
        Ok(0.5 * diff)
    }

    /// Largest off-diagonal probability, for tables whose two axes coincide.
    pub fn max_off_diagonal(&self) -> f64 {
        let mut worst = 0.0_f64;
        for (i, row) in self.probs.iter().enumerate() {
            for (j, &p) in row.iter().enumerate() {
                if self.first_outcomes[i] != self.second_outcomes[j] {
                    worst = worst.max(p);
                }
            }
        }
        worst
    }
}

/// Measures `first` then `second` starting from `state`.
///
/// When both kernels are identities the non-fragile protocol applies and the
/// intermediate state is the Bayes posterior of `state`. Otherwise the
/// intermediate state is the class posterior of the first outcome propagated
/// through the first kernel.
pub fn sequential_joint(
    first: (&Observable, &MeasurementKernel),
    second: (&Observable, &MeasurementKernel),
    state: &KnowledgeState,
) -> Result<JointDistribution> {
    let (obs1, k1) = first;
    let (obs2, k2) = second;
    let m = state.size();
    for size in [obs1.space_size(), obs2.space_size(), k1.size(), k2.size()] {
        check_size(m, size)?;
    }
    let protocol = if k1.is_identity() && k2.is_identity() {
        Protocol::NonFragile
    } else {
        Protocol::Fragile
    };
    let first_dist = outcome_distribution(obs1, state)?;
    let mut probs = Vec::with_capacity(obs1.num_outcomes());
    for (k, (&outcome, &p)) in obs1.outcomes().iter().zip(first_dist.probs()).enumerate() {
        if p == 0.0 {
            probs.push(vec![0.0; obs2.num_outcomes()]);
            continue;
        }
        let collapsed = match protocol {
            Protocol::Fragile => class_posterior_at(obs1, k),
            Protocol::NonFragile => bayes_posterior(obs1, outcome, state)?,
        };
        let after = apply_kernel(&collapsed, k1)?;
        let second_dist = outcome_distribution(obs2, &after)?;
        probs.push(second_dist.probs().iter().map(|q| p * q).collect());
    }
    Ok(JointDistribution {
        first_outcomes: obs1.outcomes().to_vec(),
        second_outcomes: obs2.outcomes().to_vec(),
        probs,
        protocol,
    })
}
