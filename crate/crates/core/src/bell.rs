//! Two-party hidden-variable models with detector settings and the CHSH test.
//!
//! Responses are deterministic functions of `(λ, setting)`; any dependence
//! on the distant setting enters only through `P(λ|a, b)`. A model whose
//! distribution ignores the settings is local.

use std::cmp::Ordering;
use std::f64::consts::{FRAC_PI_2, FRAC_PI_4};
use std::fmt;
use std::sync::Arc;

use rand::Rng;

use crate::error::{Error, Result};
use crate::random::random_state;
use crate::space::KnowledgeState;

/// Local bound on `|S|`.
pub const LOCAL_BOUND: f64 = 2.0;

/// Slack above [`LOCAL_BOUND`] before `|S|` counts as a violation.
pub const VIOLATION_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Spin {
    Up,
    Down,
}

impl Spin {
    pub fn value(self) -> f64 {
        match self {
            Spin::Up => 1.0,
            Spin::Down => -1.0,
        }
    }

    pub fn from_sign(x: f64) -> Self {
        if x >= 0.0 {
            Spin::Up
        } else {
            Spin::Down
        }
    }
}

pub trait BipartiteModel: Send + Sync {
    fn size(&self) -> usize;

    /// `R_A(λ; a)`.
    fn response_a(&self, lambda: usize, a: f64) -> Spin;

    /// `R_B(λ; b)`.
    fn response_b(&self, lambda: usize, b: f64) -> Spin;

    /// `P(λ|a, b, S)`.
    fn distribution(&self, a: f64, b: f64) -> KnowledgeState;

    /// True when the distribution does not depend on the settings.
    fn is_local(&self) -> bool;
}

/// Hidden variable `λ = (s_A, s_B) ∈ {±1}²` drawn with
/// `P(λ|a, b) = (1 − s_A s_B cos(a − b)) / 4`, so `E(a, b) = −cos(a − b)`.
///
/// States are indexed `(+,+), (+,−), (−,+), (−,−)`.
#[derive(Debug, Clone, Copy, Default)]
pub struct SingletModel;

pub fn singlet_model() -> SingletModel {
    SingletModel
}

impl SingletModel {
    const SIGNS: [(f64, f64); 4] = [(1.0, 1.0), (1.0, -1.0), (-1.0, 1.0), (-1.0, -1.0)];
}

impl BipartiteModel for SingletModel {
    fn size(&self) -> usize {
        4
    }

    fn response_a(&self, lambda: usize, _a: f64) -> Spin {
        Spin::from_sign(Self::SIGNS[lambda].0)
    }

    fn response_b(&self, lambda: usize, _b: f64) -> Spin {
        Spin::from_sign(Self::SIGNS[lambda].1)
    }

    fn distribution(&self, a: f64, b: f64) -> KnowledgeState {
        let c = (a - b).cos();
        let probs = Self::SIGNS
            .iter()
            .map(|(sa, sb)| (1.0 - sa * sb * c) / 4.0)
            .collect();
        KnowledgeState::from_raw(probs)
    }

    fn is_local(&self) -> bool {
        false
    }
}

type ResponseFn = Arc<dyn Fn(usize, f64) -> Spin + Send + Sync>;

/// A model with a fixed, setting-independent distribution over `λ`.
#[derive(Clone)]
pub struct LocalModel {
    weights: KnowledgeState,
    response_a: ResponseFn,
    response_b: ResponseFn,
}

impl fmt::Debug for LocalModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("LocalModel").field("weights", &self.weights).finish_non_exhaustive()
    }
}

impl LocalModel {
    pub fn from_fns<FA, FB>(weights: KnowledgeState, response_a: FA, response_b: FB) -> Self
    where
        FA: Fn(usize, f64) -> Spin + Send + Sync + 'static,
        FB: Fn(usize, f64) -> Spin + Send + Sync + 'static,
    {
        Self {
            weights,
            response_a: Arc::new(response_a),
            response_b: Arc::new(response_b),
        }
    }

    /// Each `λ` carries a preferred angle per side; the response is `+1`
    /// when the setting lies within a quarter turn of it.
    pub fn hidden_angles(weights: KnowledgeState, angles_a: Vec<f64>, angles_b: Vec<f64>) -> Result<Self> {
        let m = weights.size();
        if angles_a.len() != m || angles_b.len() != m {
            return Err(Error::Size {
                expected: m,
                found: if angles_a.len() != m { angles_a.len() } else { angles_b.len() },
            });
        }
        if angles_a.iter().chain(&angles_b).any(|t| !t.is_finite()) {
            return Err(Error::InvalidArgument("hidden angles must be finite".into()));
        }
        Ok(Self::from_fns(
            weights,
            move |l, a| Spin::from_sign((a - angles_a[l]).cos()),
            move |l, b| Spin::from_sign((b - angles_b[l]).cos()),
        ))
    }

    /// Hidden-angle model with uniformly random angles and flat-Dirichlet weights.
    pub fn random<R: Rng + ?Sized>(rng: &mut R, size: usize) -> Self {
        let weights = random_state(rng, size);
        let two_pi = 2.0 * std::f64::consts::PI;
        let angles_a = (0..size).map(|_| rng.random::<f64>() * two_pi).collect();
        let angles_b = (0..size).map(|_| rng.random::<f64>() * two_pi).collect();
        Self::hidden_angles(weights, angles_a, angles_b).expect("sizes agree")
    }

    /// Both sides always answer with the given spins; `λ` is irrelevant.
    pub fn constant(a: Spin, b: Spin) -> Self {
        let weights = KnowledgeState::from_raw(vec![0.5, 0.5]);
        Self::from_fns(weights, move |_, _| a, move |_, _| b)
    }

    pub fn weights(&self) -> &KnowledgeState {
        &self.weights
    }
}

impl BipartiteModel for LocalModel {
    fn size(&self) -> usize {
        self.weights.size()
    }

    fn response_a(&self, lambda: usize, a: f64) -> Spin {
        (self.response_a)(lambda, a)
    }

    fn response_b(&self, lambda: usize, b: f64) -> Spin {
        (self.response_b)(lambda, b)
    }

    fn distribution(&self, _a: f64, _b: f64) -> KnowledgeState {
        self.weights.clone()
    }

    fn is_local(&self) -> bool {
        true
    }
}

/// `E(a, b) = Σ_λ R_A(λ; a) R_B(λ; b) P(λ|a, b)`.
pub fn correlation<M: BipartiteModel + ?Sized>(model: &M, a: f64, b: f64) -> f64 {
    let dist = model.distribution(a, b);
    dist.probs()
        .iter()
        .enumerate()
        .map(|(l, p)| model.response_a(l, a).value() * model.response_b(l, b).value() * p)
        .sum()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChshSettings {
    pub a: f64,
    pub a_prime: f64,
    pub b: f64,
    pub b_prime: f64,
}

impl ChshSettings {
    pub fn new(a: f64, a_prime: f64, b: f64, b_prime: f64) -> Self {
        Self { a, a_prime, b, b_prime }
    }

    /// `(0, π/2, π/4, 3π/4)`, where the singlet model reaches `2√2`.
    pub fn canonical() -> Self {
        Self::new(0.0, FRAC_PI_2, FRAC_PI_4, 3.0 * FRAC_PI_4)
    }

    pub fn as_array(&self) -> [f64; 4] {
        [self.a, self.a_prime, self.b, self.b_prime]
    }

    fn lexicographic(&self, other: &Self) -> Ordering {
        self.as_array()
            .iter()
            .zip(other.as_array().iter())
            .map(|(x, y)| x.total_cmp(y))
            .find(|o| o.is_ne())
            .unwrap_or(Ordering::Equal)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChshResult {
    pub settings: ChshSettings,
    /// `[E(a,b), E(a,b′), E(a′,b), E(a′,b′)]`.
    pub correlations: [f64; 4],
    pub s: f64,
    pub violation: bool,
}

/// `S = E(a,b) − E(a,b′) + E(a′,b) + E(a′,b′)`.
pub fn chsh<M: BipartiteModel + ?Sized>(model: &M, settings: ChshSettings) -> ChshResult {
    let ChshSettings { a, a_prime, b, b_prime } = settings;
    let correlations = [
        correlation(model, a, b),
        correlation(model, a, b_prime),
        correlation(model, a_prime, b),
        correlation(model, a_prime, b_prime),
    ];
    let s = correlations[0] - correlations[1] + correlations[2] + correlations[3];
    ChshResult {
        settings,
        correlations,
        s,
        violation: s.abs() > LOCAL_BOUND + VIOLATION_TOL,
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LocalBound {
    pub max_abs_s: f64,
    pub strategies_visited: usize,
}

/// Maximum `|S|` over the 16 deterministic local strategies, i.e. fixed
/// answers `(x, x′, y, y′) ∈ {±1}⁴` for the four settings. Every local model
/// is a mixture of these, so its `|S|` is bounded by the same value.
pub fn local_strategy_oracle() -> LocalBound {
    const SIGNS: [f64; 2] = [1.0, -1.0];
    let mut best = 0.0_f64;
    let mut visited = 0;
    for x in SIGNS {
        for x_prime in SIGNS {
            for y in SIGNS {
                for y_prime in SIGNS {
                    let s = x * y - x * y_prime + x_prime * y + x_prime * y_prime;
                    best = best.max(s.abs());
                    visited += 1;
                }
            }
        }
    }
    LocalBound {
        max_abs_s: best,
        strategies_visited: visited,
    }
}

/// Candidate angles for each of the four CHSH settings.
#[derive(Debug, Clone, PartialEq)]
pub struct AngleGrid {
    pub a: Vec<f64>,
    pub a_prime: Vec<f64>,
    pub b: Vec<f64>,
    pub b_prime: Vec<f64>,
}

impl AngleGrid {
    /// The same angle list on every axis.
    pub fn shared(angles: Vec<f64>) -> Self {
        Self {
            a: angles.clone(),
            a_prime: angles.clone(),
            b: angles.clone(),
            b_prime: angles,
        }
    }

    /// `steps` evenly spaced angles in `[start, stop)` on every axis.
    pub fn uniform(start: f64, stop: f64, steps: usize) -> Self {
        let width = (stop - start) / steps as f64;
        Self::shared((0..steps).map(|i| start + width * i as f64).collect())
    }

    pub fn len(&self) -> usize {
        self.a.len() * self.a_prime.len() * self.b.len() * self.b_prime.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// Evaluates CHSH on every grid point, sorted by `|S|` descending.
///
/// `|S|` values are compared on a `1e-12` lattice so that rounding noise does
/// not reorder ties; ties fall back to lexicographic settings order.
pub fn chsh_scan<M: BipartiteModel + ?Sized>(model: &M, grid: &AngleGrid) -> Result<Vec<ChshResult>> {
    if grid.is_empty() {
        return Err(Error::InvalidArgument("every grid axis needs at least one angle".into()));
    }
    let mut results = Vec::with_capacity(grid.len());
    for &a in &grid.a {
        for &a_prime in &grid.a_prime {
            for &b in &grid.b {
                for &b_prime in &grid.b_prime {
                    results.push(chsh(model, ChshSettings::new(a, a_prime, b, b_prime)));
                }
            }
        }
    }
    let key = |r: &ChshResult| (r.s.abs() * 1e12).round() as i64;
    results.sort_by(|x, y| key(y).cmp(&key(x)).then_with(|| x.settings.lexicographic(&y.settings)));
    Ok(results)
}
