//! Seeded generators for models, states and unitaries.
//!
//! Every stream comes from ChaCha8 seeded through `seed_from_u64`, which is
//! specified bit-for-bit and identical on all platforms.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Exp1, StandardNormal};

use crate::space::{KnowledgeState, Observable};

pub type SeededRng = ChaCha8Rng;

pub fn seeded_rng(seed: u64) -> SeededRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Flat-Dirichlet weights: normalized unit exponentials.
pub fn random_simplex<R: Rng + ?Sized>(rng: &mut R, n: usize) -> Vec<f64> {
    let raw: Vec<f64> = (0..n).map(|_| rng.sample::<f64, _>(Exp1)).collect();
    let total: f64 = raw.iter().sum();
    raw.into_iter().map(|x| x / total).collect()
}

pub fn random_state<R: Rng + ?Sized>(rng: &mut R, size: usize) -> KnowledgeState {
    KnowledgeState::from_raw(random_simplex(rng, size))
}

/// A state that is uniform inside each outcome class of `obs`.
pub fn random_class_uniform_state<R: Rng + ?Sized>(rng: &mut R, obs: &Observable) -> KnowledgeState {
    let outcome_probs = random_simplex(rng, obs.num_outcomes());
    let probs = (0..obs.space_size())
        .map(|l| {
            let k = obs.class_of(l);
            outcome_probs[k] / obs.multiplicity(k) as f64
        })
        .collect();
    KnowledgeState::from_raw(probs)
}

/// Observable on `size` states with between 1 and `max_outcomes` distinct
/// values, each value realized at least once.
pub fn random_observable<R: Rng + ?Sized>(
    rng: &mut R,
    name: &str,
    size: usize,
    max_outcomes: usize,
) -> Observable {
    let n = rng.random_range(1..=max_outcomes.min(size).max(1));
    let mut values: Vec<f64> = Vec::with_capacity(n);
    while values.len() < n {
        // Quarter-integers keep the outcome values exactly representable.
        let v = f64::from(rng.random_range(-40i32..=40)) / 4.0;
        if !values.contains(&v) {
            values.push(v);
        }
    }
    let mut assignment: Vec<usize> = (0..size).map(|l| if l < n { l } else { rng.random_range(0..n) }).collect();
    assignment.shuffle(rng);
    Observable::new(name, assignment.into_iter().map(|k| values[k]).collect())
        .expect("finite values on at least two states")
}

pub fn random_permutation<R: Rng + ?Sized>(rng: &mut R, size: usize) -> Vec<usize> {
    let mut map: Vec<usize> = (0..size).collect();
    map.shuffle(rng);
    map
}

/// Haar-distributed unitary from the QR decomposition of a complex Ginibre
/// matrix, with the phases of `R`'s diagonal absorbed into `Q`.
pub fn random_unitary<R: Rng + ?Sized>(rng: &mut R, n: usize) -> DMatrix<Complex64> {
    let g = DMatrix::from_fn(n, n, |_, _| {
        Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
    });
    let qr = g.qr();
    let mut q = qr.q();
    let r = qr.r();
    for j in 0..n {
        let d = r[(j, j)];
        let phase = if d.norm() > 0.0 { d / d.norm() } else { Complex64::new(1.0, 0.0) };
        for i in 0..n {
            q[(i, j)] *= phase;
        }
    }
    q
}

/// Real symmetric matrix with standard-normal entries.
pub fn random_symmetric<R: Rng + ?Sized>(rng: &mut R, n: usize) -> DMatrix<f64> {
    let g = DMatrix::from_fn(n, n, |_, _| rng.sample::<f64, _>(StandardNormal));
    (&g + g.transpose()) * 0.5
}
