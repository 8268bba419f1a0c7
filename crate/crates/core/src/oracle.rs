//! Brute-force reference computations.
//!
//! Everything here is plain loops over internal states and outcome paths,
//! with no matrix algebra, so that a bug in the main modules cannot be
//! reproduced by the check that is supposed to catch it.

#![allow(clippy::needless_range_loop)]

use crate::error::{check_size, Result};
use crate::space::{KnowledgeState, Observable};

/// Result of comparing a module value against its oracle.
#[derive(Debug, Clone, PartialEq)]
pub struct OracleReport {
    pub quantity: String,
    pub oracle: f64,
    pub module: f64,
    pub difference: f64,
    pub tolerance: f64,
    pub pass: bool,
}

impl OracleReport {
    pub fn compare(quantity: impl Into<String>, oracle: f64, module: f64, tolerance: f64) -> Self {
        let difference = (oracle - module).abs();
        Self {
            quantity: quantity.into(),
            oracle,
            module,
            difference,
            tolerance,
            pass: difference <= tolerance,
        }
    }
}

/// Neumaier-compensated summation.
fn compensated_sum(terms: impl IntoIterator<Item = f64>) -> f64 {
    let mut sum = 0.0_f64;
    let mut carry = 0.0_f64;
    for x in terms {
        let t = sum + x;
        if sum.abs() >= x.abs() {
            carry += (sum - t) + x;
        } else {
            carry += (x - t) + sum;
        }
        sum = t;
    }
    sum + carry
}

/// `Σ_λ R(λ) P(λ)` with compensated accumulation.
pub fn brute_expectation(obs: &Observable, state: &KnowledgeState) -> Result<f64> {
    check_size(obs.space_size(), state.size())?;
    let mut terms = Vec::with_capacity(state.size());
    for lambda in 0..state.size() {
        terms.push(obs.values()[lambda] * state.probs()[lambda]);
    }
    Ok(compensated_sum(terms))
}

/// Sorted distinct values, recomputed by scanning rather than trusting
/// the observable's cached outcome list.
fn distinct_values(values: &[f64]) -> Vec<f64> {
    let mut out: Vec<f64> = Vec::new();
    for &v in values {
        if !out.contains(&v) {
            out.push(v);
        }
    }
    out.sort_by(f64::total_cmp);
    out
}

/// Joint table for measuring `first` then `second` by enumerating every
/// `(first outcome, collapsed λ, propagated λ', second outcome)` path.
///
/// `kernel[dst][src] = P(dst|src)` for the first measurement. With
/// `fragile`, the collapse is uniform on the first outcome class; otherwise
/// it keeps the prior's weights inside the class.
pub fn brute_sequential(
    first: &Observable,
    kernel: &[Vec<f64>],
    second: &Observable,
    state: &KnowledgeState,
    fragile: bool,
) -> Result<Vec<Vec<f64>>> {
    let m = state.size();
    check_size(m, first.space_size())?;
    check_size(m, second.space_size())?;
    check_size(m, kernel.len())?;
    let r1 = first.values();
    let r2 = second.values();
    let outcomes1 = distinct_values(r1);
    let outcomes2 = distinct_values(r2);

    let mut table = vec![vec![0.0; outcomes2.len()]; outcomes1.len()];
    for (i, &a) in outcomes1.iter().enumerate() {
        let mut p_a = 0.0;
        let mut class_size = 0usize;
        for lambda in 0..m {
            if r1[lambda] == a {
                p_a += state.probs()[lambda];
                class_size += 1;
            }
        }
        if p_a == 0.0 {
            continue;
        }
        for lambda in 0..m {
            if r1[lambda] != a {
                continue;
            }
            let collapsed = if fragile {
                1.0 / class_size as f64
            } else {
                state.probs()[lambda] / p_a
            };
            for lambda_after in 0..m {
                let path = p_a * collapsed * kernel[lambda_after][lambda];
                if path == 0.0 {
                    continue;
                }
                for (j, &b) in outcomes2.iter().enumerate() {
                    if r2[lambda_after] == b {
                        table[i][j] += path;
                    }
                }
            }
        }
    }
    Ok(table)
}

/// Operator element `Σ_{λ,λ'} w(λ) φ_i(λ') K[λ'][λ] φ_j(λ)` with the basis
/// functions of `basis_obs` evaluated from their definition. `weights`
/// of `None` gives the transfer element.
pub fn brute_operator_element(
    basis_obs: &Observable,
    kernel: &[Vec<f64>],
    weights: Option<&[f64]>,
    i: usize,
    j: usize,
) -> f64 {
    let values = basis_obs.values();
    let outcomes = distinct_values(values);
    let phi = |k: usize, lambda: usize| -> f64 {
        let omega = values.iter().filter(|&&v| v == outcomes[k]).count() as f64;
        if values[lambda] == outcomes[k] {
            1.0 / omega.sqrt()
        } else {
            0.0
        }
    };
    let m = values.len();
    let mut terms = Vec::with_capacity(m * m);
    for lambda in 0..m {
        for lambda_after in 0..m {
            let w = weights.map_or(1.0, |w| w[lambda]);
            terms.push(w * phi(i, lambda_after) * kernel[lambda_after][lambda] * phi(j, lambda));
        }
    }
    compensated_sum(terms)
}

/// `Σ_k p_k a_k`, the trace-rule value for a density built from an
/// operator's own eigenvectors.
pub fn brute_weighted_outcomes(probs: &[f64], outcomes: &[f64]) -> f64 {
    compensated_sum(probs.iter().zip(outcomes).map(|(p, a)| p * a))
}

/// Maximum `|S|` over the deterministic strategies `(x, x′, y, y′)`
/// admitted by `keep`, with strategy `k` decoded from the bits of `k`
/// (bit set means `−1`). Returns the maximum and the number visited.
pub fn brute_chsh_local_max_where(keep: impl Fn([i32; 4]) -> bool) -> (f64, usize) {
    let mut best = f64::NEG_INFINITY;
    let mut visited = 0;
    for code in 0u32..16 {
        let mut signs = [1i32; 4];
        for (bit, sign) in signs.iter_mut().enumerate() {
            if code >> bit & 1 == 1 {
                *sign = -1;
            }
        }
        if !keep(signs) {
            continue;
        }
        let [x, xp, y, yp] = signs;
        let s = x * y - x * yp + xp * y + xp * yp;
        best = best.max(f64::from(s.abs()));
        visited += 1;
    }
    (best, visited)
}

pub fn brute_chsh_local_max() -> f64 {
    brute_chsh_local_max_where(|_| true).0
}
