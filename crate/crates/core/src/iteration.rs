//! Fixed-point iteration shared by both influence methods.

use serde::{Deserialize, Serialize};

/// Stopping parameters for [`iterate`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Convergence {
    pub tau: f64,
    pub max_iter: usize,
}

impl Default for Convergence {
    fn default() -> Self {
        Self {
            tau: 1e-8,
            max_iter: 100,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct IterationOutcome {
    pub scores: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
    /// Cosine similarity between the last two iterates.
    pub final_similarity: f64,
}

fn norm(xs: impl Iterator<Item = f64>) -> f64 {
    xs.map(|x| x * x).sum::<f64>().sqrt()
}

/// Cosine similarity, with the zero vector similar only to itself.
pub fn cosine_similarity(a: &[f64], b: &[f64]) -> f64 {
    1.0 - cosine_distance(a, b)
}

/// `1 - cos(a, b)`, evaluated as half the squared distance between the unit
/// vectors so that it stays accurate far below `f64::EPSILON`.
pub fn cosine_distance(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    let na = a.iter().map(|x| x * x).sum::<f64>().sqrt();
    let nb = b.iter().map(|x| x * x).sum::<f64>().sqrt();
    match (na == 0.0, nb == 0.0) {
        (true, true) => 0.0,
        (true, false) | (false, true) => 1.0,
        (false, false) => {
            let d: f64 = a
                .iter()
                .zip(b)
                .map(|(x, y)| {
                    let diff = x / na - y / nb;
                    diff * diff
                })
                .sum();
            (0.5 * d).min(2.0)
        }
    }
}

/// Runs `x <- step(x)` from `init` until `max_iter` steps were taken or two
/// consecutive iterates agree both in direction (`1 - cos < tau`) and in
/// length (`|x' - x| <= sqrt(2 tau) |x'|`).
///
/// The length test uses the same angular scale as the cosine test; without
/// it, iterates that stay parallel while still growing or shrinking would be
/// taken as converged.
pub fn iterate<F>(init: Vec<f64>, conv: Convergence, mut step: F) -> IterationOutcome
where
    F: FnMut(&[f64], &mut [f64]),
{
    let mut current = init;
    let mut next = vec![0.0; current.len()];
    if current.is_empty() {
        return IterationOutcome {
            scores: current,
            iterations: 0,
            converged: true,
            final_similarity: 1.0,
        };
    }
    let length_tol = (2.0 * conv.tau).sqrt();
    let mut similarity = f64::NAN;
    for iteration in 1..=conv.max_iter {
        step(&current, &mut next);
        let distance = cosine_distance(&current, &next);
        similarity = 1.0 - distance;
        let change = norm(current.iter().zip(&next).map(|(a, b)| a - b));
        let length = norm(next.iter().copied());
        std::mem::swap(&mut current, &mut next);
        if distance < conv.tau && change <= length_tol * length {
            return IterationOutcome {
                scores: current,
                iterations: iteration,
                converged: true,
                final_similarity: similarity,
            };
        }
    }
    IterationOutcome {
        scores: current,
        iterations: conv.max_iter,
        converged: false,
        final_similarity: similarity,
    }
}
