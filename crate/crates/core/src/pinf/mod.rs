//! Comment-based blogger influence (PostInfluence).
//!
//! A blogger's influence is the summed response score of their posts (`β`)
//! plus a weighted share of the influence of every blogger who comments on
//! them, split by how that commenter divides their comments:
//!
//! ```text
//! i' = β + w·Aᵀ·i,   A[v][a] = c(v,a) / Σ_k c(v,k)
//! ```
//!
//! Comments by an author in their own threads never count, neither in the
//! response of a post nor in `c(v,a)`.

mod response;

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dataset::SlotView;
use crate::iteration::{iterate, Convergence};
use crate::ranking::Ranking;
use crate::{ConfigError, InfluenceVector};

pub use response::{response_score, solve_response_params, ResponseAnchors, ResponseScoreParams};

#[derive(Debug, Error, PartialEq)]
pub enum PInfError {
    #[error("maximum response must be at least 1")]
    ZeroMaxResponse,
    #[error("slot has no posts")]
    EmptyView,
    #[error("beta has length {actual}, graph has {expected} bloggers")]
    DimensionMismatch { expected: usize, actual: usize },
    #[error(transparent)]
    Config(#[from] ConfigError),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PInfConfig {
    /// Weight of the commenter recursion; below 1 for a contraction.
    pub w: f64,
    pub tau: f64,
    pub max_iter: usize,
    pub init_value: f64,
    pub response_params: ResponseScoreParams,
}

impl Default for PInfConfig {
    fn default() -> Self {
        Self {
            w: 0.85,
            tau: 1e-8,
            max_iter: 100,
            init_value: 0.5,
            response_params: ResponseScoreParams::default(),
        }
    }
}

impl PInfConfig {
    pub fn validate(&self) -> Result<(), ConfigError> {
        if !(0.0..1.0).contains(&self.w) {
            return Err(ConfigError::new("w", "must lie in [0, 1)"));
        }
        if self.tau.is_nan() || self.tau <= 0.0 {
            return Err(ConfigError::new("tau", "must be positive"));
        }
        if self.max_iter == 0 {
            return Err(ConfigError::new("max_iter", "must be at least 1"));
        }
        if !self.init_value.is_finite() {
            return Err(ConfigError::new("init_value", "must be finite"));
        }
        Ok(())
    }
}

/// Comments on local post `post` not written by the post's author.
pub fn post_response(view: &SlotView<'_>, post: usize) -> u64 {
    let author = &view.post(post).author_id;
    view.comments_on(post)
        .iter()
        .filter(|&&c| &view.comment(c).author_id != author)
        .count() as u64
}

/// Largest post response in the view, floored at 1.
pub fn max_response(view: &SlotView<'_>) -> Result<u64, PInfError> {
    (0..view.posts().len())
        .map(|p| post_response(view, p))
        .max()
        .map(|m| m.max(1))
        .ok_or(PInfError::EmptyView)
}

/// Per-blogger sum of response scores, indexed like `view.bloggers()`.
pub fn compute_beta(view: &SlotView<'_>, params: &ResponseScoreParams) -> Vec<f64> {
    let mut beta = vec![0.0; view.bloggers().len()];
    let Ok(max) = max_response(view) else {
        return beta;
    };
    for p in 0..view.posts().len() {
        let score = response_score(post_response(view, p), max, params).expect("max >= 1");
        beta[view.post_author_local(p)] += score;
    }
    beta
}

#[derive(Debug, Clone, PartialEq)]
enum CommentRow {
    /// `(target, proportion)` pairs, sorted by target, summing to 1.
    Weights(Vec<(usize, f64)>),
    Uniform,
}

/// Row-stochastic blogger-to-blogger comment proportions for one slot.
#[derive(Debug, Clone, PartialEq)]
pub struct CommentGraph {
    bloggers: Vec<usize>,
    rows: Vec<CommentRow>,
}

impl CommentGraph {
    /// Graph on bloggers `0..n` from `(commenter, author, count)` triples.
    /// Self-comments are ignored and repeated pairs add up.
    pub fn from_counts(n: usize, counts: impl IntoIterator<Item = (usize, usize, u64)>) -> Self {
        Self::with_index((0..n).collect(), counts)
    }

    fn with_index(
        bloggers: Vec<usize>,
        counts: impl IntoIterator<Item = (usize, usize, u64)>,
    ) -> Self {
        let n = bloggers.len();
        let mut per_row = vec![BTreeMap::<usize, u64>::new(); n];
        for (v, a, c) in counts {
            assert!(
                v < n && a < n,
                "pair ({v}, {a}) out of range for {n} bloggers"
            );
            if v != a && c > 0 {
                *per_row[v].entry(a).or_default() += c;
            }
        }
        let rows = per_row
            .into_iter()
            .map(|row| {
                let total: u64 = row.values().sum();
                if total == 0 {
                    CommentRow::Uniform
                } else {
                    CommentRow::Weights(
                        row.into_iter()
                            .map(|(a, c)| (a, c as f64 / total as f64))
                            .collect(),
                    )
                }
            })
            .collect();
        Self { bloggers, rows }
    }

    pub fn dim(&self) -> usize {
        self.rows.len()
    }

    /// Dataset blogger indices, in matrix order.
    pub fn bloggers(&self) -> &[usize] {
        &self.bloggers
    }

    pub fn entry(&self, v: usize, a: usize) -> f64 {
        match &self.rows[v] {
            CommentRow::Uniform => 1.0 / self.dim() as f64,
            CommentRow::Weights(w) => w
                .binary_search_by_key(&a, |&(t, _)| t)
                .map_or(0.0, |i| w[i].1),
        }
    }

    pub fn is_uniform_row(&self, v: usize) -> bool {
        self.rows[v] == CommentRow::Uniform
    }

    pub fn dense(&self) -> Vec<Vec<f64>> {
        (0..self.dim())
            .map(|v| (0..self.dim()).map(|a| self.entry(v, a)).collect())
            .collect()
    }

    /// `out = Aᵀ·x`
    pub fn mul_transpose(&self, x: &[f64], out: &mut [f64]) {
        let mut spread = 0.0;
        out.iter_mut().for_each(|o| *o = 0.0);
        for (v, row) in self.rows.iter().enumerate() {
            match row {
                CommentRow::Uniform => spread += x[v],
                CommentRow::Weights(w) => w.iter().for_each(|&(a, share)| out[a] += share * x[v]),
            }
        }
        let spread = spread / self.dim() as f64;
        out.iter_mut().for_each(|o| *o += spread);
    }
}

/// Comment proportions among the slot's bloggers. Commenters who did not post
/// in the slot are not part of the graph.
pub fn build_comment_graph(view: &SlotView<'_>) -> CommentGraph {
    let ds = view.dataset();
    let mut counts = Vec::new();
    for p in 0..view.posts().len() {
        let author = view.post_author_local(p);
        for &c in view.comments_on(p) {
            if let Some(commenter) = ds.comment_blogger(c).and_then(|b| view.local_blogger(b)) {
                counts.push((commenter, author, 1));
            }
        }
    }
    CommentGraph::with_index(view.bloggers().to_vec(), counts)
}

/// Fixed point of `i = β + w·Aᵀ·i`.
pub fn iterate_influence(
    graph: &CommentGraph,
    beta: &[f64],
    cfg: &PInfConfig,
) -> Result<InfluenceVector, PInfError> {
    cfg.validate()?;
    let n = graph.dim();
    if beta.len() != n {
        return Err(PInfError::DimensionMismatch {
            expected: n,
            actual: beta.len(),
        });
    }
    let conv = Convergence {
        tau: cfg.tau,
        max_iter: cfg.max_iter,
    };
    let mut recognized = vec![0.0; n];
    let outcome = iterate(vec![cfg.init_value; n], conv, |x, next| {
        graph.mul_transpose(x, &mut recognized);
        for a in 0..n {
            next[a] = beta[a] + cfg.w * recognized[a];
        }
    });
    Ok(InfluenceVector::from_outcome(
        graph.bloggers().to_vec(),
        outcome,
    ))
}

/// Influence of every blogger of the slot and the resulting ranking.
pub fn rank_bloggers(
    view: &SlotView<'_>,
    cfg: &PInfConfig,
) -> Result<(InfluenceVector, Ranking), PInfError> {
    if view.is_empty() {
        return Err(PInfError::EmptyView);
    }
    let beta = compute_beta(view, &cfg.response_params);
    let graph = build_comment_graph(view);
    let influence = iterate_influence(&graph, &beta, cfg)?;
    let ranking = Ranking::from_scores(
        influence
            .scores
            .iter()
            .enumerate()
            .map(|(b, &s)| (view.blogger_id(b), s)),
    )
    .expect("slot bloggers are distinct");
    Ok((influence, ranking))
}
