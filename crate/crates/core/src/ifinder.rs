//! Link-based post influence (iFinder).
//!
//! A post's influence is its comment count plus the influence flowing in
//! through links from other posts minus the influence flowing out through its
//! own links, optionally scaled by an eloquence weight:
//!
//! ```text
//! i' = eloquence ⊙ (w_c·γ + (w_in·Aᵀ − w_out·A)·i)
//! ```
//!
//! `A` is the binary post-to-post link matrix of a slot, with link-less rows
//! replaced by the uniform `1/N` fill. Blogger influence is the mean (or max)
//! of the blogger's post influences.

use std::collections::BTreeSet;
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dataset::{LinkClass, LinkResolution, Post, SlotView};
use crate::iteration::{iterate, Convergence};
use crate::ranking::Ranking;
use crate::{ConfigError, InfluenceVector};

/// Per-post multiplier applied to every update.
pub trait EloquenceWeight: Send + Sync + fmt::Debug {
    fn weight(&self, post: &Post) -> f64;
}

/// Every post weighs 1.
#[derive(Debug, Clone, Copy, Default)]
pub struct UniformEloquence;

impl EloquenceWeight for UniformEloquence {
    fn weight(&self, _post: &Post) -> f64 {
        1.0
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct IFinderConfig {
    pub w_in: f64,
    pub w_out: f64,
    pub w_c: f64,
    #[serde(skip)]
    pub eloquence: Arc<dyn EloquenceWeight>,
    pub tau: f64,
    pub max_iter: usize,
    pub init_value: f64,
}

impl Default for IFinderConfig {
    fn default() -> Self {
        Self {
            w_in: 1.0,
            w_out: 1.0,
            w_c: 1.0,
            eloquence: Arc::new(UniformEloquence),
            tau: 1e-8,
            max_iter: 100,
            init_value: 0.5,
        }
    }
}

impl IFinderConfig {
    pub fn validate(&self) -> Result<(), ConfigError> {
        for (field, value) in [
            ("w_in", self.w_in),
            ("w_out", self.w_out),
            ("w_c", self.w_c),
        ] {
            if !(value.is_finite() && value >= 0.0) {
                return Err(ConfigError::new(field, "must be a nonnegative number"));
            }
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

    fn convergence(&self) -> Convergence {
        Convergence {
            tau: self.tau,
            max_iter: self.max_iter,
        }
    }
}

#[derive(Debug, Error, PartialEq)]
pub enum IFinderError {
    #[error("{name} has length {actual}, graph has {expected} posts")]
    DimensionMismatch {
        name: &'static str,
        expected: usize,
        actual: usize,
    },
    #[error(transparent)]
    Config(#[from] ConfigError),
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum LinkRow {
    /// Sorted, distinct targets.
    Links(Vec<usize>),
    /// No outlinks: every entry is `1/N`.
    Uniform,
}

/// Post-to-post adjacency for one slot.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PostLinkGraph {
    posts: Vec<usize>,
    rows: Vec<LinkRow>,
}

impl PostLinkGraph {
    /// Graph on posts `0..n` from `(source, target)` pairs. Self-links are
    /// dropped and repeated pairs collapse to one edge.
    pub fn from_edges(n: usize, edges: impl IntoIterator<Item = (usize, usize)>) -> Self {
        Self::with_index((0..n).collect(), edges)
    }

    fn with_index(posts: Vec<usize>, edges: impl IntoIterator<Item = (usize, usize)>) -> Self {
        let n = posts.len();
        let mut targets = vec![BTreeSet::new(); n];
        for (p, q) in edges {
            assert!(p < n && q < n, "edge ({p}, {q}) out of range for {n} posts");
            if p != q {
                targets[p].insert(q);
            }
        }
        let rows = targets
            .into_iter()
            .map(|t| {
                if t.is_empty() {
                    LinkRow::Uniform
                } else {
                    LinkRow::Links(t.into_iter().collect())
                }
            })
            .collect();
        Self { posts, rows }
    }

    pub fn dim(&self) -> usize {
        self.rows.len()
    }

    /// Dataset post indices, in matrix order.
    pub fn posts(&self) -> &[usize] {
        &self.posts
    }

    pub fn entry(&self, p: usize, q: usize) -> f64 {
        match &self.rows[p] {
            LinkRow::Uniform => 1.0 / self.dim() as f64,
            LinkRow::Links(t) => f64::from(u8::from(t.binary_search(&q).is_ok())),
        }
    }

    pub fn is_uniform_row(&self, p: usize) -> bool {
        self.rows[p] == LinkRow::Uniform
    }

    pub fn edge_count(&self) -> usize {
        self.rows
            .iter()
            .map(|r| match r {
                LinkRow::Links(t) => t.len(),
                LinkRow::Uniform => 0,
            })
            .sum()
    }

    pub fn dense(&self) -> Vec<Vec<f64>> {
        (0..self.dim())
            .map(|p| (0..self.dim()).map(|q| self.entry(p, q)).collect())
            .collect()
    }

    /// `out = A·x`
    pub fn mul(&self, x: &[f64], out: &mut [f64]) {
        let mean = x.iter().sum::<f64>() / self.dim() as f64;
        for (o, row) in out.iter_mut().zip(&self.rows) {
            *o = match row {
                LinkRow::Uniform => mean,
                LinkRow::Links(t) => t.iter().map(|&q| x[q]).sum(),
            };
        }
    }

    /// `out = Aᵀ·x`
    pub fn mul_transpose(&self, x: &[f64], out: &mut [f64]) {
        let mut spread = 0.0;
        out.iter_mut().for_each(|o| *o = 0.0);
        for (p, row) in self.rows.iter().enumerate() {
            match row {
                LinkRow::Uniform => spread += x[p],
                LinkRow::Links(t) => t.iter().for_each(|&q| out[q] += x[p]),
            }
        }
        let spread = spread / self.dim() as f64;
        out.iter_mut().for_each(|o| *o += spread);
    }
}

/// Builds the slot's post link matrix from post-matched outlinks whose target
/// was also published in the slot.
pub fn build_post_link_graph(view: &SlotView<'_>, resolution: &LinkResolution) -> PostLinkGraph {
    let mut edges = Vec::new();
    for (local, &post) in view.posts().iter().enumerate() {
        for class in resolution.for_post(post) {
            if let LinkClass::PostMatched { post: target, .. } = *class {
                if let Some(target_local) = view.local_post(target) {
                    edges.push((local, target_local));
                }
            }
        }
    }
    PostLinkGraph::with_index(view.posts().to_vec(), edges)
}

/// Number of comments on each post of the view, the author's own included.
pub fn comment_counts(view: &SlotView<'_>) -> Vec<f64> {
    (0..view.posts().len())
        .map(|p| view.comments_on(p).len() as f64)
        .collect()
}

pub fn eloquence_weights(view: &SlotView<'_>, cfg: &IFinderConfig) -> Vec<f64> {
    (0..view.posts().len())
        .map(|p| cfg.eloquence.weight(view.post(p)))
        .collect()
}

/// Iterates post influence with eloquence fixed at 1.
pub fn rank_posts(
    graph: &PostLinkGraph,
    comments: &[f64],
    cfg: &IFinderConfig,
) -> Result<InfluenceVector, IFinderError> {
    rank_posts_weighted(graph, comments, &vec![1.0; graph.dim()], cfg)
}

pub fn rank_posts_weighted(
    graph: &PostLinkGraph,
    comments: &[f64],
    eloquence: &[f64],
    cfg: &IFinderConfig,
) -> Result<InfluenceVector, IFinderError> {
    cfg.validate()?;
    let n = graph.dim();
    for (name, len) in [
        ("comment vector", comments.len()),
        ("eloquence vector", eloquence.len()),
    ] {
        if len != n {
            return Err(IFinderError::DimensionMismatch {
                name,
                expected: n,
                actual: len,
            });
        }
    }
    let mut inflow = vec![0.0; n];
    let mut outflow = vec![0.0; n];
    let outcome = iterate(vec![cfg.init_value; n], cfg.convergence(), |x, next| {
        graph.mul_transpose(x, &mut inflow);
        graph.mul(x, &mut outflow);
        for p in 0..n {
            next[p] = eloquence[p]
                * (cfg.w_c * comments[p] + cfg.w_in * inflow[p] - cfg.w_out * outflow[p]);
        }
    });
    Ok(InfluenceVector::from_outcome(
        graph.posts().to_vec(),
        outcome,
    ))
}

/// How post scores combine into a blogger score.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Aggregate {
    #[default]
    Average,
    Max,
}

/// Ranks the view's bloggers by the mean or max influence of their posts.
pub fn aggregate_to_bloggers(
    view: &SlotView<'_>,
    post_scores: &InfluenceVector,
    strategy: Aggregate,
) -> Ranking {
    let n = view.bloggers().len();
    let mut sum = vec![0.0; n];
    let mut max = vec![f64::NEG_INFINITY; n];
    let mut count = vec![0usize; n];
    for (p, &score) in post_scores.scores.iter().enumerate() {
        let b = view.post_author_local(p);
        sum[b] += score;
        max[b] = max[b].max(score);
        count[b] += 1;
    }
    let entries = (0..n).map(|b| {
        let score = match strategy {
            Aggregate::Average => sum[b] / count[b] as f64,
            Aggregate::Max => max[b],
        };
        (view.blogger_id(b), score)
    });
    Ranking::from_scores(entries).expect("slot bloggers are distinct")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::fixtures::*;
    use crate::dataset::{resolve_links, slice_into_slots, slot_view, Dataset};

    fn close(a: &[f64], b: &[f64], tol: f64) -> bool {
        a.len() == b.len() && a.iter().zip(b).all(|(x, y)| (x - y).abs() <= tol)
    }

    #[test]
    fn two_post_matrix_has_dangling_fill() {
        let g = PostLinkGraph::from_edges(2, [(0, 1)]);
        assert_eq!(g.dense(), vec![vec![0.0, 1.0], vec![0.5, 0.5]]);
    }

    #[test]
    fn single_post_and_linkless_matrices_are_uniform() {
        assert_eq!(PostLinkGraph::from_edges(1, []).dense(), vec![vec![1.0]]);
        let third = 1.0 / 3.0;
        assert_eq!(
            PostLinkGraph::from_edges(3, []).dense(),
            vec![vec![third; 3]; 3]
        );
    }

    #[test]
    fn self_links_dropped_and_multi_links_collapse() {
        let g = PostLinkGraph::from_edges(2, [(0, 1), (0, 1), (1, 1)]);
        assert_eq!(g.dense(), vec![vec![0.0, 1.0], vec![0.5, 0.5]]);
        assert_eq!(g.edge_count(), 1);
    }

    #[test]
    fn sparse_products_match_dense() {
        let g = PostLinkGraph::from_edges(4, [(0, 1), (0, 3), (2, 0), (3, 2)]);
        let a = g.dense();
        let x = [0.3, -1.0, 2.5, 4.0];
        let (mut ax, mut atx) = ([0.0; 4], [0.0; 4]);
        g.mul(&x, &mut ax);
        g.mul_transpose(&x, &mut atx);
        for i in 0..4 {
            let row: f64 = (0..4).map(|j| a[i][j] * x[j]).sum();
            let col: f64 = (0..4).map(|j| a[j][i] * x[j]).sum();
            assert!((ax[i] - row).abs() < 1e-12);
            assert!((atx[i] - col).abs() < 1e-12);
        }
    }

    #[test]
    fn two_post_fixture_converges_to_zero_four() {
        let g = PostLinkGraph::from_edges(2, [(0, 1)]);
        let cfg = IFinderConfig {
            tau: 1e-14,
            ..IFinderConfig::default()
        };
        let out = rank_posts(&g, &[2.0, 4.0], &cfg).unwrap();
        assert!(out.converged);
        assert!(out.iterations_used < 100);
        assert!(close(&out.scores, &[0.0, 4.0], 1e-6), "{:?}", out.scores);
    }

    #[test]
    fn single_post_equals_its_comment_count() {
        let g = PostLinkGraph::from_edges(1, []);
        let out = rank_posts(&g, &[7.0], &IFinderConfig::default()).unwrap();
        assert!(out.converged);
        assert_eq!(out.scores, vec![7.0]);
        assert_eq!(out.iterations_used, 2);
    }

    #[test]
    fn zero_comments_decay_to_zero() {
        let g = PostLinkGraph::from_edges(3, [(0, 1), (1, 2)]);
        let cfg = IFinderConfig {
            w_in: 0.3,
            w_out: 0.3,
            w_c: 5.0,
            max_iter: 1000,
            ..IFinderConfig::default()
        };
        let out = rank_posts(&g, &[0.0; 3], &cfg).unwrap();
        assert!(close(&out.scores, &[0.0; 3], 1e-6), "{:?}", out.scores);
    }

    #[test]
    fn dimension_mismatch_is_an_error() {
        let g = PostLinkGraph::from_edges(2, []);
        assert!(matches!(
            rank_posts(&g, &[1.0], &IFinderConfig::default()),
            Err(IFinderError::DimensionMismatch {
                expected: 2,
                actual: 1,
                ..
            })
        ));
    }

    #[test]
    fn invalid_config_rejected() {
        let g = PostLinkGraph::from_edges(1, []);
        let cfg = IFinderConfig {
            tau: 0.0,
            ..IFinderConfig::default()
        };
        assert!(matches!(
            rank_posts(&g, &[1.0], &cfg),
            Err(IFinderError::Config(_))
        ));
    }

    #[test]
    fn budget_of_one_does_not_converge() {
        let g = PostLinkGraph::from_edges(2, [(0, 1)]);
        let cfg = IFinderConfig {
            max_iter: 1,
            ..IFinderConfig::default()
        };
        let out = rank_posts(&g, &[2.0, 4.0], &cfg).unwrap();
        assert!(!out.converged);
        assert_eq!(out.iterations_used, 1);
    }

    fn slot_fixture() -> Dataset {
        Dataset::new(
            "salon24.pl",
            vec![blogger("a"), blogger("b")],
            vec![
                post("p1", "a", ts(2008, 1, 2), &["http://b.salon24.pl/p2.html"]),
                post("p2", "b", ts(2008, 1, 3), &["http://a.salon24.pl/p1.html"]),
                post("p3", "a", ts(2008, 1, 4), &["http://a.salon24.pl/p3.html"]),
            ],
            vec![
                comment("c1", "p1", "b", ts(2008, 1, 5)),
                comment("c2", "p1", "a", ts(2008, 1, 5)),
                comment("c3", "p1", "x", ts(2008, 1, 5)),
                comment("c4", "p2", "a", ts(2008, 1, 5)),
            ],
        )
        .unwrap()
    }

    #[test]
    fn slot_graph_and_comment_counts() {
        let ds = slot_fixture();
        let slots = slice_into_slots(&ds, 1);
        let view = slot_view(&ds, slots[0]);
        let g = build_post_link_graph(&view, &resolve_links(&ds));
        let third = 1.0 / 3.0;
        assert_eq!(
            g.dense(),
            vec![
                vec![0.0, 1.0, 0.0],
                vec![1.0, 0.0, 0.0],
                vec![third, third, third]
            ]
        );
        // Author's own comment on p1 is counted.
        assert_eq!(comment_counts(&view), vec![3.0, 1.0, 0.0]);
    }

    #[test]
    fn aggregation_average_max_and_ties() {
        let ds = slot_fixture();
        let slots = slice_into_slots(&ds, 1);
        let view = slot_view(&ds, slots[0]);
        let scores = InfluenceVector {
            index: view.posts().to_vec(),
            scores: vec![0.0, 2.0, 4.0],
            iterations_used: 1,
            converged: true,
            final_similarity: 1.0,
        };
        let avg = aggregate_to_bloggers(&view, &scores, Aggregate::Average);
        assert_eq!(avg.ids(), &["a", "b"]);
        assert_eq!(avg.scores(), Some(&[2.0, 2.0][..]));
        let max = aggregate_to_bloggers(&view, &scores, Aggregate::Max);
        assert_eq!(max.scores(), Some(&[4.0, 2.0][..]));
    }
}
