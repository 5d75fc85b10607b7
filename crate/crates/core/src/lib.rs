//! Influential blogger discovery over time-sliced blogosphere data.
//!
//! Two influence methods are provided:
//!
//! * [`ifinder`]: post-level influence driven by comment counts and the
//!   post-to-post link graph, aggregated to bloggers;
//! * [`pinf`]: blogger-level influence driven by the response each post gets
//!   and by who comments on whom.
//!
//! [`compare`] measures agreement between rankings (overlap, average overlap,
//! rank-biased overlap), [`stats`] produces descriptive reports of a dataset,
//! [`synth`] generates seeded synthetic datasets and [`pipeline`] wires it all
//! into file-to-file runs.

pub mod compare;
pub mod dataset;
pub mod ifinder;
pub mod iteration;
pub mod pinf;
pub mod pipeline;
pub mod ranking;
pub mod stats;
pub mod synth;

use serde::Serialize;
use thiserror::Error;

pub use ranking::{Ranking, RankingError};

/// An invalid configuration value.
#[derive(Debug, Clone, Error, PartialEq, Eq)]
#[error("invalid `{field}`: {reason}")]
pub struct ConfigError {
    pub field: String,
    pub reason: String,
}

impl ConfigError {
    pub fn new(field: impl Into<String>, reason: impl Into<String>) -> Self {
        Self {
            field: field.into(),
            reason: reason.into(),
        }
    }
}

/// Influence scores for the posts or bloggers of one slot.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InfluenceVector {
    /// Dataset indices of the scored entities, in score order.
    pub index: Vec<usize>,
    pub scores: Vec<f64>,
    pub iterations_used: usize,
    pub converged: bool,
    pub final_similarity: f64,
}

impl InfluenceVector {
    pub(crate) fn from_outcome(index: Vec<usize>, outcome: iteration::IterationOutcome) -> Self {
        Self {
            index,
            scores: outcome.scores,
            iterations_used: outcome.iterations,
            converged: outcome.converged,
            final_similarity: outcome.final_similarity,
        }
    }
}
