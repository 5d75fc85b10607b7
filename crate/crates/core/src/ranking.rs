use std::collections::HashSet;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum RankingError {
    #[error("blogger {0:?} appears more than once")]
    DuplicateId(String),
    #[error("score list has {scores} entries for {ids} ids")]
    ScoreCount { ids: usize, scores: usize },
    #[error("scores increase at rank {0}")]
    NotSorted(usize),
}

/// Ordered list of distinct blogger ids, best first, with optional scores.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct Ranking {
    ids: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    scores: Option<Vec<f64>>,
}

impl Ranking {
    pub fn new(ids: Vec<String>) -> Result<Self, RankingError> {
        check_distinct(&ids)?;
        Ok(Self { ids, scores: None })
    }

    pub fn with_scores(ids: Vec<String>, scores: Vec<f64>) -> Result<Self, RankingError> {
        check_distinct(&ids)?;
        if ids.len() != scores.len() {
            return Err(RankingError::ScoreCount {
                ids: ids.len(),
                scores: scores.len(),
            });
        }
        if let Some(pos) = scores.windows(2).position(|w| w[1] > w[0]) {
            return Err(RankingError::NotSorted(pos + 2));
        }
        Ok(Self {
            ids,
            scores: Some(scores),
        })
    }

    /// Sorts descending by score, breaking ties by id ascending.
    pub fn from_scores<I, S>(entries: I) -> Result<Self, RankingError>
    where
        I: IntoIterator<Item = (S, f64)>,
        S: Into<String>,
    {
        let mut entries: Vec<(String, f64)> =
            entries.into_iter().map(|(id, s)| (id.into(), s)).collect();
        entries.sort_by(|a, b| b.1.total_cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
        let (ids, scores): (Vec<_>, Vec<_>) = entries.into_iter().unzip();
        check_distinct(&ids)?;
        Ok(Self {
            ids,
            scores: Some(scores),
        })
    }

    pub fn ids(&self) -> &[String] {
        &self.ids
    }

    pub fn scores(&self) -> Option<&[f64]> {
        self.scores.as_deref()
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    /// Top `k` entries (or all, when shorter).
    pub fn truncated(&self, k: usize) -> Self {
        let k = k.min(self.ids.len());
        Self {
            ids: self.ids[..k].to_vec(),
            scores: self.scores.as_ref().map(|s| s[..k].to_vec()),
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, Option<f64>)> + '_ {
        self.ids
            .iter()
            .enumerate()
            .map(|(i, id)| (id.as_str(), self.scores.as_ref().map(|s| s[i])))
    }
}

fn check_distinct(ids: &[String]) -> Result<(), RankingError> {
    let mut seen = HashSet::with_capacity(ids.len());
    for id in ids {
        if !seen.insert(id.as_str()) {
            return Err(RankingError::DuplicateId(id.clone()));
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ties_break_by_id() {
        let r = Ranking::from_scores([("b", 1.0), ("a", 1.0), ("c", 2.0)]).unwrap();
        assert_eq!(r.ids(), &["c", "a", "b"]);
    }

    #[test]
    fn rejects_duplicates_and_unsorted_scores() {
        assert_eq!(
            Ranking::new(vec!["a".into(), "a".into()]),
            Err(RankingError::DuplicateId("a".into()))
        );
        assert_eq!(
            Ranking::with_scores(vec!["a".into(), "b".into()], vec![1.0, 2.0]),
            Err(RankingError::NotSorted(2))
        );
    }

    #[test]
    fn truncation_keeps_scores_aligned() {
        let r = Ranking::from_scores([("a", 3.0), ("b", 2.0), ("c", 1.0)]).unwrap();
        let t = r.truncated(2);
        assert_eq!(t.ids(), &["a", "b"]);
        assert_eq!(t.scores(), Some(&[3.0, 2.0][..]));
        assert_eq!(r.truncated(10).len(), 3);
    }
}
