//! Agreement between rankings: overlap, average overlap and finite-depth
//! rank-biased overlap, plus per-slot comparison series and top-k frequency
//! rankings.

use std::collections::{BTreeMap, HashSet};
use std::hash::Hash;

use serde::Serialize;
use thiserror::Error;

use crate::ranking::Ranking;

pub const DEFAULT_PERSISTENCE: f64 = 0.85;
pub const DEFAULT_DEPTH: usize = 15;

#[derive(Debug, Error, PartialEq)]
pub enum CompareError {
    #[error("rankings have different lengths ({0} and {1})")]
    LengthMismatch(usize, usize),
    #[error("depth {depth} outside 1..={len}")]
    DepthOutOfRange { depth: usize, len: usize },
    #[error("persistence {0} outside (0, 1)")]
    InvalidPersistence(f64),
    #[error("rankings cover different slots: {0:?} vs {1:?}")]
    SlotMismatch(Vec<usize>, Vec<usize>),
}

fn same_len<T>(s: &[T], t: &[T]) -> Result<usize, CompareError> {
    if s.len() == t.len() {
        Ok(s.len())
    } else {
        Err(CompareError::LengthMismatch(s.len(), t.len()))
    }
}

/// Size of the intersection of two equally long lists.
pub fn overlap<T: Eq + Hash>(s: &[T], t: &[T]) -> Result<usize, CompareError> {
    same_len(s, t)?;
    let left: HashSet<&T> = s.iter().collect();
    Ok(t.iter().filter(|x| left.contains(x)).count())
}

/// Overlap of the depth-`d` prefixes divided by `d`.
pub fn proportion_at_depth<T: Eq + Hash>(s: &[T], t: &[T], d: usize) -> Result<f64, CompareError> {
    let len = same_len(s, t)?;
    if d == 0 || d > len {
        return Err(CompareError::DepthOutOfRange { depth: d, len });
    }
    let left: HashSet<&T> = s[..d].iter().collect();
    let common = t[..d].iter().filter(|x| left.contains(x)).count();
    Ok(common as f64 / d as f64)
}

/// Prefix overlaps `O(S, T, d)` for `d = 1..=N`, in one sweep.
fn prefix_overlaps<T: Eq + Hash>(s: &[T], t: &[T]) -> Vec<usize> {
    let mut seen_s = HashSet::with_capacity(s.len());
    let mut seen_t = HashSet::with_capacity(t.len());
    let mut common = 0;
    s.iter()
        .zip(t)
        .map(|(a, b)| {
            if a == b {
                common += 1;
            } else {
                common += usize::from(seen_t.contains(a)) + usize::from(seen_s.contains(b));
            }
            seen_s.insert(a);
            seen_t.insert(b);
            common
        })
        .collect()
}

/// Mean proportion over all depths `1..=N`. Empty lists score 0.
pub fn average_overlap<T: Eq + Hash>(s: &[T], t: &[T]) -> Result<f64, CompareError> {
    let n = same_len(s, t)?;
    if n == 0 {
        return Ok(0.0);
    }
    let total: f64 = prefix_overlaps(s, t)
        .into_iter()
        .enumerate()
        .map(|(i, o)| o as f64 / (i + 1) as f64)
        .sum();
    Ok(total / n as f64)
}

/// `(1 − p) · Σ_{d=1..N} p^(d−1) · A(S, T, d)`, truncated at the list length
/// (no extrapolation of the unseen tail).
pub fn rank_biased_overlap<T: Eq + Hash>(s: &[T], t: &[T], p: f64) -> Result<f64, CompareError> {
    if !(p > 0.0 && p < 1.0) {
        return Err(CompareError::InvalidPersistence(p));
    }
    same_len(s, t)?;
    let mut weight = 1.0;
    let mut sum = 0.0;
    for (i, o) in prefix_overlaps(s, t).into_iter().enumerate() {
        sum += weight * o as f64 / (i + 1) as f64;
        weight *= p;
    }
    Ok((1.0 - p) * sum)
}

/// All three metrics for one pair of rankings at a common depth.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RankComparison {
    /// Depth actually compared (may be below the requested depth).
    pub depth: usize,
    pub overlap: usize,
    /// `overlap / depth`, 0 at depth 0.
    pub normalized_overlap: f64,
    pub average_overlap: f64,
    pub rbo: f64,
    pub p: f64,
}

impl RankComparison {
    /// Compares the top `k` of both rankings, truncating to the shorter list.
    pub fn at_depth(a: &Ranking, b: &Ranking, k: usize, p: f64) -> Result<Self, CompareError> {
        let depth = k.min(a.len()).min(b.len());
        let (s, t) = (&a.ids()[..depth], &b.ids()[..depth]);
        let overlap = overlap(s, t)?;
        Ok(Self {
            depth,
            overlap,
            normalized_overlap: if depth == 0 {
                0.0
            } else {
                overlap as f64 / depth as f64
            },
            average_overlap: average_overlap(s, t)?,
            rbo: rank_biased_overlap(s, t, p)?,
            p,
        })
    }
}

/// The ranking a method produced for one time slot.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SlotRanking {
    pub slot: usize,
    pub ranking: Ranking,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SlotComparison {
    pub slot: usize,
    #[serde(flatten)]
    pub metrics: RankComparison,
}

/// Per-slot agreement between two methods, both truncated to depth `k`.
pub fn compare_methods_over_time(
    a: &[SlotRanking],
    b: &[SlotRanking],
    k: usize,
    p: f64,
) -> Result<Vec<SlotComparison>, CompareError> {
    let slots_a: Vec<usize> = a.iter().map(|r| r.slot).collect();
    let slots_b: Vec<usize> = b.iter().map(|r| r.slot).collect();
    if slots_a != slots_b {
        return Err(CompareError::SlotMismatch(slots_a, slots_b));
    }
    a.iter()
        .zip(b)
        .map(|(ra, rb)| {
            Ok(SlotComparison {
                slot: ra.slot,
                metrics: RankComparison::at_depth(&ra.ranking, &rb.ranking, k, p)?,
            })
        })
        .collect()
}

/// How often each blogger made a method's per-slot top k.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct FrequencyRanking {
    pub slots: usize,
    pub k: usize,
    /// `(blogger id, count)`, descending by count, ties by id.
    pub entries: Vec<(String, usize)>,
}

impl FrequencyRanking {
    pub fn ranking(&self) -> Ranking {
        Ranking::new(self.entries.iter().map(|(id, _)| id.clone()).collect())
            .expect("frequency entries are distinct")
    }
}

pub fn frequency_ranking(per_slot: &[SlotRanking], k: usize) -> FrequencyRanking {
    let mut counts: BTreeMap<&str, usize> = BTreeMap::new();
    for r in per_slot {
        for id in r.ranking.ids().iter().take(k) {
            *counts.entry(id).or_default() += 1;
        }
    }
    let mut entries: Vec<(String, usize)> = counts
        .into_iter()
        .map(|(id, c)| (id.to_string(), c))
        .collect();
    entries.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
    FrequencyRanking {
        slots: per_slot.len(),
        k,
        entries,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const S: [&str; 3] = ["a", "b", "c"];
    const T: [&str; 3] = ["b", "c", "d"];
    const U: [&str; 3] = ["x", "y", "z"];

    #[test]
    fn overlap_examples() {
        assert_eq!(overlap(&S, &T), Ok(2));
        assert_eq!(overlap(&S, &S), Ok(3));
        assert_eq!(overlap(&S, &U), Ok(0));
        assert_eq!(
            overlap(&S, &T[..2]),
            Err(CompareError::LengthMismatch(3, 2))
        );
    }

    #[test]
    fn proportion_examples() {
        assert_eq!(proportion_at_depth(&S, &T, 1), Ok(0.0));
        assert_eq!(proportion_at_depth(&S, &T, 2), Ok(0.5));
        assert!((proportion_at_depth(&S, &T, 3).unwrap() - 2.0 / 3.0).abs() < 1e-15);
        assert!(matches!(
            proportion_at_depth(&S, &T, 0),
            Err(CompareError::DepthOutOfRange { .. })
        ));
        assert!(matches!(
            proportion_at_depth(&S, &T, 4),
            Err(CompareError::DepthOutOfRange { .. })
        ));
    }

    #[test]
    fn average_overlap_examples() {
        assert!((average_overlap(&S, &T).unwrap() - 0.388_888_888_888_889).abs() < 1e-12);
        assert_eq!(average_overlap(&S, &S), Ok(1.0));
        assert_eq!(average_overlap(&S, &U), Ok(0.0));
    }

    #[test]
    fn rbo_examples() {
        assert!((rank_biased_overlap(&S, &T, 0.85).unwrap() - 0.136).abs() < 1e-12);
        assert_eq!(rank_biased_overlap(&S, &U, 0.85), Ok(0.0));
        let ids: Vec<String> = (0..15).map(|i| format!("b{i}")).collect();
        let same = rank_biased_overlap(&ids, &ids, 0.85).unwrap();
        assert!((same - (1.0 - 0.85f64.powi(15))).abs() < 1e-12);
        assert!((same - 0.9126).abs() < 1e-4);
        for p in [0.0, 1.0, -0.5, f64::NAN] {
            assert!(matches!(
                rank_biased_overlap(&S, &T, p),
                Err(CompareError::InvalidPersistence(_))
            ));
        }
    }

    fn ranking(ids: &[&str]) -> Ranking {
        Ranking::new(ids.iter().map(|s| s.to_string()).collect()).unwrap()
    }

    #[test]
    fn series_on_worked_triple() {
        let a = [SlotRanking {
            slot: 0,
            ranking: ranking(&S),
        }];
        let b = [SlotRanking {
            slot: 0,
            ranking: ranking(&T),
        }];
        let series = compare_methods_over_time(&a, &b, 3, 0.85).unwrap();
        let m = &series[0].metrics;
        assert_eq!(m.depth, 3);
        assert!((m.normalized_overlap - 2.0 / 3.0).abs() < 1e-12);
        assert!((m.average_overlap - 0.3889).abs() < 1e-4);
        assert!((m.rbo - 0.136).abs() < 1e-12);
    }

    #[test]
    fn series_truncates_to_shorter_list_and_checks_slots() {
        let a = [SlotRanking {
            slot: 4,
            ranking: ranking(&["a", "b"]),
        }];
        let b = [SlotRanking {
            slot: 4,
            ranking: ranking(&["a", "b", "c"]),
        }];
        let s = compare_methods_over_time(&a, &b, 15, 0.85).unwrap();
        assert_eq!(s[0].metrics.depth, 2);
        assert_eq!(s[0].metrics.normalized_overlap, 1.0);

        let c = [SlotRanking {
            slot: 5,
            ranking: ranking(&["a"]),
        }];
        assert!(matches!(
            compare_methods_over_time(&a, &c, 15, 0.85),
            Err(CompareError::SlotMismatch(..))
        ));

        let empty = [SlotRanking {
            slot: 4,
            ranking: Ranking::default(),
        }];
        let z = compare_methods_over_time(&a, &empty, 15, 0.85).unwrap();
        assert_eq!(z[0].metrics.depth, 0);
        assert_eq!(z[0].metrics.rbo, 0.0);
    }

    #[test]
    fn frequency_counts_top_k_membership() {
        let slots = [
            SlotRanking {
                slot: 0,
                ranking: ranking(&["a", "b", "c"]),
            },
            SlotRanking {
                slot: 1,
                ranking: ranking(&["c", "b", "a"]),
            },
            SlotRanking {
                slot: 2,
                ranking: ranking(&["a", "d", "c"]),
            },
        ];
        let f = frequency_ranking(&slots, 2);
        assert_eq!(f.slots, 3);
        assert_eq!(
            f.entries,
            vec![
                ("a".into(), 2),
                ("b".into(), 2),
                ("c".into(), 1),
                ("d".into(), 1)
            ]
        );
        assert_eq!(f.ranking().ids()[0], "a");
        assert!(frequency_ranking(&slots, 0).entries.is_empty());
    }
}
