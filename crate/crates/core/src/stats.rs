//! Descriptive reports: link-matching funnel, self-reference leaderboards and
//! per-slot time series.

use std::collections::HashMap;
use std::fmt::Write as _;

use serde::Serialize;

use crate::dataset::{slot_of, Dataset, LinkClass, LinkResolution, TimeSlot};

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct LinkFunnelReport {
    pub all_outlinks: usize,
    /// Links into the portal (everything but external).
    pub internal_outlinks: usize,
    /// Links resolved to an author, including those resolved to a post.
    pub author_matched: usize,
    pub post_matched: usize,
    /// Post-matched links between two posts of the same author.
    pub post_matched_same_author: usize,
}

fn ratio(num: usize, den: usize) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

impl LinkFunnelReport {
    /// Each stage as a fraction of the previous one, stages 2 to 5.
    pub fn stage_fractions(&self) -> [f64; 4] {
        [
            ratio(self.internal_outlinks, self.all_outlinks),
            ratio(self.author_matched, self.internal_outlinks),
            ratio(self.post_matched, self.author_matched),
            ratio(self.post_matched_same_author, self.post_matched),
        ]
    }

    pub fn is_monotone(&self) -> bool {
        self.all_outlinks >= self.internal_outlinks
            && self.internal_outlinks >= self.author_matched
            && self.author_matched >= self.post_matched
            && self.post_matched >= self.post_matched_same_author
    }

    pub fn to_tsv(&self) -> String {
        let f = self.stage_fractions();
        let rows = [
            ("all_outlinks", self.all_outlinks, None),
            ("internal_outlinks", self.internal_outlinks, Some(f[0])),
            ("author_matched", self.author_matched, Some(f[1])),
            ("post_matched", self.post_matched, Some(f[2])),
            (
                "post_matched_same_author",
                self.post_matched_same_author,
                Some(f[3]),
            ),
        ];
        let mut out = String::from("stage\tcount\tfraction_of_previous\n");
        for (name, count, frac) in rows {
            let frac = frac.map_or(String::new(), |v| v.to_string());
            writeln!(out, "{name}\t{count}\t{frac}").unwrap();
        }
        out
    }
}

pub fn link_funnel(dataset: &Dataset, resolution: &LinkResolution) -> LinkFunnelReport {
    let mut r = LinkFunnelReport::default();
    for (source, class) in resolution.iter() {
        r.all_outlinks += 1;
        r.internal_outlinks += usize::from(class.is_internal());
        r.author_matched += usize::from(class.target_author().is_some());
        if let LinkClass::PostMatched { author, .. } = class {
            r.post_matched += 1;
            r.post_matched_same_author += usize::from(author == dataset.post_author(source));
        }
    }
    r
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SelfReferenceRow {
    pub blogger_id: String,
    pub display_name: String,
    pub total: usize,
    pub self_count: usize,
    pub self_fraction: f64,
}

fn leaderboard(
    dataset: &Dataset,
    tallies: HashMap<usize, (usize, usize)>,
    k: usize,
) -> Vec<SelfReferenceRow> {
    let mut rows: Vec<SelfReferenceRow> = tallies
        .into_iter()
        .filter(|(_, (total, _))| *total > 0)
        .map(|(b, (total, self_count))| {
            let blogger = &dataset.bloggers()[b];
            SelfReferenceRow {
                blogger_id: blogger.id.clone(),
                display_name: blogger.display_name.clone(),
                total,
                self_count,
                self_fraction: self_count as f64 / total as f64,
            }
        })
        .collect();
    rows.sort_by(|a, b| {
        b.total
            .cmp(&a.total)
            .then_with(|| a.blogger_id.cmp(&b.blogger_id))
    });
    rows.truncate(k);
    rows
}

/// Bloggers with the most inbound post-matched links and how many of them
/// come from their own posts.
pub fn self_link_leaderboard(
    dataset: &Dataset,
    resolution: &LinkResolution,
    k: usize,
) -> Vec<SelfReferenceRow> {
    let mut tallies: HashMap<usize, (usize, usize)> = HashMap::new();
    for (source, class) in resolution.iter() {
        if let LinkClass::PostMatched { author, .. } = class {
            let t = tallies.entry(author).or_default();
            t.0 += 1;
            t.1 += usize::from(author == dataset.post_author(source));
        }
    }
    leaderboard(dataset, tallies, k)
}

/// Bloggers with the most comments received and how many they wrote
/// themselves in their own threads.
pub fn self_comment_leaderboard(dataset: &Dataset, k: usize) -> Vec<SelfReferenceRow> {
    let mut tallies: HashMap<usize, (usize, usize)> = HashMap::new();
    for c in 0..dataset.comments().len() {
        let t = tallies
            .entry(dataset.post_author(dataset.comment_post(c)))
            .or_default();
        t.0 += 1;
        t.1 += usize::from(dataset.is_self_comment(c));
    }
    leaderboard(dataset, tallies, k)
}

pub fn leaderboard_tsv(rows: &[SelfReferenceRow]) -> String {
    let mut out = String::from("blogger_id\tdisplay_name\ttotal\tself\tself_fraction\n");
    for r in rows {
        writeln!(
            out,
            "{}\t{}\t{}\t{}\t{}",
            r.blogger_id, r.display_name, r.total, r.self_count, r.self_fraction
        )
        .unwrap();
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SeriesMeasure {
    /// Post-matched links whose source post was published in the slot.
    MatchedPostInlinks,
    /// Comments written in the slot.
    Comments,
    CommentsPerPost,
    PostsPerBlogger,
    /// Portal links that matched nothing, by source post's slot.
    InternalUnmatched,
}

impl SeriesMeasure {
    pub const ALL: [SeriesMeasure; 5] = [
        SeriesMeasure::MatchedPostInlinks,
        SeriesMeasure::Comments,
        SeriesMeasure::CommentsPerPost,
        SeriesMeasure::PostsPerBlogger,
        SeriesMeasure::InternalUnmatched,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            SeriesMeasure::MatchedPostInlinks => "matched_post_inlinks",
            SeriesMeasure::Comments => "comments",
            SeriesMeasure::CommentsPerPost => "comments_per_post",
            SeriesMeasure::PostsPerBlogger => "posts_per_blogger",
            SeriesMeasure::InternalUnmatched => "internal_unmatched",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SlotSeriesPoint {
    pub slot: usize,
    pub value: f64,
    /// Ratio with a zero denominator, reported as 0.
    pub degenerate: bool,
}

#[derive(Debug, Default, Clone)]
struct SlotTally {
    posts: usize,
    comments: usize,
    authors: Vec<usize>,
    matched_post_inlinks: usize,
    internal_unmatched: usize,
}

/// One point per slot in `slots`, each event attributed by its own timestamp.
/// Pass only the analyzed slots; `slots` must be contiguous.
pub fn slot_series(
    dataset: &Dataset,
    resolution: &LinkResolution,
    slots: &[TimeSlot],
    measure: SeriesMeasure,
) -> Vec<SlotSeriesPoint> {
    let tallies = tally(dataset, resolution, slots);
    slots
        .iter()
        .zip(tallies)
        .map(|(slot, t)| {
            let (value, degenerate) = match measure {
                SeriesMeasure::MatchedPostInlinks => (t.matched_post_inlinks as f64, false),
                SeriesMeasure::Comments => (t.comments as f64, false),
                SeriesMeasure::InternalUnmatched => (t.internal_unmatched as f64, false),
                SeriesMeasure::CommentsPerPost => (ratio(t.comments, t.posts), t.posts == 0),
                SeriesMeasure::PostsPerBlogger => {
                    (ratio(t.posts, t.authors.len()), t.authors.is_empty())
                }
            };
            SlotSeriesPoint {
                slot: slot.index,
                value,
                degenerate,
            }
        })
        .collect()
}

fn tally(dataset: &Dataset, resolution: &LinkResolution, slots: &[TimeSlot]) -> Vec<SlotTally> {
    let mut tallies = vec![SlotTally::default(); slots.len()];
    for (p, post) in dataset.posts().iter().enumerate() {
        let Some(s) = slot_of(slots, post.published_at) else {
            continue;
        };
        let t = &mut tallies[s];
        t.posts += 1;
        t.authors.push(dataset.post_author(p));
        for class in resolution.for_post(p) {
            match class {
                LinkClass::PostMatched { .. } => t.matched_post_inlinks += 1,
                LinkClass::InternalUnmatched => t.internal_unmatched += 1,
                _ => {}
            }
        }
    }
    for c in dataset.comments() {
        if let Some(s) = slot_of(slots, c.created_at) {
            tallies[s].comments += 1;
        }
    }
    for t in &mut tallies {
        t.authors.sort_unstable();
        t.authors.dedup();
    }
    tallies
}

/// All measures side by side, one row per slot.
pub fn series_tsv(dataset: &Dataset, resolution: &LinkResolution, slots: &[TimeSlot]) -> String {
    let columns: Vec<Vec<SlotSeriesPoint>> = SeriesMeasure::ALL
        .iter()
        .map(|&m| slot_series(dataset, resolution, slots, m))
        .collect();
    let mut out = String::from("slot\tstart");
    for m in SeriesMeasure::ALL {
        write!(out, "\t{}", m.name()).unwrap();
    }
    out.push_str("\tdegenerate\n");
    for (i, slot) in slots.iter().enumerate() {
        write!(out, "{}\t{}", slot.index, slot.start.format("%Y-%m-%d")).unwrap();
        for col in &columns {
            write!(out, "\t{}", col[i].value).unwrap();
        }
        let degenerate = columns.iter().any(|c| c[i].degenerate);
        writeln!(out, "\t{}", u8::from(degenerate)).unwrap();
    }
    out
}
