//! File-to-file runs: generate, rank, compare and report.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::compare::{
    compare_methods_over_time, frequency_ranking, CompareError, FrequencyRanking, RankComparison,
    SlotComparison, SlotRanking,
};
use crate::dataset::{
    analyzed_slots, parse_dataset, resolve_links, slice_into_slots, slot_view_with, write_dataset,
    CommentAttribution, Dataset, DatasetError, DatasetMeta, DatasetPaths, LinkResolution, TimeSlot,
};
use crate::ifinder::{self, Aggregate, IFinderConfig, IFinderError};
use crate::pinf::{self, PInfConfig, PInfError};
use crate::ranking::Ranking;
use crate::stats::{self, LinkFunnelReport, SelfReferenceRow};
use crate::synth::{synth_generate, SynthConfig};
use crate::ConfigError;

pub const RANKINGS_HEADER: &str = "slot\trank\tblogger_id\tscore";

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error(transparent)]
    Dataset(#[from] DatasetError),
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Compare(#[from] CompareError),
    #[error(transparent)]
    IFinder(#[from] IFinderError),
    #[error(transparent)]
    PInf(#[from] PInfError),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}:{line}: {message}")]
    RankingFile {
        path: PathBuf,
        line: usize,
        message: String,
    },
    #[error("no source host given and {0} has no meta.json")]
    MissingSourceHost(PathBuf),
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> PipelineError + '_ {
    move |source| PipelineError::Io {
        path: path.to_path_buf(),
        source,
    }
}

fn write_file(path: &Path, contents: &str) -> Result<(), PipelineError> {
    fs::write(path, contents).map_err(io_err(path))
}

fn create_dir(path: &Path) -> Result<(), PipelineError> {
    fs::create_dir_all(path).map_err(io_err(path))
}

fn to_json<T: Serialize>(value: &T) -> String {
    serde_json::to_string_pretty(value).expect("report types serialize") + "\n"
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    IFinder,
    PInf,
}

impl Method {
    pub fn name(&self) -> &'static str {
        match self {
            Method::IFinder => "ifinder",
            Method::PInf => "pinf",
        }
    }
}

/// Slotting options shared by every command.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SlotOptions {
    pub months: u32,
    pub exclude_partial: bool,
    pub attribution: CommentAttribution,
}

impl Default for SlotOptions {
    fn default() -> Self {
        Self {
            months: 1,
            exclude_partial: true,
            attribution: CommentAttribution::SlotLocal,
        }
    }
}

impl SlotOptions {
    fn validate(&self) -> Result<(), ConfigError> {
        if self.months == 0 {
            return Err(ConfigError::new("slot_months", "must be at least 1"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct RankOptions {
    pub method: Method,
    pub k: usize,
    pub ifinder: IFinderConfig,
    pub aggregate: Aggregate,
    pub pinf: PInfConfig,
    pub slots: SlotOptions,
    /// Worker threads for slot-level parallelism; 0 picks a default.
    #[serde(skip)]
    pub workers: usize,
}

impl Default for RankOptions {
    fn default() -> Self {
        Self {
            method: Method::PInf,
            k: crate::compare::DEFAULT_DEPTH,
            ifinder: IFinderConfig::default(),
            aggregate: Aggregate::Average,
            pinf: PInfConfig::default(),
            slots: SlotOptions::default(),
            workers: 0,
        }
    }
}

impl RankOptions {
    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.k == 0 {
            return Err(ConfigError::new("k", "must be at least 1"));
        }
        self.slots.validate()?;
        match self.method {
            Method::IFinder => self.ifinder.validate(),
            Method::PInf => self.pinf.validate(),
        }
    }
}

/// What happened in one slot of a ranking run.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SlotRunStats {
    pub slot: usize,
    pub start: String,
    pub posts: usize,
    pub bloggers: usize,
    pub comments: usize,
    /// Side of the post link matrix.
    pub ifinder_dim: usize,
    /// Side of the blogger comment matrix.
    pub pinf_dim: usize,
    pub iterations: usize,
    pub converged: bool,
    pub final_similarity: f64,
}

#[derive(Debug, Clone)]
pub struct RankRun {
    pub rankings: Vec<SlotRanking>,
    pub slots: Vec<SlotRunStats>,
    pub total_slots: usize,
}

impl RankRun {
    pub fn all_converged(&self) -> bool {
        self.slots.iter().all(|s| s.converged)
    }
}

fn rank_slot(
    dataset: &Dataset,
    resolution: &LinkResolution,
    slot: TimeSlot,
    opts: &RankOptions,
) -> Result<(SlotRanking, SlotRunStats), PipelineError> {
    let view = slot_view_with(dataset, slot, opts.slots.attribution);
    let (ranking, influence) = if view.is_empty() {
        (Ranking::default(), None)
    } else {
        match opts.method {
            Method::IFinder => {
                let graph = ifinder::build_post_link_graph(&view, resolution);
                let gamma = ifinder::comment_counts(&view);
                let eloquence = ifinder::eloquence_weights(&view, &opts.ifinder);
                let posts =
                    ifinder::rank_posts_weighted(&graph, &gamma, &eloquence, &opts.ifinder)?;
                let ranking = ifinder::aggregate_to_bloggers(&view, &posts, opts.aggregate);
                (ranking, Some(posts))
            }
            Method::PInf => {
                let (influence, ranking) = pinf::rank_bloggers(&view, &opts.pinf)?;
                (ranking, Some(influence))
            }
        }
    };
    let stats = SlotRunStats {
        slot: slot.index,
        start: slot.start.format("%Y-%m-%d").to_string(),
        posts: view.posts().len(),
        bloggers: view.bloggers().len(),
        comments: view.comments().len(),
        ifinder_dim: view.posts().len(),
        pinf_dim: view.bloggers().len(),
        iterations: influence.as_ref().map_or(0, |i| i.iterations_used),
        converged: influence.as_ref().is_none_or(|i| i.converged),
        final_similarity: influence.as_ref().map_or(1.0, |i| i.final_similarity),
    };
    Ok((
        SlotRanking {
            slot: slot.index,
            ranking: ranking.truncated(opts.k),
        },
        stats,
    ))
}

/// Ranks every analyzed slot of `dataset`.
pub fn rank_dataset(dataset: &Dataset, opts: &RankOptions) -> Result<RankRun, PipelineError> {
    opts.validate()?;
    let all = slice_into_slots(dataset, opts.slots.months);
    let slots = analyzed_slots(&all, opts.slots.exclude_partial);
    let resolution = resolve_links(dataset);
    let work = || -> Result<Vec<_>, PipelineError> {
        slots
            .par_iter()
            .map(|&slot| rank_slot(dataset, &resolution, slot, opts))
            .collect()
    };
    let results = if opts.workers == 0 {
        work()?
    } else {
        rayon::ThreadPoolBuilder::new()
            .num_threads(opts.workers)
            .build()
            .map_err(|e| ConfigError::new("workers", e.to_string()))?
            .install(work)?
    };
    let (rankings, stats) = results.into_iter().unzip();
    Ok(RankRun {
        rankings,
        slots: stats,
        total_slots: all.len(),
    })
}

pub fn rankings_tsv(rankings: &[SlotRanking]) -> String {
    let slots: Vec<String> = rankings.iter().map(|r| r.slot.to_string()).collect();
    let mut out = format!("# slots={}\n{RANKINGS_HEADER}\n", slots.join(","));
    for r in rankings {
        for (rank, (id, score)) in r.ranking.iter().enumerate() {
            let score = score.map_or(String::new(), |s| s.to_string());
            writeln!(out, "{}\t{}\t{}\t{}", r.slot, rank + 1, id, score).unwrap();
        }
    }
    out
}

/// Reads a file written by [`rankings_tsv`].
pub fn read_rankings(path: &Path) -> Result<Vec<SlotRanking>, PipelineError> {
    let text = fs::read_to_string(path).map_err(io_err(path))?;
    let bad = |line: usize, message: String| PipelineError::RankingFile {
        path: path.to_path_buf(),
        line,
        message,
    };
    let mut slots: Vec<usize> = Vec::new();
    let mut rows: Vec<(usize, usize, String, Option<f64>)> = Vec::new();
    for (n, line) in text.lines().enumerate() {
        let n = n + 1;
        if let Some(list) = line.strip_prefix("# slots=") {
            slots = list
                .split(',')
                .filter(|s| !s.is_empty())
                .map(|s| s.parse().map_err(|_| bad(n, format!("bad slot {s:?}"))))
                .collect::<Result<_, _>>()?;
            continue;
        }
        if line.is_empty() || line.starts_with('#') || line == RANKINGS_HEADER {
            continue;
        }
        let fields: Vec<&str> = line.split('\t').collect();
        let [slot, rank, id, score] = fields[..] else {
            return Err(bad(n, format!("expected 4 fields, found {}", fields.len())));
        };
        let slot: usize = slot
            .parse()
            .map_err(|_| bad(n, format!("bad slot {slot:?}")))?;
        let rank: usize = rank
            .parse()
            .map_err(|_| bad(n, format!("bad rank {rank:?}")))?;
        let score = if score.is_empty() {
            None
        } else {
            Some(
                score
                    .parse()
                    .map_err(|_| bad(n, format!("bad score {score:?}")))?,
            )
        };
        rows.push((slot, rank, id.to_string(), score));
        if !slots.contains(&slot) {
            slots.push(slot);
        }
    }
    slots.sort_unstable();
    rows.sort_by_key(|r| (r.0, r.1));
    slots
        .into_iter()
        .map(|slot| {
            let entries: Vec<_> = rows.iter().filter(|r| r.0 == slot).collect();
            let ids = entries.iter().map(|r| r.2.clone()).collect();
            let ranking = if entries.iter().all(|r| r.3.is_some()) {
                Ranking::with_scores(ids, entries.iter().map(|r| r.3.unwrap()).collect())
            } else {
                Ranking::new(ids)
            }
            .map_err(|e| bad(0, format!("slot {slot}: {e}")))?;
            Ok(SlotRanking { slot, ranking })
        })
        .collect()
}

#[derive(Debug, Clone, Serialize)]
pub struct StageTiming {
    pub stage: String,
    pub seconds: f64,
}

/// Everything needed to reproduce a run.
#[derive(Debug, Clone, Serialize)]
pub struct RunManifest {
    pub command: String,
    pub version: String,
    pub inputs: Vec<String>,
    pub config: serde_json::Value,
    pub total_slots: usize,
    pub analyzed_slots: usize,
    pub slots: Vec<SlotRunStats>,
    pub outputs: Vec<String>,
    pub timings: Vec<StageTiming>,
}

struct Stopwatch(Vec<StageTiming>, Instant);

impl Stopwatch {
    fn new() -> Self {
        Self(Vec::new(), Instant::now())
    }

    fn lap(&mut self, stage: &str) {
        let now = Instant::now();
        self.0.push(StageTiming {
            stage: stage.to_string(),
            seconds: (now - self.1).as_secs_f64(),
        });
        self.1 = now;
    }
}

fn load(input: &Path, source_host: Option<&str>) -> Result<(Dataset, DatasetPaths), PipelineError> {
    let host = match source_host {
        Some(h) => h.to_string(),
        None => {
            DatasetMeta::read(input)?
                .ok_or_else(|| PipelineError::MissingSourceHost(input.to_path_buf()))?
                .source_host
        }
    };
    let paths = DatasetPaths::in_dir(input);
    Ok((parse_dataset(&paths, &host)?, paths))
}

fn path_strings(paths: &DatasetPaths) -> Vec<String> {
    [&paths.bloggers, &paths.posts, &paths.comments]
        .iter()
        .map(|p| p.display().to_string())
        .collect()
}

#[derive(Debug, Clone)]
pub struct RankOutput {
    pub run: RankRun,
    pub manifest: RunManifest,
    pub rankings_path: PathBuf,
    pub manifest_path: PathBuf,
}

/// Reads the dataset in `input`, ranks every analyzed slot and writes
/// `rankings_<method>.tsv` and `manifest_<method>.json` into `output`.
pub fn run_rank(
    input: &Path,
    output: &Path,
    source_host: Option<&str>,
    opts: &RankOptions,
) -> Result<RankOutput, PipelineError> {
    opts.validate()?;
    let mut clock = Stopwatch::new();
    let (dataset, paths) = load(input, source_host)?;
    clock.lap("load");
    let run = rank_dataset(&dataset, opts)?;
    clock.lap("rank");

    create_dir(output)?;
    let rankings_path = output.join(format!("rankings_{}.tsv", opts.method.name()));
    let manifest_path = output.join(format!("manifest_{}.json", opts.method.name()));
    write_file(&rankings_path, &rankings_tsv(&run.rankings))?;
    clock.lap("write");

    let manifest = RunManifest {
        command: "rank".into(),
        version: env!("CARGO_PKG_VERSION").into(),
        inputs: path_strings(&paths),
        config: serde_json::to_value(opts).expect("options serialize"),
        total_slots: run.total_slots,
        analyzed_slots: run.slots.len(),
        slots: run.slots.clone(),
        outputs: vec![rankings_path.display().to_string()],
        timings: clock.0,
    };
    write_file(&manifest_path, &to_json(&manifest))?;
    Ok(RankOutput {
        run,
        manifest,
        rankings_path,
        manifest_path,
    })
}

/// Agreement between the two methods' most frequent top-k bloggers.
#[derive(Debug, Clone, Serialize)]
pub struct CompareSummary {
    #[serde(flatten)]
    pub metrics: RankComparison,
    pub mean_normalized_overlap: f64,
    pub mean_average_overlap: f64,
    pub mean_rbo: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct CompareReport {
    pub k: usize,
    pub p: f64,
    pub summary: CompareSummary,
    pub series: Vec<SlotComparison>,
    pub frequency_a: FrequencyRanking,
    pub frequency_b: FrequencyRanking,
}

pub fn compare_rankings(
    a: &[SlotRanking],
    b: &[SlotRanking],
    k: usize,
    p: f64,
) -> Result<CompareReport, PipelineError> {
    if k == 0 {
        return Err(ConfigError::new("k", "must be at least 1").into());
    }
    let series = compare_methods_over_time(a, b, k, p)?;
    let frequency_a = frequency_ranking(a, k);
    let frequency_b = frequency_ranking(b, k);
    let metrics = RankComparison::at_depth(&frequency_a.ranking(), &frequency_b.ranking(), k, p)?;
    let mean = |f: fn(&RankComparison) -> f64| {
        if series.is_empty() {
            0.0
        } else {
            series.iter().map(|s| f(&s.metrics)).sum::<f64>() / series.len() as f64
        }
    };
    let summary = CompareSummary {
        mean_normalized_overlap: mean(|m| m.normalized_overlap),
        mean_average_overlap: mean(|m| m.average_overlap),
        mean_rbo: mean(|m| m.rbo),
        metrics,
    };
    Ok(CompareReport {
        k,
        p,
        summary,
        series,
        frequency_a,
        frequency_b,
    })
}

impl CompareReport {
    pub fn summary_tsv(&self) -> String {
        let m = &self.summary.metrics;
        let mut out = String::from("metric\tvalue\n");
        for (name, value) in [
            ("depth", m.depth.to_string()),
            ("overlap", m.overlap.to_string()),
            ("normalized_overlap", m.normalized_overlap.to_string()),
            ("average_overlap", m.average_overlap.to_string()),
            ("rank_biased_overlap", m.rbo.to_string()),
            ("p", m.p.to_string()),
            (
                "mean_slot_normalized_overlap",
                self.summary.mean_normalized_overlap.to_string(),
            ),
            (
                "mean_slot_average_overlap",
                self.summary.mean_average_overlap.to_string(),
            ),
            (
                "mean_slot_rank_biased_overlap",
                self.summary.mean_rbo.to_string(),
            ),
        ] {
            writeln!(out, "{name}\t{value}").unwrap();
        }
        out
    }

    pub fn series_tsv(&self) -> String {
        let mut out = String::from(
            "slot\tdepth\toverlap\tnormalized_overlap\taverage_overlap\trank_biased_overlap\n",
        );
        for s in &self.series {
            let m = &s.metrics;
            writeln!(
                out,
                "{}\t{}\t{}\t{}\t{}\t{}",
                s.slot, m.depth, m.overlap, m.normalized_overlap, m.average_overlap, m.rbo
            )
            .unwrap();
        }
        out
    }
}

pub fn frequency_tsv(f: &FrequencyRanking) -> String {
    let mut out = format!(
        "# slots={} k={}\nblogger_id\ttimes_in_top_k\n",
        f.slots, f.k
    );
    for (id, count) in &f.entries {
        writeln!(out, "{id}\t{count}").unwrap();
    }
    out
}

/// Compares two ranking files and writes the series, summary and frequency
/// tables into `output`.
pub fn run_compare(
    a: &Path,
    b: &Path,
    output: &Path,
    k: usize,
    p: f64,
) -> Result<CompareReport, PipelineError> {
    let report = compare_rankings(&read_rankings(a)?, &read_rankings(b)?, k, p)?;
    create_dir(output)?;
    write_file(
        &output.join("comparison_summary.tsv"),
        &report.summary_tsv(),
    )?;
    write_file(&output.join("comparison_series.tsv"), &report.series_tsv())?;
    write_file(
        &output.join("frequency_a.tsv"),
        &frequency_tsv(&report.frequency_a),
    )?;
    write_file(
        &output.join("frequency_b.tsv"),
        &frequency_tsv(&report.frequency_b),
    )?;
    write_file(&output.join("comparison.json"), &to_json(&report))?;
    Ok(report)
}

#[derive(Debug, Clone, Serialize)]
pub struct StatsReport {
    pub link_funnel: LinkFunnelReport,
    pub self_links: Vec<SelfReferenceRow>,
    pub self_comments: Vec<SelfReferenceRow>,
    pub slots: Vec<TimeSlot>,
    pub series: Vec<(stats::SeriesMeasure, Vec<stats::SlotSeriesPoint>)>,
    pub warnings: Vec<String>,
}

pub fn dataset_stats(
    dataset: &Dataset,
    k: usize,
    slot_opts: &SlotOptions,
) -> Result<StatsReport, PipelineError> {
    slot_opts.validate()?;
    let resolution = resolve_links(dataset);
    let slots = analyzed_slots(
        &slice_into_slots(dataset, slot_opts.months),
        slot_opts.exclude_partial,
    );
    Ok(StatsReport {
        link_funnel: stats::link_funnel(dataset, &resolution),
        self_links: stats::self_link_leaderboard(dataset, &resolution, k),
        self_comments: stats::self_comment_leaderboard(dataset, k),
        series: stats::SeriesMeasure::ALL
            .iter()
            .map(|&m| (m, stats::slot_series(dataset, &resolution, &slots, m)))
            .collect(),
        warnings: dataset.warnings().iter().map(|w| w.to_string()).collect(),
        slots,
    })
}

/// Writes the link funnel, both leaderboards and the slot series of the
/// dataset in `input` into `output`.
pub fn run_stats(
    input: &Path,
    output: &Path,
    source_host: Option<&str>,
    k: usize,
    slot_opts: &SlotOptions,
) -> Result<StatsReport, PipelineError> {
    let (dataset, _) = load(input, source_host)?;
    let report = dataset_stats(&dataset, k, slot_opts)?;
    let resolution = resolve_links(&dataset);
    create_dir(output)?;
    write_file(
        &output.join("link_funnel.tsv"),
        &report.link_funnel.to_tsv(),
    )?;
    write_file(
        &output.join("self_links.tsv"),
        &stats::leaderboard_tsv(&report.self_links),
    )?;
    write_file(
        &output.join("self_comments.tsv"),
        &stats::leaderboard_tsv(&report.self_comments),
    )?;
    write_file(
        &output.join("series.tsv"),
        &stats::series_tsv(&dataset, &resolution, &report.slots),
    )?;
    write_file(&output.join("stats.json"), &to_json(&report))?;
    Ok(report)
}

/// Generates a dataset into `output` along with the configuration used.
pub fn run_synth(cfg: &SynthConfig, output: &Path) -> Result<Dataset, PipelineError> {
    let dataset = synth_generate(cfg)?;
    write_dataset(&dataset, output).map_err(io_err(output))?;
    write_file(&output.join("synth_config.json"), &to_json(cfg))?;
    Ok(dataset)
}

/// Parses the dataset in `input`, returning it with any warnings.
pub fn run_validate(input: &Path, source_host: Option<&str>) -> Result<Dataset, PipelineError> {
    Ok(load(input, source_host)?.0)
}
