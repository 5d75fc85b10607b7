//! `blogrank`: synthetic data, influence rankings and their comparison.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::Context;
use blogrank_core::compare::{CompareError, DEFAULT_DEPTH, DEFAULT_PERSISTENCE};
use blogrank_core::dataset::CommentAttribution;
use blogrank_core::ifinder::Aggregate;
use blogrank_core::pipeline::{self, Method, PipelineError, RankOptions, SlotOptions};
use blogrank_core::synth::{PlantedInfluencer, SynthConfig};
use clap::{Args, Parser, Subcommand, ValueEnum};

const EXIT_INPUT: u8 = 1;
const EXIT_CONFIG: u8 = 2;
const EXIT_NOT_CONVERGED: u8 = 3;

#[derive(Debug, Parser)]
#[command(
    name = "blogrank",
    version,
    about = "Rank influential bloggers per time slot"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Generate a seeded synthetic dataset.
    Synth(SynthArgs),
    /// Rank bloggers in every analyzed slot with one method.
    Rank(RankArgs),
    /// Compare two ranking files slot by slot.
    Compare(CompareArgs),
    /// Write link, self-reference and per-slot reports.
    Stats(StatsArgs),
    /// Parse and check a dataset without writing anything.
    Validate(ValidateArgs),
}

#[derive(Debug, Args)]
struct DatasetArgs {
    /// Directory holding bloggers.jsonl, posts.jsonl and comments.jsonl.
    #[arg(long)]
    input: PathBuf,
    /// Portal host; read from meta.json in the input directory if omitted.
    #[arg(long)]
    source_host: Option<String>,
}

#[derive(Debug, Args)]
struct SlotArgs {
    /// Leave out slots whose data ends before the slot does.
    #[arg(long, default_value_t = true, action = clap::ArgAction::Set)]
    slots_exclude_partial: bool,
    /// Calendar months per slot.
    #[arg(long, default_value_t = 1)]
    slot_months: u32,
    /// Which comments count towards a slot.
    #[arg(long, value_enum, default_value_t = AttributionArg::SlotLocal)]
    attribution: AttributionArg,
}

impl SlotArgs {
    fn options(&self) -> SlotOptions {
        SlotOptions {
            months: self.slot_months,
            exclude_partial: self.slots_exclude_partial,
            attribution: match self.attribution {
                AttributionArg::SlotLocal => CommentAttribution::SlotLocal,
                AttributionArg::PostSlot => CommentAttribution::PostSlot,
            },
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum AttributionArg {
    /// Comment and post both inside the slot.
    SlotLocal,
    /// Every comment on a post published in the slot.
    PostSlot,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum MethodArg {
    Ifinder,
    Pinf,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum AggregateArg {
    Avg,
    Max,
}

#[derive(Debug, Args)]
struct SynthArgs {
    #[arg(long)]
    output: PathBuf,
    /// JSON file with generator settings; flags given here override it.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    months: Option<u32>,
    #[arg(long)]
    bloggers: Option<usize>,
    /// First month, as YYYY-MM.
    #[arg(long, value_parser = parse_year_month)]
    start: Option<(i32, u32)>,
    #[arg(long)]
    source_host: Option<String>,
    #[arg(long)]
    commenters_per_blogger: Option<f64>,
    #[arg(long)]
    activity_exponent: Option<f64>,
    #[arg(long)]
    posts_per_blogger_per_month: Option<f64>,
    #[arg(long)]
    comment_rate: Option<f64>,
    #[arg(long)]
    self_comment_fraction: Option<f64>,
    #[arg(long)]
    blogger_comment_fraction: Option<f64>,
    #[arg(long)]
    links_per_post: Option<f64>,
    #[arg(long)]
    internal_link_fraction: Option<f64>,
    #[arg(long)]
    self_link_fraction: Option<f64>,
    /// Planted influencer as INDEX:MULTIPLIER; repeatable.
    #[arg(long = "plant", value_parser = parse_planted)]
    planted: Vec<PlantedInfluencer>,
}

#[derive(Debug, Args)]
struct RankArgs {
    #[command(flatten)]
    dataset: DatasetArgs,
    #[arg(long)]
    output: PathBuf,
    #[command(flatten)]
    slots: SlotArgs,
    #[arg(long, value_enum)]
    method: MethodArg,
    /// Ranking depth written per slot.
    #[arg(long, default_value_t = DEFAULT_DEPTH)]
    k: usize,
    #[arg(long, default_value_t = 1.0)]
    w_in: f64,
    #[arg(long, default_value_t = 1.0)]
    w_out: f64,
    #[arg(long, default_value_t = 1.0)]
    w_c: f64,
    /// Commenter recursion weight.
    #[arg(long, default_value_t = 0.85)]
    w: f64,
    #[arg(long, default_value_t = 1e-8)]
    tau: f64,
    #[arg(long, default_value_t = 100)]
    max_iter: usize,
    #[arg(long, default_value_t = 0.5)]
    init: f64,
    #[arg(long, value_enum, default_value_t = AggregateArg::Avg)]
    aggregate: AggregateArg,
    /// Worker threads; 0 uses one per core.
    #[arg(long, default_value_t = 0)]
    workers: usize,
    /// Exit with status 3 if any slot did not converge.
    #[arg(long)]
    strict: bool,
}

#[derive(Debug, Args)]
struct CompareArgs {
    /// Directory holding rankings_ifinder.tsv and rankings_pinf.tsv.
    #[arg(long, required_unless_present_all = ["a", "b"])]
    input: Option<PathBuf>,
    /// First ranking file.
    #[arg(long)]
    a: Option<PathBuf>,
    /// Second ranking file.
    #[arg(long)]
    b: Option<PathBuf>,
    #[arg(long)]
    output: PathBuf,
    #[arg(long, default_value_t = DEFAULT_DEPTH)]
    k: usize,
    /// Rank-biased overlap persistence.
    #[arg(long, default_value_t = DEFAULT_PERSISTENCE)]
    p: f64,
}

#[derive(Debug, Args)]
struct StatsArgs {
    #[command(flatten)]
    dataset: DatasetArgs,
    #[arg(long)]
    output: PathBuf,
    #[command(flatten)]
    slots: SlotArgs,
    /// Leaderboard length.
    #[arg(long, default_value_t = DEFAULT_DEPTH)]
    k: usize,
    /// Accepted for symmetry with `rank`; reports are computed serially.
    #[arg(long, default_value_t = 0)]
    workers: usize,
}

#[derive(Debug, Args)]
struct ValidateArgs {
    #[command(flatten)]
    dataset: DatasetArgs,
}

fn parse_year_month(s: &str) -> Result<(i32, u32), String> {
    let (y, m) = s.split_once('-').ok_or("expected YYYY-MM")?;
    let year = y.parse().map_err(|_| format!("bad year `{y}`"))?;
    let month = m.parse().map_err(|_| format!("bad month `{m}`"))?;
    Ok((year, month))
}

fn parse_planted(s: &str) -> Result<PlantedInfluencer, String> {
    let (b, m) = s.split_once(':').ok_or("expected INDEX:MULTIPLIER")?;
    Ok(PlantedInfluencer {
        blogger: b.parse().map_err(|_| format!("bad blogger index `{b}`"))?,
        multiplier: m.parse().map_err(|_| format!("bad multiplier `{m}`"))?,
    })
}

/// Failure carrying its exit status.
struct Failure {
    code: u8,
    error: anyhow::Error,
}

impl From<PipelineError> for Failure {
    fn from(e: PipelineError) -> Self {
        let code = match &e {
            PipelineError::Config(_) => EXIT_CONFIG,
            PipelineError::Compare(
                CompareError::DepthOutOfRange { .. } | CompareError::InvalidPersistence(_),
            ) => EXIT_CONFIG,
            _ => EXIT_INPUT,
        };
        Self {
            code,
            error: e.into(),
        }
    }
}

fn input_failure(error: anyhow::Error) -> Failure {
    Failure {
        code: EXIT_INPUT,
        error,
    }
}

fn synth_config(args: &SynthArgs) -> Result<SynthConfig, Failure> {
    let mut cfg = match &args.config {
        Some(path) => read_synth_config(path).map_err(input_failure)?,
        None => SynthConfig::default(),
    };
    macro_rules! set {
        ($($field:ident),*) => {
            $(if let Some(v) = args.$field.clone() { cfg.$field = v; })*
        };
    }
    set!(
        seed,
        months,
        bloggers,
        source_host,
        commenters_per_blogger,
        activity_exponent,
        posts_per_blogger_per_month,
        comment_rate,
        self_comment_fraction,
        blogger_comment_fraction,
        links_per_post,
        internal_link_fraction,
        self_link_fraction
    );
    if let Some((year, month)) = args.start {
        cfg.start_year = year;
        cfg.start_month = month;
    }
    if !args.planted.is_empty() {
        cfg.planted_influencers = args.planted.clone();
    }
    Ok(cfg)
}

fn read_synth_config(path: &Path) -> anyhow::Result<SynthConfig> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))
}

fn rank_options(args: &RankArgs) -> RankOptions {
    let mut opts = RankOptions {
        method: match args.method {
            MethodArg::Ifinder => Method::IFinder,
            MethodArg::Pinf => Method::PInf,
        },
        k: args.k,
        aggregate: match args.aggregate {
            AggregateArg::Avg => Aggregate::Average,
            AggregateArg::Max => Aggregate::Max,
        },
        slots: args.slots.options(),
        workers: args.workers,
        ..RankOptions::default()
    };
    opts.ifinder.w_in = args.w_in;
    opts.ifinder.w_out = args.w_out;
    opts.ifinder.w_c = args.w_c;
    opts.ifinder.tau = args.tau;
    opts.ifinder.max_iter = args.max_iter;
    opts.ifinder.init_value = args.init;
    opts.pinf.w = args.w;
    opts.pinf.tau = args.tau;
    opts.pinf.max_iter = args.max_iter;
    opts.pinf.init_value = args.init;
    opts
}

fn run(command: Command) -> Result<(), Failure> {
    match command {
        Command::Synth(args) => {
            let cfg = synth_config(&args)?;
            let ds = pipeline::run_synth(&cfg, &args.output)?;
            println!(
                "wrote {} bloggers, {} posts, {} comments to {}",
                ds.bloggers().len(),
                ds.posts().len(),
                ds.comments().len(),
                args.output.display()
            );
        }
        Command::Rank(args) => {
            let opts = rank_options(&args);
            let out = pipeline::run_rank(
                &args.dataset.input,
                &args.output,
                args.dataset.source_host.as_deref(),
                &opts,
            )?;
            let unconverged: Vec<usize> = out
                .run
                .slots
                .iter()
                .filter(|s| !s.converged)
                .map(|s| s.slot)
                .collect();
            println!(
                "ranked {} of {} slots with {}; wrote {}",
                out.run.slots.len(),
                out.run.total_slots,
                opts.method.name(),
                out.rankings_path.display()
            );
            if !unconverged.is_empty() {
                eprintln!("warning: slots {unconverged:?} did not converge");
                if args.strict {
                    return Err(Failure {
                        code: EXIT_NOT_CONVERGED,
                        error: anyhow::anyhow!("{} slot(s) did not converge", unconverged.len()),
                    });
                }
            }
        }
        Command::Compare(args) => {
            let dir = args.input.as_deref();
            let pick = |explicit: &Option<PathBuf>, name: &str| {
                explicit
                    .clone()
                    .or_else(|| dir.map(|d| d.join(name)))
                    .expect("clap requires --input when a ranking file is missing")
            };
            let a = pick(&args.a, "rankings_ifinder.tsv");
            let b = pick(&args.b, "rankings_pinf.tsv");
            let report = pipeline::run_compare(&a, &b, &args.output, args.k, args.p)?;
            let m = &report.summary.metrics;
            println!(
                "overlap {} ({:.3})  average overlap {:.3}  rbo {:.3}",
                m.overlap, m.normalized_overlap, m.average_overlap, m.rbo
            );
        }
        Command::Stats(args) => {
            let report = pipeline::run_stats(
                &args.dataset.input,
                &args.output,
                args.dataset.source_host.as_deref(),
                args.k,
                &args.slots.options(),
            )?;
            for w in &report.warnings {
                eprintln!("warning: {w}");
            }
            println!(
                "wrote reports for {} slots to {}",
                report.slots.len(),
                args.output.display()
            );
        }
        Command::Validate(args) => {
            let ds =
                pipeline::run_validate(&args.dataset.input, args.dataset.source_host.as_deref())?;
            for w in ds.warnings() {
                eprintln!("warning: {w}");
            }
            println!(
                "ok: {} bloggers, {} posts, {} comments",
                ds.bloggers().len(),
                ds.posts().len(),
                ds.comments().len()
            );
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {:#}", f.error);
            ExitCode::from(f.code)
        }
    }
}
