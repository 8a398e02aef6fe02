//! `nameguess`: ingest → fabricate → classify-difficulty → prompts → infer →
//! score → report. Stages exchange JSON-lines files.

mod commands;
mod config;
mod io;
mod manifest;
mod stub;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use tracing_subscriber::EnvFilter;

use crate::stub::StubKind;

#[derive(Debug, Parser)]
#[command(name = "nameguess", version, about = "Column-name abbreviation corpus and evaluation toolkit")]
pub struct Cli {
    /// TOML file overriding any configuration field.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Run seed; wins over the config file.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Emit logs as JSON lines on stderr.
    #[arg(long, global = true)]
    pub log_json: bool,
    /// Where to write the run manifest (default: `<output>.manifest.json`).
    #[arg(long, global = true)]
    pub manifest: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Read CSV files or Socrata datasets, filter them, write the kept tables.
    Ingest(IngestArgs),
    /// Abbreviate well-curated headers into (query, logical) pairs.
    Fabricate(FabricateArgs),
    /// Annotate pairs with difficulty levels, in place.
    ClassifyDifficulty(ClassifyArgs),
    /// Build training or inference prompts from pairs and tables.
    Prompts(PromptsArgs),
    /// Complete prompts with an endpoint or a stub model and extract answers.
    Infer(InferArgs),
    /// Score predictions against gold names.
    Score(ScoreArgs),
    /// Render overall and per-difficulty tables for q and t'+q runs.
    Report(ReportArgs),
}

#[derive(Debug, Args)]
pub struct IngestArgs {
    /// CSV file or directory of CSV files; repeatable.
    #[arg(long = "input")]
    pub inputs: Vec<PathBuf>,
    /// Socrata domain (or base URL) for --dataset.
    #[arg(long)]
    pub socrata_domain: Option<String>,
    /// Socrata dataset id; repeatable.
    #[arg(long = "dataset", requires = "socrata_domain")]
    pub datasets: Vec<String>,
    /// Rows to request per Socrata dataset.
    #[arg(long, default_value_t = 1000)]
    pub limit: usize,
    /// Directory receiving kept tables as CSV.
    #[arg(long)]
    pub out_dir: PathBuf,
    /// Corpus manifest path (default: `<out-dir>/corpus_manifest.jsonl`).
    #[arg(long)]
    pub corpus_manifest: Option<PathBuf>,
    /// Record unparsable files as rejected instead of failing.
    #[arg(long)]
    pub skip_bad: bool,
}

#[derive(Debug, Args)]
pub struct SegmentArgs {
    /// Frequency-ordered word list for segmentation.
    #[arg(long)]
    pub lexicon: Option<PathBuf>,
    /// Curation vocabulary word list.
    #[arg(long)]
    pub vocab: Option<PathBuf>,
    /// Shortest vocabulary entry kept.
    #[arg(long)]
    pub min_word_len: Option<usize>,
}

#[derive(Debug, Args)]
pub struct FabricateArgs {
    /// CSV file or directory of tables.
    #[arg(long)]
    pub tables: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    /// Worker threads (default: all cores).
    #[arg(long)]
    pub threads: Option<usize>,
    /// Lookup dictionary file (`word<TAB>abbr1|abbr2`).
    #[arg(long)]
    pub lookup: Option<PathBuf>,
    /// Acronym dictionary file (`phrase<TAB>acronym`).
    #[arg(long)]
    pub acronyms: Option<PathBuf>,
    #[command(flatten)]
    pub segment: SegmentArgs,
    /// Leave the per-pair trace out of the output.
    #[arg(long)]
    pub no_trace: bool,
}

#[derive(Debug, Args)]
pub struct ClassifyArgs {
    #[arg(long)]
    pub pairs: PathBuf,
    /// Cutpoints `t1,t2,t3`.
    #[arg(long, conflicts_with = "calibrate")]
    pub thresholds: Option<String>,
    /// Fit cutpoints to target shares `easy,medium,hard,extra_hard`.
    #[arg(long)]
    pub calibrate: Option<String>,
    /// Write here instead of rewriting --pairs.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModeArg {
    Train,
    Infer,
}

#[derive(Debug, Args)]
pub struct PromptsArgs {
    #[arg(long)]
    pub pairs: PathBuf,
    #[arg(long)]
    pub tables: PathBuf,
    /// Columns per prompt.
    #[arg(long)]
    pub k: Option<usize>,
    /// Sampled rows per prompt.
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long, value_enum, default_value = "infer")]
    pub mode: ModeArg,
    /// Prepend the one-shot demonstration (inference mode).
    #[arg(long)]
    pub demo: bool,
    /// Sample rows at random with this seed instead of taking the first N.
    #[arg(long)]
    pub sample_seed: Option<u64>,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct InferArgs {
    #[arg(long)]
    pub bundles: PathBuf,
    /// Predictions output.
    #[arg(long)]
    pub out: PathBuf,
    /// Raw completion log (default: `<out>.raw.jsonl`).
    #[arg(long)]
    pub raw_log: Option<PathBuf>,
    /// Use a built-in offline model.
    #[arg(long, value_enum, conflicts_with = "replay")]
    pub stub: Option<StubKind>,
    /// Pairs supplying gold names to the oracle and scrambler stubs.
    #[arg(long)]
    pub pairs: Option<PathBuf>,
    /// Re-extract answers from a raw completion log; no requests are sent.
    #[arg(long)]
    pub replay: Option<PathBuf>,
    #[arg(long)]
    pub endpoint_url: Option<String>,
    #[arg(long)]
    pub model: Option<String>,
    #[arg(long)]
    pub max_new_tokens: Option<u32>,
    #[arg(long)]
    pub temperature: Option<f64>,
    /// Send no stop sequences.
    #[arg(long)]
    pub no_stop: bool,
    #[arg(long)]
    pub max_in_flight: Option<usize>,
    #[arg(long)]
    pub max_retries: Option<u32>,
    #[arg(long)]
    pub timeout_secs: Option<f64>,
}

#[derive(Debug, Args)]
pub struct ScoreArgs {
    #[arg(long)]
    pub pairs: PathBuf,
    #[arg(long)]
    pub preds: PathBuf,
    /// Report JSON output.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Per-record scores as JSON lines.
    #[arg(long)]
    pub records_out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ConventionArg {
    /// Means over extracted predictions only.
    Extracted,
    /// Means over all records, extraction failures scored 0.
    All,
}

#[derive(Debug, Args)]
pub struct ReportArgs {
    /// Score report JSON or predictions file for the prompt-only run.
    #[arg(long)]
    pub q: Option<PathBuf>,
    /// Score report JSON or predictions file for the run with table context.
    #[arg(long)]
    pub tq: Option<PathBuf>,
    /// Pairs, needed when --q/--tq are predictions files.
    #[arg(long)]
    pub pairs: Option<PathBuf>,
    /// Row label.
    #[arg(long, default_value = "model")]
    pub model: String,
    #[arg(long, value_enum, default_value = "extracted")]
    pub convention: ConventionArg,
    /// Write the table here instead of stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// Marks failures of a remote endpoint, which exit with status 2.
#[derive(Debug)]
pub struct EndpointFailure(pub String);

impl std::fmt::Display for EndpointFailure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for EndpointFailure {}

fn init_logging(json: bool) {
    let filter = EnvFilter::try_from_default_env().unwrap_or_else(|_| EnvFilter::new("info"));
    let builder = tracing_subscriber::fmt().with_env_filter(filter).with_writer(std::io::stderr);
    if json {
        builder.json().init();
    } else {
        builder.init();
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    init_logging(cli.log_json);
    match commands::run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            if e.chain().any(|c| c.is::<EndpointFailure>()) {
                ExitCode::from(2)
            } else {
                ExitCode::from(1)
            }
        }
    }
}
