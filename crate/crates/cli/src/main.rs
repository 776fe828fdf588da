//! `gir` — batch command-line surface over the retrieval pipeline:
//! `index`, `search`, `evaluate`, and `sweep`.
//!
//! Exit status contract: 0 success, 1 runtime error, 2 usage error.
//! Diagnostics go to standard error; data goes to standard output or
//! files only, so every command is pipeline-safe and byte-deterministic
//! for identical inputs and flags.

mod config;
mod sweep;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, Context};
use clap::{Args, Parser, Subcommand};

use gir_core::eval::{evaluate_entries, Measure};
use gir_core::index::{Index, IndexBuilder, IndexConfig};
use gir_core::models::{ModelId, ModelParams};
use gir_core::search::{run_topics, DEFAULT_K};
use gir_core::text_analysis::{Analyzer, FieldMode};
use gir_core::trec_io::{parse_documents, parse_qrels, parse_run, parse_topics, Topic};

use config::FileConfig;
use sweep::{run_sweep, SweepJob};

#[derive(Parser)]
#[command(
    name = "gir",
    version,
    about = "Index, rank, and evaluate TREC-style test collections"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build an inverted index from a document collection
    Index(IndexArgs),
    /// Rank a topic set against an index and emit a TREC run file
    Search(SearchArgs),
    /// Score a run file against relevance judgments
    Evaluate(EvaluateArgs),
    /// Run every (model, field-mode) cell and tabulate MAP
    Sweep(SweepArgs),
}

#[derive(Args)]
struct IndexArgs {
    /// Collection file or directory of collection files
    #[arg(long)]
    collection: PathBuf,
    /// Output index directory
    #[arg(long)]
    output: PathBuf,
    /// Stoplist file: one term per line, '#' comments
    #[arg(long)]
    stoplist: Option<PathBuf>,
    /// Tokenization worker threads
    #[arg(long)]
    workers: Option<usize>,
    /// Overwrite an existing output directory
    #[arg(long)]
    force: bool,
}

#[derive(Args)]
struct SearchArgs {
    /// Index directory
    #[arg(long)]
    index: PathBuf,
    /// Topic file
    #[arg(long)]
    topics: PathBuf,
    /// Weighting model (one of the 17 registry ids)
    #[arg(long)]
    model: Option<String>,
    /// Topic sections to use: T, TD, or TDN
    #[arg(long)]
    fields: Option<String>,
    /// Retrieval depth per topic
    #[arg(long)]
    k: Option<usize>,
    /// Run tag written to the output
    #[arg(long)]
    tag: Option<String>,
    /// Model parameter override, e.g. --param c=2.0 (repeatable)
    #[arg(long = "param")]
    params: Vec<String>,
    /// Stoplist file applied at query time
    #[arg(long)]
    stoplist: Option<PathBuf>,
    /// Write the run file here instead of standard output
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct EvaluateArgs {
    /// Relevance judgments file
    #[arg(long)]
    qrels: PathBuf,
    /// Run file to score
    #[arg(long)]
    run: PathBuf,
    /// Measures to print: all or a comma list (map,gmap,rprec,bpref,recip_rank,p5,iprec0)
    #[arg(long)]
    measures: Option<String>,
    /// Also print per-topic rows
    #[arg(long)]
    per_topic: bool,
    /// Write the 11-point interpolated precision-recall curve TSV here
    #[arg(long)]
    curve: Option<PathBuf>,
    /// Write the full per-topic report TSV here
    #[arg(long)]
    tsv: Option<PathBuf>,
}

#[derive(Args)]
struct SweepArgs {
    /// Index directory
    #[arg(long)]
    index: PathBuf,
    /// Topic file
    #[arg(long)]
    topics: PathBuf,
    /// Relevance judgments file
    #[arg(long)]
    qrels: PathBuf,
    /// Models to sweep: all or a comma list of registry ids
    #[arg(long)]
    models: Option<String>,
    /// Field modes to sweep, comma list out of T,TD,TDN
    #[arg(long)]
    fields: Option<String>,
    /// Output directory for run files and the matrix
    #[arg(long)]
    out: Option<PathBuf>,
    /// Retrieval depth per topic
    #[arg(long)]
    k: Option<usize>,
    /// Model parameter override, e.g. --param c=2.0 (repeatable)
    #[arg(long = "param")]
    params: Vec<String>,
    /// Stoplist file applied at query time
    #[arg(long)]
    stoplist: Option<PathBuf>,
    /// Sweep worker threads
    #[arg(long)]
    workers: Option<usize>,
}

enum CliError {
    Usage(String),
    Runtime(anyhow::Error),
}

impl From<anyhow::Error> for CliError {
    fn from(e: anyhow::Error) -> Self {
        CliError::Runtime(e)
    }
}

impl From<gir_core::Error> for CliError {
    fn from(e: gir_core::Error) -> Self {
        CliError::Runtime(anyhow::Error::new(e))
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Runtime(anyhow::Error::new(e))
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = FileConfig::load()
        .map_err(CliError::Runtime)
        .and_then(|conf| dispatch(cli, &conf));
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Usage(msg)) => {
            eprintln!("gir: {msg}");
            eprintln!("run 'gir <command> --help' for usage");
            ExitCode::from(2)
        }
        Err(CliError::Runtime(e)) => {
            eprintln!("gir: {e:#}");
            ExitCode::from(1)
        }
    }
}

fn dispatch(cli: Cli, conf: &FileConfig) -> Result<(), CliError> {
    match cli.command {
        Command::Index(args) => cmd_index(args, conf),
        Command::Search(args) => cmd_search(args, conf),
        Command::Evaluate(args) => cmd_evaluate(args, conf),
        Command::Sweep(args) => cmd_sweep(args, conf),
    }
}

fn load_analyzer(flag: &Option<PathBuf>, conf: &FileConfig) -> Result<Analyzer, CliError> {
    let path = flag
        .clone()
        .or_else(|| conf.get("stoplist").map(PathBuf::from));
    match path {
        Some(p) => Ok(Analyzer::from_stoplist_file(&p)?),
        None => Ok(Analyzer::new()),
    }
}

/// All regular files under a path, sorted for deterministic ingestion.
fn collection_files(path: &Path) -> Result<Vec<PathBuf>, CliError> {
    if path.is_file() {
        return Ok(vec![path.to_path_buf()]);
    }
    if !path.is_dir() {
        return Err(CliError::Runtime(anyhow!(
            "collection path {} does not exist",
            path.display()
        )));
    }
    fn walk(dir: &Path, out: &mut Vec<PathBuf>) -> std::io::Result<()> {
        for entry in std::fs::read_dir(dir)? {
            let p = entry?.path();
            if p.is_dir() {
                walk(&p, out)?;
            } else if p.is_file() {
                out.push(p);
            }
        }
        Ok(())
    }
    let mut files = Vec::new();
    walk(path, &mut files).context("scanning collection directory")?;
    files.sort();
    if files.is_empty() {
        return Err(CliError::Runtime(anyhow!(
            "collection directory {} contains no files",
            path.display()
        )));
    }
    Ok(files)
}

fn cmd_index(args: IndexArgs, conf: &FileConfig) -> Result<(), CliError> {
    if args.output.exists() && !args.force {
        return Err(CliError::Runtime(anyhow!(
            "output {} already exists; pass --force to overwrite",
            args.output.display()
        )));
    }
    let workers = conf.resolve_workers(args.workers)?;
    let analyzer = load_analyzer(&args.stoplist, conf)?;

    let mut builder = IndexBuilder::new(
        analyzer,
        IndexConfig {
            workers,
            ..IndexConfig::default()
        },
    );
    for file in collection_files(&args.collection)? {
        let bytes = std::fs::read(&file).with_context(|| format!("reading {}", file.display()))?;
        let docs = parse_documents(&bytes)?;
        builder.add_documents(&docs)?;
    }
    let index = builder.finish()?;
    index.save(&args.output)?;

    let stats = index.stats();
    println!(
        "N={} TC={} avg_l={} vocab={}",
        stats.num_docs,
        stats.total_tokens,
        stats.avg_doc_len(),
        stats.vocab_size
    );
    Ok(())
}

fn parse_model(raw: &str) -> Result<ModelId, CliError> {
    raw.parse::<ModelId>().map_err(Into::into)
}

fn parse_model_params(overrides: &[String], conf: &FileConfig) -> Result<ModelParams, CliError> {
    let mut params = ModelParams::default();
    if let Some(raw) = conf.get("params") {
        for kv in raw.split_whitespace() {
            apply_param(&mut params, kv)?;
        }
    }
    for kv in overrides {
        apply_param(&mut params, kv)?;
    }
    Ok(params)
}

fn apply_param(params: &mut ModelParams, kv: &str) -> Result<(), CliError> {
    let Some((key, value)) = kv.split_once('=') else {
        return Err(CliError::Usage(format!(
            "--param expects key=value, got {kv:?}"
        )));
    };
    let value: f64 = value
        .parse()
        .map_err(|_| CliError::Usage(format!("--param {key}: {value:?} is not a number")))?;
    params.set(key, value)?;
    Ok(())
}

fn read_topics(path: &Path) -> Result<Vec<Topic>, CliError> {
    let bytes = std::fs::read(path).with_context(|| format!("reading {}", path.display()))?;
    let topics = parse_topics(&bytes)?;
    if topics.is_empty() {
        return Err(CliError::Runtime(anyhow!(
            "{} contains no topics",
            path.display()
        )));
    }
    Ok(topics)
}

fn cmd_search(args: SearchArgs, conf: &FileConfig) -> Result<(), CliError> {
    let model_raw = conf
        .resolve_required(args.model, "model")
        .ok_or_else(|| CliError::Usage("--model is required (or set model= in gir.conf)".into()))?;
    let model = parse_model(&model_raw)?;
    let fields_raw = conf
        .resolve_required(args.fields, "fields")
        .ok_or_else(|| {
            CliError::Usage("--fields is required (or set fields= in gir.conf)".into())
        })?;
    let mode: FieldMode = fields_raw.parse()?;
    let k = conf.resolve_usize(args.k, "k", DEFAULT_K)?;
    if k == 0 {
        return Err(CliError::Usage("--k must be at least 1".into()));
    }
    let tag = conf.resolve_string(args.tag, "tag", "gir");
    let params = parse_model_params(&args.params, conf)?;
    let analyzer = load_analyzer(&args.stoplist, conf)?;

    let index = Index::load(&args.index)?;
    let topics = read_topics(&args.topics)?;
    let run = run_topics(&index, model, &params, &analyzer, &topics, mode, k, &tag)?;
    let rendered = run.to_run_file()?;

    match &args.output {
        Some(path) => {
            std::fs::write(path, rendered).with_context(|| format!("writing {}", path.display()))?
        }
        None => print!("{rendered}"),
    }
    Ok(())
}

fn cmd_evaluate(args: EvaluateArgs, conf: &FileConfig) -> Result<(), CliError> {
    let measures_raw = conf.resolve_string(args.measures, "measures", "all");
    let measures =
        Measure::parse_list(&measures_raw).map_err(|e| CliError::Usage(e.to_string()))?;

    let qrels_bytes =
        std::fs::read(&args.qrels).with_context(|| format!("reading {}", args.qrels.display()))?;
    let qrels = parse_qrels(&qrels_bytes)?;
    let run_bytes =
        std::fs::read(&args.run).with_context(|| format!("reading {}", args.run.display()))?;
    let entries = parse_run(&run_bytes)?;

    let report = evaluate_entries(&entries, &qrels)?;
    for num in &report.skipped {
        eprintln!("gir: topic {num} has no relevant documents; excluded");
    }
    print!("{}", report.render_table(&measures, args.per_topic));

    if let Some(path) = &args.curve {
        std::fs::write(path, report.curve_tsv())
            .with_context(|| format!("writing {}", path.display()))?;
    }
    if let Some(path) = &args.tsv {
        std::fs::write(path, report.render_tsv())
            .with_context(|| format!("writing {}", path.display()))?;
    }
    Ok(())
}

fn parse_model_list(raw: &str) -> Result<Vec<ModelId>, CliError> {
    if raw == "all" {
        return Ok(ModelId::ALL.to_vec());
    }
    raw.split(',').map(|tok| parse_model(tok.trim())).collect()
}

fn parse_mode_list(raw: &str) -> Result<Vec<FieldMode>, CliError> {
    let modes: Vec<FieldMode> = raw
        .split(',')
        .map(|tok| tok.trim().parse::<FieldMode>())
        .collect::<Result<_, _>>()?;
    Ok(modes)
}

fn cmd_sweep(args: SweepArgs, conf: &FileConfig) -> Result<(), CliError> {
    let models = parse_model_list(&conf.resolve_string(args.models, "models", "all"))?;
    let modes = parse_mode_list(&conf.resolve_string(args.fields, "fields", "T,TD,TDN"))?;
    let k = conf.resolve_usize(args.k, "k", DEFAULT_K)?;
    if k == 0 {
        return Err(CliError::Usage("--k must be at least 1".into()));
    }
    let workers = conf.resolve_workers(args.workers)?;
    let params = parse_model_params(&args.params, conf)?;
    let analyzer = load_analyzer(&args.stoplist, conf)?;
    let out_dir = args.out.unwrap_or_else(|| PathBuf::from("sweep_out"));

    let index = Index::load(&args.index)?;
    let topics = read_topics(&args.topics)?;
    let qrels_bytes =
        std::fs::read(&args.qrels).with_context(|| format!("reading {}", args.qrels.display()))?;
    let qrels = parse_qrels(&qrels_bytes)?;

    eprintln!(
        "gir: sweeping {} models x {} field modes over {} topics",
        models.len(),
        modes.len(),
        topics.len()
    );
    let outcome = run_sweep(&SweepJob {
        index: &index,
        analyzer: &analyzer,
        topics: &topics,
        qrels: &qrels,
        models,
        modes,
        params,
        k,
        workers,
        out_dir: &out_dir,
    })?;

    for (cell, msg) in &outcome.failures {
        eprintln!("gir: cell {cell} failed: {msg}");
    }
    let text = outcome.matrix.render_text();
    std::fs::write(out_dir.join("matrix.txt"), &text)
        .with_context(|| format!("writing {}", out_dir.join("matrix.txt").display()))?;
    std::fs::write(out_dir.join("matrix.tsv"), outcome.matrix.render_tsv())
        .with_context(|| format!("writing {}", out_dir.join("matrix.tsv").display()))?;
    print!("{text}");
    Ok(())
}
