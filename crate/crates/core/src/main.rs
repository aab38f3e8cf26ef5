use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use socialtie::config::RunConfig;
use socialtie::export::ExportFormat;
use socialtie::ingest::{CalendarMode, IngestOptions, InputSchema};
use socialtie::metrics::{BetweennessMode, ClusteringFormula, MetricsConfig};
use socialtie::pipeline::{
    classify_stage, export_stage, ingest_stage, metrics_stage, run_pipeline, transactional, validate_stage,
    ClassifyOptions, PipelineError, Stage,
};
use socialtie::relevance::{FilterConfig, OutlierMethod, RelevanceConfig, ShuffleUnit};
use socialtie::stats::PercentileRule;
use socialtie::tokenize::{StopWords, TokenizerConfig};
use socialtie::validation::DEFAULT_BUCKETS;

/// Classify nodes and edges of dynamic attributed networks into closure,
/// brokerage and innocuous, and validate the classes against network metrics.
#[derive(Parser)]
#[command(name = "socialtie", version)]
struct Cli {
    /// Worker threads for parallel stages (default: available parallelism).
    #[arg(long, global = true)]
    workers: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Parse an interaction log into a network directory.
    Ingest(IngestArgs),
    /// Extract relevant attributes and label nodes and edges.
    Classify(ClassifyArgs),
    /// Compute structural metrics on the collapsed graph.
    Metrics(MetricsArgs),
    /// Test metric distributions across classes.
    Validate(ValidateArgs),
    /// Write DOT, GraphML or report tables.
    Export(ExportArgs),
    /// Run every stage from a TOML config.
    Run(RunArgs),
}

#[derive(Args)]
struct IngestArgs {
    #[arg(long)]
    schema: InputSchema,
    #[arg(long = "in")]
    input: PathBuf,
    #[arg(long)]
    out: PathBuf,
    /// Abort on malformed lines instead of skipping them.
    #[arg(long)]
    strict: bool,
    /// Keep empty time bins as snapshots.
    #[arg(long)]
    raw_calendar: bool,
    #[arg(long, default_value_t = 0)]
    min_active_snapshots: usize,
    #[arg(long, default_value_t = 0)]
    min_instances: usize,
    /// Stop-word file, one word per line. Defaults to the bundled list.
    #[arg(long, conflicts_with = "no_stop_words")]
    stop_words: Option<PathBuf>,
    #[arg(long)]
    no_stop_words: bool,
    #[arg(long)]
    no_stemming: bool,
    #[arg(long, default_value_t = 2)]
    min_token_len: usize,
}

#[derive(Args)]
struct ClassifyArgs {
    #[arg(long)]
    net: PathBuf,
    #[arg(long, default_value = "iqr")]
    method: OutlierMethod,
    #[arg(long, default_value = "linear")]
    percentile: PercentileRule,
    /// Enables the randomization filter with this many trials.
    #[arg(long)]
    filter_trials: Option<usize>,
    #[arg(long, default_value_t = 0.05, requires = "filter_trials")]
    alpha: f64,
    #[arg(long, default_value_t = 0, requires = "filter_trials")]
    seed: u64,
    #[arg(long, default_value = "set", requires = "filter_trials")]
    shuffle: ShuffleUnit,
    /// Use this relevance table instead of extracting one.
    #[arg(long, conflicts_with = "filter_trials")]
    relevance: Option<PathBuf>,
}

#[derive(Args)]
struct MetricsArgs {
    #[arg(long)]
    net: PathBuf,
    /// `exact` or `sampled:K`.
    #[arg(long, default_value = "exact")]
    betweenness: BetweennessMode,
    /// Seed for sampled betweenness pivots.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value = "literal")]
    clustering: ClusteringFormula,
    #[arg(long, default_value_t = 0.85)]
    damping: f64,
}

#[derive(Args)]
struct ValidateArgs {
    #[arg(long)]
    run: PathBuf,
    #[arg(long, default_value_t = 0.05)]
    alpha: f64,
    /// Existence-time bucket lower bounds, comma separated.
    #[arg(long, value_delimiter = ',', default_values_t = DEFAULT_BUCKETS)]
    buckets: Vec<u32>,
}

#[derive(Args)]
struct ExportArgs {
    #[arg(long)]
    run: PathBuf,
    #[arg(long, value_delimiter = ',', required = true)]
    format: Vec<ExportFormat>,
}

#[derive(Args)]
struct RunArgs {
    #[arg(long)]
    config: PathBuf,
    /// Overrides `output`.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Overrides `input.path`.
    #[arg(long = "in")]
    input: Option<PathBuf>,
    /// Overrides `relevance.method`.
    #[arg(long)]
    method: Option<OutlierMethod>,
    /// Overrides `filter.seed` and the sampled betweenness seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Overrides `metrics.betweenness`.
    #[arg(long)]
    betweenness: Option<BetweennessMode>,
    /// Overrides `validation.alpha`.
    #[arg(long)]
    alpha: Option<f64>,
}

fn tokenizer_config(a: &IngestArgs) -> TokenizerConfig {
    let stop_words = match (&a.stop_words, a.no_stop_words) {
        (_, true) => StopWords::None,
        (Some(p), false) => StopWords::File(p.clone()),
        (None, false) => StopWords::default(),
    };
    TokenizerConfig {
        stop_words,
        stemming: !a.no_stemming,
        min_token_len: a.min_token_len,
        ..Default::default()
    }
}

fn run_config(a: &RunArgs) -> Result<RunConfig, PipelineError> {
    let mut cfg = RunConfig::load(&a.config)?;
    if let Some(o) = &a.out {
        cfg.output = Some(o.clone());
    }
    if let Some(i) = &a.input {
        cfg.input.path = i.clone();
    }
    if let Some(m) = a.method {
        cfg.relevance.method = m;
    }
    if let Some(b) = a.betweenness {
        cfg.metrics.betweenness = b;
    }
    if let Some(s) = a.seed {
        if let Some(f) = &mut cfg.filter {
            f.seed = s;
        }
        if let BetweennessMode::Sampled { seed, .. } = &mut cfg.metrics.betweenness {
            *seed = s;
        }
    }
    if let Some(al) = a.alpha {
        cfg.validation.alpha = al;
    }
    Ok(cfg)
}

fn dispatch(command: Command) -> Result<(), PipelineError> {
    match command {
        Command::Ingest(a) => {
            let opts = IngestOptions {
                strict: a.strict,
                calendar: if a.raw_calendar {
                    CalendarMode::Raw
                } else {
                    CalendarMode::Compact
                },
                min_active_snapshots: a.min_active_snapshots,
                min_instances: a.min_instances,
            };
            let tok = tokenizer_config(&a);
            transactional(&a.out, Stage::Ingest, |out| {
                ingest_stage(&a.input, a.schema, &tok, &opts, out).map(|_| ())
            })
        }
        Command::Classify(a) => {
            let opts = ClassifyOptions {
                relevance: RelevanceConfig {
                    method: a.method,
                    percentile: a.percentile,
                    ..Default::default()
                },
                filter: a.filter_trials.map(|trials| FilterConfig {
                    trials,
                    alpha: a.alpha,
                    seed: a.seed,
                    unit: a.shuffle,
                }),
                relevance_file: a.relevance,
            };
            transactional(&a.net, Stage::Classify, |out| classify_stage(&opts, out))
        }
        Command::Metrics(a) => {
            let betweenness = match a.betweenness {
                BetweennessMode::Sampled { pivots, .. } => BetweennessMode::Sampled { pivots, seed: a.seed },
                m => m,
            };
            let mut cfg = MetricsConfig {
                betweenness,
                clustering: a.clustering,
                ..Default::default()
            };
            cfg.pagerank.damping = a.damping;
            transactional(&a.net, Stage::Metrics, |out| metrics_stage(&cfg, out))
        }
        Command::Validate(a) => transactional(&a.run, Stage::Validate, |out| {
            validate_stage(a.alpha, &a.buckets, out)
        }),
        Command::Export(a) => transactional(&a.run, Stage::Export, |out| export_stage(&a.format, out)),
        Command::Run(a) => {
            let cfg = run_config(&a)?;
            let files = run_pipeline(&cfg)?;
            log::info!("run: wrote {} files", files.len());
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info"))
        .target(env_logger::Target::Stderr)
        .init();
    let cli = Cli::parse();
    if let Some(w) = cli.workers {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(w).build_global() {
            eprintln!("error: worker pool: {e}");
            return ExitCode::from(Stage::Config.exit_code());
        }
    }
    match dispatch(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.stage.exit_code())
        }
    }
}
