//! Stages over a run directory, each reading the intermediates of the stages
//! before it, and the end-to-end run built from them.

use std::fmt;
use std::fs;
use std::io::BufReader;
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::classifier::classify;
use crate::config::{ConfigError, RunConfig, RESOLVED_CONFIG_FILE};
use crate::export::{
    class_summary_tsv, distributions_tsv, export_dot, export_graphml, tests_tsv, ExportFormat,
    ValidationOutput, CLASS_SUMMARY_FILE, DISTRIBUTIONS_FILE, DOT_FILE, GRAPHML_FILE, TESTS_FILE,
};
use crate::ingest::{parse_coauthorship, parse_qa, IngestOptions, IngestStats, InputSchema};
use crate::io::{
    edge_labels_to_tsv, edge_metrics_to_tsv, edge_states_to_tsv, load_labels, load_metrics, load_network,
    network_to_tsv, node_labels_to_tsv, node_metrics_to_tsv, read_file, schema_line, FormatError,
    CALENDAR_FILE, EDGE_LABELS_FILE, EDGE_METRICS_FILE, EDGE_STATES_FILE, FILTER_FILE, INGEST_META_FILE,
    NETWORK_FILE, NODE_LABELS_FILE, NODE_METRICS_FILE, RELEVANCE_FILE,
};
use crate::metrics::{compute_all, MetricsConfig};
use crate::relevance::{
    extract_relevant, randomization_filter, remove_attributes, FilterConfig, RelevanceConfig, RelevanceMap,
};
use crate::tokenize::{Tokenizer, TokenizerConfig};
use crate::validation::{class_distributions, existence_time_buckets};

pub const VALIDATION_FILE: &str = "validation.json";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stage {
    Config,
    Ingest,
    Classify,
    Metrics,
    Validate,
    Export,
}

impl Stage {
    pub fn name(self) -> &'static str {
        match self {
            Stage::Config => "config",
            Stage::Ingest => "ingest",
            Stage::Classify => "classify",
            Stage::Metrics => "metrics",
            Stage::Validate => "validate",
            Stage::Export => "export",
        }
    }

    pub fn exit_code(self) -> u8 {
        match self {
            Stage::Config => 2,
            Stage::Ingest => 3,
            Stage::Classify => 4,
            Stage::Metrics => 5,
            Stage::Validate => 6,
            Stage::Export => 7,
        }
    }
}

#[derive(Debug)]
pub struct PipelineError {
    pub stage: Stage,
    pub message: String,
}

impl fmt::Display for PipelineError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} failed: {}", self.stage.name(), self.message)
    }
}

impl std::error::Error for PipelineError {}

fn fail(stage: Stage) -> impl Fn(&dyn fmt::Display) -> PipelineError {
    move |e| PipelineError {
        stage,
        message: e.to_string(),
    }
}

impl From<ConfigError> for PipelineError {
    fn from(e: ConfigError) -> Self {
        fail(Stage::Config)(&e)
    }
}

/// Files written into a run directory, removed again by [`rollback`](Self::rollback).
#[derive(Debug)]
pub struct Outputs {
    dir: PathBuf,
    created: bool,
    written: Vec<PathBuf>,
}

impl Outputs {
    pub fn open(dir: &Path) -> std::io::Result<Self> {
        let created = !dir.exists();
        fs::create_dir_all(dir)?;
        Ok(Outputs {
            dir: dir.to_owned(),
            created,
            written: Vec::new(),
        })
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    pub fn write(&mut self, name: &str, contents: &str) -> Result<(), FormatError> {
        let path = self.dir.join(name);
        crate::io::write_file(&path, contents)?;
        self.written.push(path);
        Ok(())
    }

    pub fn written(&self) -> &[PathBuf] {
        &self.written
    }

    pub fn rollback(self) {
        for p in &self.written {
            let _ = fs::remove_file(p);
        }
        if self.created {
            let _ = fs::remove_dir(&self.dir);
        }
    }
}

/// Runs `f` against `out`, removing everything it wrote if it fails.
pub fn transactional<T>(
    dir: &Path,
    stage: Stage,
    f: impl FnOnce(&mut Outputs) -> Result<T, PipelineError>,
) -> Result<T, PipelineError> {
    let mut out = Outputs::open(dir).map_err(|e| fail(stage)(&format!("{}: {e}", dir.display())))?;
    match f(&mut out) {
        Ok(v) => Ok(v),
        Err(e) => {
            out.rollback();
            Err(e)
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IngestMeta {
    pub schema: InputSchema,
    pub input: String,
    pub options: IngestOptions,
    pub tokenizer: TokenizerConfig,
    pub snapshots: usize,
    pub stats: IngestStats,
}

fn calendar_tsv(calendar: &[i64]) -> String {
    let mut s = schema_line("calendar");
    s.push_str("\n#columns\tsnapshot\tlabel\n");
    for (i, t) in calendar.iter().enumerate() {
        s.push_str(&format!("{i}\t{t}\n"));
    }
    s
}

pub fn ingest_stage(
    input: &Path,
    schema: InputSchema,
    tokenizer: &TokenizerConfig,
    options: &IngestOptions,
    out: &mut Outputs,
) -> Result<IngestStats, PipelineError> {
    let err = fail(Stage::Ingest);
    let started = Instant::now();
    let file = fs::File::open(input).map_err(|e| err(&format!("{}: {e}", input.display())))?;
    let tok = Tokenizer::new(tokenizer.clone()).map_err(|e| err(&e))?;
    let reader = BufReader::new(file);
    let parsed = match schema {
        InputSchema::Coauthorship => parse_coauthorship(reader, &tok, options),
        InputSchema::Qa => parse_qa(reader, &tok, options),
    }
    .map_err(|e| err(&format!("{}: {e}", input.display())))?;
    let meta = IngestMeta {
        schema,
        input: input
            .file_name()
            .map(|n| n.to_string_lossy().into_owned())
            .unwrap_or_default(),
        options: *options,
        tokenizer: tokenizer.clone(),
        snapshots: parsed.calendar.len(),
        stats: parsed.stats.clone(),
    };
    out.write(NETWORK_FILE, &network_to_tsv(&parsed.network))
        .map_err(|e| err(&e))?;
    out.write(CALENDAR_FILE, &calendar_tsv(&parsed.calendar))
        .map_err(|e| err(&e))?;
    let json = serde_json::to_string_pretty(&meta).expect("meta serializes") + "\n";
    out.write(INGEST_META_FILE, &json).map_err(|e| err(&e))?;
    log::info!(
        "ingest: {} records, {} instances, {} actors, {} attributes, {} snapshots ({} malformed, {} single-participant, {} self events) in {:.2?}",
        parsed.stats.records,
        parsed.stats.instances,
        parsed.stats.actors,
        parsed.stats.attributes,
        parsed.calendar.len(),
        parsed.stats.malformed,
        parsed.stats.single_participant,
        parsed.stats.self_events,
        started.elapsed()
    );
    Ok(parsed.stats)
}

#[derive(Debug, Clone, Default)]
pub struct ClassifyOptions {
    pub relevance: RelevanceConfig,
    pub filter: Option<FilterConfig>,
    /// Precomputed relevance table used instead of extraction.
    pub relevance_file: Option<PathBuf>,
}

pub fn classify_stage(opts: &ClassifyOptions, out: &mut Outputs) -> Result<(), PipelineError> {
    let err = fail(Stage::Classify);
    let started = Instant::now();
    let net = load_network(out.dir()).map_err(|e| err(&e))?;
    let rel = if let Some(path) = &opts.relevance_file {
        let text = read_file(path).map_err(|e| err(&e))?;
        RelevanceMap::from_tsv(&text, &net).map_err(|e| err(&format!("{}: {e}", path.display())))?
    } else if let Some(filter) = &opts.filter {
        let report = randomization_filter(&net, &opts.relevance, filter).map_err(|e| err(&e))?;
        log::info!(
            "classify: randomization filter excluded {} of {} attributes",
            report.excluded.len(),
            report.attributes.len()
        );
        let filtered = remove_attributes(&net, &report.excluded_ids(&net)).map_err(|e| err(&e))?;
        let json = serde_json::to_string_pretty(&report).expect("report serializes") + "\n";
        out.write(FILTER_FILE, &json).map_err(|e| err(&e))?;
        extract_relevant(&filtered, &opts.relevance)
    } else {
        extract_relevant(&net, &opts.relevance)
    };
    let result = classify(&net, &rel).map_err(|e| err(&e))?;
    out.write(RELEVANCE_FILE, &rel.to_tsv(&net))
        .map_err(|e| err(&e))?;
    out.write(EDGE_LABELS_FILE, &edge_labels_to_tsv(&net, &result))
        .map_err(|e| err(&e))?;
    out.write(EDGE_STATES_FILE, &edge_states_to_tsv(&net, &result))
        .map_err(|e| err(&e))?;
    out.write(NODE_LABELS_FILE, &node_labels_to_tsv(&net, &result))
        .map_err(|e| err(&e))?;
    let s = crate::classifier::class_summary(&result);
    log::info!(
        "classify: nodes {:?}, edges {:?} (closure, brokerage, innocuous) in {:.2?}",
        s.nodes.counts,
        s.edges.counts,
        started.elapsed()
    );
    Ok(())
}

pub fn metrics_stage(cfg: &MetricsConfig, out: &mut Outputs) -> Result<(), PipelineError> {
    let err = fail(Stage::Metrics);
    let started = Instant::now();
    let net = load_network(out.dir()).map_err(|e| err(&e))?;
    let g = net.simple_view();
    let report = compute_all(&g, cfg).map_err(|e| err(&e))?;
    out.write(NODE_METRICS_FILE, &node_metrics_to_tsv(&net, &report))
        .map_err(|e| err(&e))?;
    out.write(EDGE_METRICS_FILE, &edge_metrics_to_tsv(&net, &report))
        .map_err(|e| err(&e))?;
    log::info!(
        "metrics: {} nodes, {} edges in {:.2?}",
        g.node_count(),
        g.edge_count(),
        started.elapsed()
    );
    Ok(())
}

pub fn validate_stage(alpha: f64, buckets: &[u32], out: &mut Outputs) -> Result<(), PipelineError> {
    let err = fail(Stage::Validate);
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(err(&format!("alpha must lie in (0, 1), got {alpha}")));
    }
    let started = Instant::now();
    let dir = out.dir().to_owned();
    let net = load_network(&dir).map_err(|e| err(&e))?;
    let labels = load_labels(&dir, &net).map_err(|e| err(&e))?;
    let metrics = load_metrics(&dir, &net).map_err(|e| err(&e))?;
    let v = ValidationOutput {
        alpha,
        buckets: buckets.to_vec(),
        overall: class_distributions(&net, &labels, &metrics, alpha),
        by_existence_time: existence_time_buckets(&net, &labels, &metrics, alpha, buckets),
    };
    let json = serde_json::to_string_pretty(&v).expect("validation serializes") + "\n";
    out.write(VALIDATION_FILE, &json).map_err(|e| err(&e))?;
    log::info!("validate: done in {:.2?}", started.elapsed());
    Ok(())
}

pub fn export_stage(formats: &[ExportFormat], out: &mut Outputs) -> Result<(), PipelineError> {
    let err = fail(Stage::Export);
    let dir = out.dir().to_owned();
    let net = load_network(&dir).map_err(|e| err(&e))?;
    let labels = load_labels(&dir, &net).map_err(|e| err(&e))?;
    for f in formats {
        match f {
            ExportFormat::Dot => {
                let dot = export_dot(&net, &labels).map_err(|e| err(&e))?;
                out.write(DOT_FILE, &dot).map_err(|e| err(&e))?;
            }
            ExportFormat::Graphml => {
                let metrics = if dir.join(NODE_METRICS_FILE).exists() {
                    Some(load_metrics(&dir, &net).map_err(|e| err(&e))?)
                } else {
                    None
                };
                let xml = export_graphml(&net, &labels, metrics.as_ref()).map_err(|e| err(&e))?;
                out.write(GRAPHML_FILE, &xml).map_err(|e| err(&e))?;
            }
            ExportFormat::Tsv => {
                out.write(CLASS_SUMMARY_FILE, &class_summary_tsv(&labels))
                    .map_err(|e| err(&e))?;
                let vpath = dir.join(VALIDATION_FILE);
                if vpath.exists() {
                    let text = read_file(&vpath).map_err(|e| err(&e))?;
                    let v: ValidationOutput =
                        serde_json::from_str(&text).map_err(|e| err(&format!("{}: {e}", vpath.display())))?;
                    out.write(DISTRIBUTIONS_FILE, &distributions_tsv(&v))
                        .map_err(|e| err(&e))?;
                    out.write(TESTS_FILE, &tests_tsv(&v)).map_err(|e| err(&e))?;
                } else {
                    log::warn!("export: no {VALIDATION_FILE}, skipping distribution and test tables");
                }
            }
        }
    }
    Ok(())
}

/// Runs every stage into `cfg.output`. On failure every file written by the
/// run is removed, and the directory too if the run created it.
pub fn run_pipeline(cfg: &RunConfig) -> Result<Vec<PathBuf>, PipelineError> {
    cfg.validate()?;
    let dir = cfg
        .output
        .clone()
        .ok_or_else(|| fail(Stage::Config)(&"no output directory given"))?;
    let mut out = Outputs::open(&dir).map_err(|e| fail(Stage::Config)(&format!("{}: {e}", dir.display())))?;
    let res = run_stages(cfg, &mut out);
    match res {
        Ok(()) => Ok(out.written().to_vec()),
        Err(e) => {
            out.rollback();
            Err(e)
        }
    }
}

fn run_stages(cfg: &RunConfig, out: &mut Outputs) -> Result<(), PipelineError> {
    out.write(RESOLVED_CONFIG_FILE, &cfg.to_resolved_toml())
        .map_err(|e| fail(Stage::Config)(&e))?;
    ingest_stage(
        &cfg.input.path,
        cfg.input.schema,
        &cfg.tokenizer,
        &cfg.ingest,
        out,
    )?;
    let copts = ClassifyOptions {
        relevance: cfg.relevance,
        filter: cfg.filter,
        relevance_file: None,
    };
    classify_stage(&copts, out)?;
    metrics_stage(&cfg.metrics, out)?;
    validate_stage(cfg.validation.alpha, &cfg.validation.buckets, out)?;
    export_stage(
        &[ExportFormat::Dot, ExportFormat::Graphml, ExportFormat::Tsv],
        out,
    )?;
    Ok(())
}
