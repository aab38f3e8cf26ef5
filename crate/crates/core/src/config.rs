//! Run configuration, read from and written back to TOML.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ingest::{IngestOptions, InputSchema};
use crate::metrics::MetricsConfig;
use crate::relevance::{FilterConfig, RelevanceConfig};
use crate::tokenize::TokenizerConfig;
use crate::validation::DEFAULT_BUCKETS;

pub const RESOLVED_CONFIG_FILE: &str = "config.resolved.toml";

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("{path}: {source}")]
    Read {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: {source}")]
    Parse {
        path: PathBuf,
        #[source]
        source: toml::de::Error,
    },
    #[error("invalid configuration: {0}")]
    Invalid(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InputConfig {
    pub path: PathBuf,
    pub schema: InputSchema,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ValidationConfig {
    pub alpha: f64,
    /// Ascending lower bounds of the existence-time buckets.
    pub buckets: Vec<u32>,
}

impl Default for ValidationConfig {
    fn default() -> Self {
        ValidationConfig {
            alpha: 0.05,
            buckets: DEFAULT_BUCKETS.to_vec(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub input: InputConfig,
    /// Output directory. Relative paths resolve against the config file.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<PathBuf>,
    #[serde(default)]
    pub ingest: IngestOptions,
    #[serde(default)]
    pub tokenizer: TokenizerConfig,
    #[serde(default)]
    pub relevance: RelevanceConfig,
    /// Randomization filter; absent means off.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub filter: Option<FilterConfig>,
    #[serde(default)]
    pub metrics: MetricsConfig,
    #[serde(default)]
    pub validation: ValidationConfig,
}

impl RunConfig {
    pub fn new(input: PathBuf, schema: InputSchema) -> Self {
        RunConfig {
            input: InputConfig { path: input, schema },
            output: None,
            ingest: IngestOptions::default(),
            tokenizer: TokenizerConfig::default(),
            relevance: RelevanceConfig::default(),
            filter: None,
            metrics: MetricsConfig::default(),
            validation: ValidationConfig::default(),
        }
    }

    pub fn from_toml(text: &str, path: &Path) -> Result<Self, ConfigError> {
        toml::from_str(text).map_err(|source| ConfigError::Parse {
            path: path.to_owned(),
            source,
        })
    }

    /// Reads `path` and resolves relative paths against its directory.
    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Read {
            path: path.to_owned(),
            source,
        })?;
        let mut cfg = Self::from_toml(&text, path)?;
        let base = path.parent().unwrap_or(Path::new(""));
        cfg.input.path = base.join(&cfg.input.path);
        if let Some(out) = &cfg.output {
            cfg.output = Some(base.join(out));
        }
        if let crate::tokenize::StopWords::File(p) = &cfg.tokenizer.stop_words {
            cfg.tokenizer.stop_words = crate::tokenize::StopWords::File(base.join(p));
        }
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let bad = |m: String| Err(ConfigError::Invalid(m));
        let a = self.validation.alpha;
        if !(a > 0.0 && a < 1.0) {
            return bad(format!("validation.alpha must lie in (0, 1), got {a}"));
        }
        if self.validation.buckets.is_empty() || self.validation.buckets.windows(2).any(|w| w[0] >= w[1]) {
            return bad("validation.buckets must be nonempty and strictly ascending".into());
        }
        if let Some(f) = &self.filter {
            if f.trials == 0 {
                return bad("filter.trials must be positive".into());
            }
            if !(f.alpha > 0.0 && f.alpha < 1.0) {
                return bad(format!("filter.alpha must lie in (0, 1), got {}", f.alpha));
            }
        }
        let d = self.metrics.pagerank.damping;
        if !(0.0..1.0).contains(&d) {
            return bad(format!("metrics.pagerank.damping must lie in [0, 1), got {d}"));
        }
        if let crate::metrics::BetweennessMode::Sampled { pivots: 0, .. } = self.metrics.betweenness {
            return bad("metrics.betweenness.pivots must be positive".into());
        }
        let r = &self.relevance;
        if !(r.iqr_multiplier >= 0.0) || !(r.modified_z_threshold > 0.0) {
            return bad("relevance thresholds must be nonnegative".into());
        }
        Ok(())
    }

    /// The form persisted beside run outputs. The output directory is
    /// omitted since the file lives in it.
    pub fn to_resolved_toml(&self) -> String {
        let mut c = self.clone();
        c.output = None;
        toml::to_string(&c).expect("config serializes")
    }
}
