//! Text to attribute tokens: lowercase, split on non-alphanumerics, drop
//! stop-words and short tokens, stem, dedupe.

use std::collections::{BTreeSet, HashSet};
use std::path::PathBuf;

use rust_stemmers::{Algorithm, Stemmer};
use serde::{Deserialize, Serialize};

/// Identifier of the bundled stop list. Bump when the list changes.
pub const BUILTIN_STOP_LIST: &str = "en-v1";

const STOP_WORDS_EN_V1: &[&str] = &[
    "a",
    "about",
    "above",
    "after",
    "again",
    "against",
    "all",
    "also",
    "am",
    "an",
    "and",
    "any",
    "are",
    "aren",
    "as",
    "at",
    "be",
    "because",
    "been",
    "before",
    "being",
    "below",
    "between",
    "both",
    "but",
    "by",
    "can",
    "could",
    "couldn",
    "did",
    "didn",
    "do",
    "does",
    "doesn",
    "doing",
    "don",
    "down",
    "during",
    "each",
    "etc",
    "few",
    "for",
    "from",
    "further",
    "had",
    "hadn",
    "has",
    "hasn",
    "have",
    "haven",
    "having",
    "he",
    "her",
    "here",
    "hers",
    "herself",
    "him",
    "himself",
    "his",
    "how",
    "i",
    "if",
    "in",
    "into",
    "is",
    "isn",
    "it",
    "its",
    "itself",
    "just",
    "let",
    "ll",
    "me",
    "might",
    "more",
    "most",
    "must",
    "mustn",
    "my",
    "myself",
    "no",
    "nor",
    "not",
    "now",
    "of",
    "off",
    "on",
    "once",
    "only",
    "or",
    "other",
    "ought",
    "our",
    "ours",
    "ourselves",
    "out",
    "over",
    "own",
    "re",
    "same",
    "shall",
    "shan",
    "she",
    "should",
    "shouldn",
    "so",
    "some",
    "such",
    "than",
    "that",
    "the",
    "their",
    "theirs",
    "them",
    "themselves",
    "then",
    "there",
    "these",
    "they",
    "this",
    "those",
    "through",
    "to",
    "too",
    "under",
    "until",
    "up",
    "upon",
    "us",
    "ve",
    "very",
    "via",
    "was",
    "wasn",
    "we",
    "were",
    "weren",
    "what",
    "when",
    "where",
    "which",
    "while",
    "who",
    "whom",
    "why",
    "will",
    "with",
    "won",
    "would",
    "wouldn",
    "you",
    "your",
    "yours",
    "yourself",
    "yourselves",
];

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum StopWords {
    Builtin(String),
    /// One word per line; `#` starts a comment.
    File(PathBuf),
    None,
}

impl Default for StopWords {
    fn default() -> Self {
        StopWords::Builtin(BUILTIN_STOP_LIST.to_owned())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TokenizerConfig {
    pub stop_words: StopWords,
    pub stemming: bool,
    pub lowercase: bool,
    pub min_token_len: usize,
}

impl Default for TokenizerConfig {
    fn default() -> Self {
        TokenizerConfig {
            stop_words: StopWords::default(),
            stemming: true,
            lowercase: true,
            min_token_len: 2,
        }
    }
}

pub struct Tokenizer {
    config: TokenizerConfig,
    stop: HashSet<String>,
    stemmer: Option<Stemmer>,
}

impl std::fmt::Debug for Tokenizer {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Tokenizer").field("config", &self.config).finish()
    }
}

impl Tokenizer {
    pub fn new(config: TokenizerConfig) -> std::io::Result<Self> {
        let stop = match &config.stop_words {
            StopWords::Builtin(name) if name == BUILTIN_STOP_LIST => {
                STOP_WORDS_EN_V1.iter().map(|s| s.to_string()).collect()
            }
            StopWords::Builtin(name) => {
                return Err(std::io::Error::new(
                    std::io::ErrorKind::InvalidInput,
                    format!("unknown built-in stop list `{name}`"),
                ))
            }
            StopWords::File(path) => std::fs::read_to_string(path)?
                .lines()
                .map(|l| l.split('#').next().unwrap_or("").trim())
                .filter(|l| !l.is_empty())
                .map(|l| {
                    if config.lowercase {
                        l.to_lowercase()
                    } else {
                        l.to_owned()
                    }
                })
                .collect(),
            StopWords::None => HashSet::new(),
        };
        let stemmer = config.stemming.then(|| Stemmer::create(Algorithm::English));
        Ok(Tokenizer {
            config,
            stop,
            stemmer,
        })
    }

    pub fn config(&self) -> &TokenizerConfig {
        &self.config
    }

    fn keep(&self, tok: &str) -> bool {
        tok.chars().count() >= self.config.min_token_len && !self.stop.contains(tok)
    }

    /// Stems to a fixed point, so that stemming a stem changes nothing.
    fn stem(&self, word: &str) -> String {
        let Some(stemmer) = &self.stemmer else {
            return word.to_owned();
        };
        let mut cur = word.to_owned();
        loop {
            let next = stemmer.stem(&cur).into_owned();
            if next == cur {
                return cur;
            }
            cur = next;
        }
    }

    /// Distinct tokens of `text`, sorted.
    pub fn tokenize(&self, text: &str) -> Vec<String> {
        let text = if self.config.lowercase {
            text.to_lowercase()
        } else {
            text.to_owned()
        };
        let mut out = BTreeSet::new();
        for raw in text.split(|c: char| !c.is_alphanumeric()) {
            if raw.is_empty() || !self.keep(raw) {
                continue;
            }
            let stemmed = self.stem(raw);
            // A stem can shrink below the length floor or land on a stop-word.
            if self.keep(&stemmed) {
                out.insert(stemmed);
            }
        }
        out.into_iter().collect()
    }
}
