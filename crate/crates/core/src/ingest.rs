//! Interaction logs to temporal networks.
//!
//! Two line-oriented inputs are understood (UTF-8, LF, literal tabs):
//!
//! - coauthorship: `year<TAB>author1|author2|...<TAB>title`. A paper with m
//!   distinct authors becomes C(m, 2) interactions sharing the title tokens.
//! - Q&A: `epoch<TAB>src<TAB>dst<TAB>kind<TAB>text`, binned into minutes.
//!
//! Time labels (years or minutes) are mapped to contiguous snapshot indices.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::io::BufRead;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::{ActorId, AttributeId, EdgeInstance, GraphError, Interner, TemporalNetwork};
use crate::io::canonicalize;
use crate::tokenize::Tokenizer;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum InputSchema {
    Coauthorship,
    Qa,
}

impl std::str::FromStr for InputSchema {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "coauthorship" => Ok(Self::Coauthorship),
            "qa" => Ok(Self::Qa),
            other => Err(format!("unknown input schema `{other}`")),
        }
    }
}

/// How time labels become snapshot indices.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CalendarMode {
    /// Only labels that occur get an index.
    #[default]
    Compact,
    /// Every label between the first and last observed one gets an index.
    Raw,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct IngestOptions {
    /// Abort on the first malformed line instead of skipping it.
    pub strict: bool,
    pub calendar: CalendarMode,
    /// Drop interactions touching actors active in fewer snapshots than this.
    pub min_active_snapshots: usize,
    /// Drop interactions touching actors with fewer interactions than this.
    pub min_instances: usize,
}

#[derive(Debug, Error)]
pub enum IngestError {
    #[error("read failed: {0}")]
    Io(#[from] std::io::Error),
    #[error("line {line}: {msg}")]
    Malformed { line: usize, msg: String },
    #[error("input contains no usable interactions")]
    Empty,
    #[error(transparent)]
    Graph(#[from] GraphError),
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct IngestStats {
    pub lines: usize,
    pub records: usize,
    pub malformed: usize,
    pub single_participant: usize,
    pub self_events: usize,
    /// Sum over kept records of C(m, 2).
    pub expected_instances: usize,
    pub instances: usize,
    pub filtered_instances: usize,
    pub actors: usize,
    pub attributes: usize,
}

#[derive(Debug)]
pub struct IngestOutput {
    pub network: TemporalNetwork,
    /// Time label of each snapshot index.
    pub calendar: Vec<i64>,
    pub stats: IngestStats,
}

struct RawEdge {
    time: i64,
    u: String,
    v: String,
    attrs: Vec<String>,
}

fn lines_of<R: BufRead>(reader: R) -> impl Iterator<Item = (usize, std::io::Result<String>)> {
    reader.lines().enumerate().map(|(i, l)| (i + 1, l))
}

fn malformed(
    stats: &mut IngestStats,
    opts: &IngestOptions,
    line: usize,
    msg: String,
) -> Result<(), IngestError> {
    if opts.strict {
        return Err(IngestError::Malformed { line, msg });
    }
    log::debug!("skipping line {line}: {msg}");
    stats.malformed += 1;
    Ok(())
}

pub fn parse_coauthorship<R: BufRead>(
    reader: R,
    tokenizer: &Tokenizer,
    opts: &IngestOptions,
) -> Result<IngestOutput, IngestError> {
    let mut stats = IngestStats::default();
    let mut raw = Vec::new();
    for (line_no, line) in lines_of(reader) {
        let line = line?;
        stats.lines += 1;
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split('\t').collect();
        if fields.len() != 3 {
            malformed(
                &mut stats,
                opts,
                line_no,
                format!("expected 3 fields, found {}", fields.len()),
            )?;
            continue;
        }
        let Ok(year) = fields[0].trim().parse::<i64>() else {
            malformed(
                &mut stats,
                opts,
                line_no,
                format!("non-numeric year `{}`", fields[0]),
            )?;
            continue;
        };
        let mut authors: Vec<&str> = Vec::new();
        for a in fields[1].split('|').map(str::trim).filter(|a| !a.is_empty()) {
            if !authors.contains(&a) {
                authors.push(a);
            }
        }
        if authors.is_empty() {
            malformed(&mut stats, opts, line_no, "no authors".into())?;
            continue;
        }
        stats.records += 1;
        if authors.len() == 1 {
            stats.single_participant += 1;
            continue;
        }
        let m = authors.len();
        stats.expected_instances += m * (m - 1) / 2;
        let attrs = tokenizer.tokenize(fields[2]);
        for i in 0..m {
            for j in i + 1..m {
                raw.push(RawEdge {
                    time: year,
                    u: authors[i].to_owned(),
                    v: authors[j].to_owned(),
                    attrs: attrs.clone(),
                });
            }
        }
    }
    assemble(raw, stats, opts)
}

pub fn parse_qa<R: BufRead>(
    reader: R,
    tokenizer: &Tokenizer,
    opts: &IngestOptions,
) -> Result<IngestOutput, IngestError> {
    let mut stats = IngestStats::default();
    let mut raw = Vec::new();
    for (line_no, line) in lines_of(reader) {
        let line = line?;
        stats.lines += 1;
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split('\t').collect();
        if fields.len() != 5 {
            malformed(
                &mut stats,
                opts,
                line_no,
                format!("expected 5 fields, found {}", fields.len()),
            )?;
            continue;
        }
        let Ok(epoch) = fields[0].trim().parse::<i64>() else {
            malformed(
                &mut stats,
                opts,
                line_no,
                format!("non-numeric timestamp `{}`", fields[0]),
            )?;
            continue;
        };
        let (src, dst) = (fields[1].trim(), fields[2].trim());
        if src.is_empty() || dst.is_empty() {
            malformed(&mut stats, opts, line_no, "empty participant".into())?;
            continue;
        }
        stats.records += 1;
        if src == dst {
            stats.self_events += 1;
            continue;
        }
        stats.expected_instances += 1;
        raw.push(RawEdge {
            time: epoch.div_euclid(60),
            u: src.to_owned(),
            v: dst.to_owned(),
            attrs: tokenizer.tokenize(fields[4]),
        });
    }
    assemble(raw, stats, opts)
}

/// Snapshot index per time label, ordered by time.
pub fn build_calendar(times: impl IntoIterator<Item = i64>, mode: CalendarMode) -> Vec<i64> {
    let seen: BTreeSet<i64> = times.into_iter().collect();
    match mode {
        CalendarMode::Compact => seen.into_iter().collect(),
        CalendarMode::Raw => match (seen.first(), seen.last()) {
            (Some(&lo), Some(&hi)) => (lo..=hi).collect(),
            _ => Vec::new(),
        },
    }
}

fn activity_filter(raw: Vec<RawEdge>, opts: &IngestOptions) -> (Vec<RawEdge>, usize) {
    if opts.min_active_snapshots <= 1 && opts.min_instances <= 1 {
        return (raw, 0);
    }
    let mut snaps: HashMap<&str, BTreeSet<i64>> = HashMap::new();
    let mut count: HashMap<&str, usize> = HashMap::new();
    for e in &raw {
        for a in [e.u.as_str(), e.v.as_str()] {
            snaps.entry(a).or_default().insert(e.time);
            *count.entry(a).or_default() += 1;
        }
    }
    let ok = |a: &str| snaps[a].len() >= opts.min_active_snapshots && count[a] >= opts.min_instances;
    let keep: Vec<bool> = raw.iter().map(|e| ok(&e.u) && ok(&e.v)).collect();
    let before = raw.len();
    let kept: Vec<RawEdge> = raw
        .into_iter()
        .zip(keep)
        .filter_map(|(e, k)| k.then_some(e))
        .collect();
    let dropped = before - kept.len();
    (kept, dropped)
}

fn assemble(
    raw: Vec<RawEdge>,
    mut stats: IngestStats,
    opts: &IngestOptions,
) -> Result<IngestOutput, IngestError> {
    let (raw, filtered) = activity_filter(raw, opts);
    stats.filtered_instances = filtered;
    if raw.is_empty() {
        return Err(IngestError::Empty);
    }
    let calendar = build_calendar(raw.iter().map(|e| e.time), opts.calendar);
    let index: BTreeMap<i64, u32> = calendar.iter().enumerate().map(|(i, &t)| (t, i as u32)).collect();

    let mut actors = Interner::new();
    let mut attributes = Interner::new();
    let instances: Vec<EdgeInstance> = raw
        .iter()
        .map(|e| {
            let u = ActorId(actors.intern(&e.u));
            let v = ActorId(actors.intern(&e.v));
            let attrs: Vec<AttributeId> = e
                .attrs
                .iter()
                .map(|a| AttributeId(attributes.intern(a)))
                .collect();
            EdgeInstance::new(u, v, index[&e.time], attrs)
        })
        .collect();
    let network = TemporalNetwork::build(actors, attributes, instances, calendar.len())?;
    let network = canonicalize(&network);
    stats.instances = network.instances().len();
    stats.actors = network.actor_count();
    stats.attributes = network.attribute_count();
    Ok(IngestOutput {
        network,
        calendar,
        stats,
    })
}
