//! Tab-separated intermediate files shared by the pipeline stages.
//!
//! Every file starts with a schema line `#socialtie-<kind><TAB>v<N>`; readers
//! reject any other kind or version. Names are written verbatim, so actor and
//! attribute names must not contain tabs, newlines, `|` or `,`.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use thiserror::Error;

use crate::classifier::{ClassLabel, ClassificationResult, DynamicState, EdgeLabel};
use crate::graph::{ActorId, AttributeId, EdgeInstance, GraphError, Interner, TemporalNetwork};
use crate::metrics::MetricsReport;

pub const SCHEMA_VERSION: &str = "v1";

pub const NETWORK_FILE: &str = "network.tsv";
pub const CALENDAR_FILE: &str = "calendar.tsv";
pub const INGEST_META_FILE: &str = "ingest_meta.json";
pub const RELEVANCE_FILE: &str = "relevance.tsv";
pub const FILTER_FILE: &str = "randomization.json";
pub const EDGE_LABELS_FILE: &str = "edge_labels.tsv";
pub const NODE_LABELS_FILE: &str = "node_labels.tsv";
pub const EDGE_STATES_FILE: &str = "edge_states.tsv";
pub const NODE_METRICS_FILE: &str = "node_metrics.tsv";
pub const EDGE_METRICS_FILE: &str = "edge_metrics.tsv";

#[derive(Debug, Error)]
pub enum FormatError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}:{line}: {msg}")]
    Parse { path: PathBuf, line: usize, msg: String },
    #[error("{path}: schema mismatch, expected `{expected}`, found `{found}`")]
    Schema {
        path: PathBuf,
        expected: String,
        found: String,
    },
    #[error("{path}: {source}")]
    Graph {
        path: PathBuf,
        #[source]
        source: GraphError,
    },
}

pub fn schema_line(kind: &str) -> String {
    format!("#socialtie-{kind}\t{SCHEMA_VERSION}")
}

pub fn read_file(path: &Path) -> Result<String, FormatError> {
    fs::read_to_string(path).map_err(|source| FormatError::Io {
        path: path.to_owned(),
        source,
    })
}

pub fn write_file(path: &Path, contents: &str) -> Result<(), FormatError> {
    fs::write(path, contents).map_err(|source| FormatError::Io {
        path: path.to_owned(),
        source,
    })
}

/// Formats like C's `%.9g`: 9 significant digits, trailing zeros removed.
pub fn fmt_g9(x: f64) -> String {
    if x == 0.0 {
        return "0".to_owned();
    }
    if !x.is_finite() {
        return format!("{x}");
    }
    let sci = format!("{:.8e}", x);
    let (mantissa, exp) = sci.split_once('e').expect("exponent");
    let exp: i32 = exp.parse().expect("integer exponent");
    if (-4..9).contains(&exp) {
        let decimals = (8 - exp).max(0) as usize;
        let s = format!("{:.*}", decimals, x);
        if s.contains('.') {
            s.trim_end_matches('0').trim_end_matches('.').to_owned()
        } else {
            s
        }
    } else {
        let m = if mantissa.contains('.') {
            mantissa.trim_end_matches('0').trim_end_matches('.')
        } else {
            mantissa
        };
        format!("{m}e{}{:02}", if exp < 0 { '-' } else { '+' }, exp.abs())
    }
}

/// Parsed body of a schema-tagged file: `#key<TAB>value` directives and data rows.
pub struct Table<'a> {
    pub directives: Vec<(&'a str, &'a str)>,
    /// (line number, fields)
    pub rows: Vec<(usize, Vec<&'a str>)>,
}

pub fn parse_table<'a>(
    path: &Path,
    text: &'a str,
    kind: &str,
    columns: usize,
) -> Result<Table<'a>, FormatError> {
    let expected = schema_line(kind);
    let mut lines = text.lines().enumerate();
    let first = lines.next().map(|(_, l)| l).unwrap_or("");
    if first != expected {
        return Err(FormatError::Schema {
            path: path.to_owned(),
            expected,
            found: first.to_owned(),
        });
    }
    let mut directives = Vec::new();
    let mut rows = Vec::new();
    for (i, line) in lines {
        if line.is_empty() {
            continue;
        }
        if let Some(d) = line.strip_prefix('#') {
            let (k, v) = d.split_once('\t').unwrap_or((d, ""));
            directives.push((k, v));
            continue;
        }
        let fields: Vec<&str> = line.split('\t').collect();
        if fields.len() != columns {
            return Err(FormatError::Parse {
                path: path.to_owned(),
                line: i + 1,
                msg: format!("expected {columns} fields, found {}", fields.len()),
            });
        }
        rows.push((i + 1, fields));
    }
    Ok(Table { directives, rows })
}

impl Table<'_> {
    pub fn directive(&self, key: &str) -> Option<&str> {
        self.directives.iter().find(|(k, _)| *k == key).map(|(_, v)| *v)
    }
}

fn parse_err(path: &Path, line: usize, msg: impl Into<String>) -> FormatError {
    FormatError::Parse {
        path: path.to_owned(),
        line,
        msg: msg.into(),
    }
}

pub fn network_to_tsv(net: &TemporalNetwork) -> String {
    let mut out = String::new();
    writeln!(out, "{}", schema_line("network")).unwrap();
    writeln!(out, "#snapshots\t{}", net.t()).unwrap();
    writeln!(out, "#columns\tu\tv\tsnapshot\tattributes").unwrap();
    for i in net.instances() {
        let attrs: Vec<&str> = i.attrs.iter().map(|&a| net.attribute_name(a)).collect();
        writeln!(
            out,
            "{}\t{}\t{}\t{}",
            net.actor_name(i.u),
            net.actor_name(i.v),
            i.snapshot,
            attrs.join(",")
        )
        .unwrap();
    }
    out
}

/// Parses a network table. Actor and attribute ids follow order of first
/// appearance in the file.
pub fn network_from_tsv(path: &Path, text: &str) -> Result<TemporalNetwork, FormatError> {
    let table = parse_table(path, text, "network", 4)?;
    let t: usize = table
        .directive("snapshots")
        .ok_or_else(|| parse_err(path, 2, "missing #snapshots directive"))?
        .parse()
        .map_err(|_| parse_err(path, 2, "bad #snapshots value"))?;
    let mut actors = Interner::new();
    let mut attributes = Interner::new();
    let mut instances = Vec::with_capacity(table.rows.len());
    for (line, f) in &table.rows {
        let u = ActorId(actors.intern(f[0]));
        let v = ActorId(actors.intern(f[1]));
        let k: u32 = f[2]
            .parse()
            .map_err(|_| parse_err(path, *line, format!("bad snapshot `{}`", f[2])))?;
        let attrs = f[3]
            .split(',')
            .filter(|s| !s.is_empty())
            .map(|a| AttributeId(attributes.intern(a)))
            .collect();
        instances.push(EdgeInstance::new(u, v, k, attrs));
    }
    TemporalNetwork::build(actors, attributes, instances, t).map_err(|source| FormatError::Graph {
        path: path.to_owned(),
        source,
    })
}

pub fn load_network(dir: &Path) -> Result<TemporalNetwork, FormatError> {
    let path = dir.join(NETWORK_FILE);
    let text = read_file(&path)?;
    network_from_tsv(&path, &text)
}

/// Round-trips through the table form so ids match what a reader of the
/// written file would assign.
pub fn canonicalize(net: &TemporalNetwork) -> TemporalNetwork {
    network_from_tsv(Path::new("<memory>"), &network_to_tsv(net)).expect("own output parses")
}

pub fn edge_labels_to_tsv(net: &TemporalNetwork, result: &ClassificationResult) -> String {
    let mut out = String::new();
    writeln!(out, "{}", schema_line("edge-labels")).unwrap();
    writeln!(out, "#columns\tu\tv\tsnapshot\tclass").unwrap();
    for (i, l) in net.instances().iter().zip(&result.edges) {
        writeln!(
            out,
            "{}\t{}\t{}\t{}",
            net.actor_name(i.u),
            net.actor_name(i.v),
            i.snapshot,
            l.class
        )
        .unwrap();
    }
    out
}

pub fn edge_states_to_tsv(net: &TemporalNetwork, result: &ClassificationResult) -> String {
    let mut out = String::new();
    writeln!(out, "{}", schema_line("edge-states")).unwrap();
    writeln!(out, "#columns\tu\tv\tsnapshot\tu_state\tv_state").unwrap();
    for (i, l) in net.instances().iter().zip(&result.edges) {
        writeln!(
            out,
            "{}\t{}\t{}\t{}\t{}",
            net.actor_name(i.u),
            net.actor_name(i.v),
            i.snapshot,
            l.u_state,
            l.v_state
        )
        .unwrap();
    }
    out
}

pub fn node_labels_to_tsv(net: &TemporalNetwork, result: &ClassificationResult) -> String {
    let mut out = String::new();
    writeln!(out, "{}", schema_line("node-labels")).unwrap();
    writeln!(out, "#columns\tu\tclass").unwrap();
    for (u, l) in result.nodes.iter().enumerate() {
        if let Some(c) = l {
            writeln!(out, "{}\t{}", net.actor_name(ActorId(u as u32)), c).unwrap();
        }
    }
    out
}

fn parse_state(s: &str) -> Option<DynamicState> {
    match s {
        "strong" => Some(DynamicState::Strong),
        "weak" => Some(DynamicState::Weak),
        "non-relevant" => Some(DynamicState::NonRelevant),
        _ => None,
    }
}

/// Reads label files written for `net`, checking they line up with its instances.
pub fn load_labels(dir: &Path, net: &TemporalNetwork) -> Result<ClassificationResult, FormatError> {
    let edge_path = dir.join(EDGE_LABELS_FILE);
    let edge_text = read_file(&edge_path)?;
    let edges_tbl = parse_table(&edge_path, &edge_text, "edge-labels", 4)?;
    if edges_tbl.rows.len() != net.instances().len() {
        return Err(parse_err(
            &edge_path,
            1,
            format!(
                "{} label rows for {} instances",
                edges_tbl.rows.len(),
                net.instances().len()
            ),
        ));
    }
    let state_path = dir.join(EDGE_STATES_FILE);
    let states: Option<Vec<(DynamicState, DynamicState)>> = if state_path.exists() {
        let text = read_file(&state_path)?;
        let tbl = parse_table(&state_path, &text, "edge-states", 5)?;
        let mut v = Vec::with_capacity(tbl.rows.len());
        for (line, f) in &tbl.rows {
            let us = parse_state(f[3]).ok_or_else(|| parse_err(&state_path, *line, "bad state"))?;
            let vs = parse_state(f[4]).ok_or_else(|| parse_err(&state_path, *line, "bad state"))?;
            v.push((us, vs));
        }
        (v.len() == edges_tbl.rows.len()).then_some(v)
    } else {
        None
    };

    let mut edges = Vec::with_capacity(edges_tbl.rows.len());
    for (idx, ((line, f), inst)) in edges_tbl.rows.iter().zip(net.instances()).enumerate() {
        if f[0] != net.actor_name(inst.u)
            || f[1] != net.actor_name(inst.v)
            || f[2] != inst.snapshot.to_string()
        {
            return Err(parse_err(
                &edge_path,
                *line,
                "row does not match the network instance order",
            ));
        }
        let class: ClassLabel = f[3]
            .parse()
            .map_err(|e: String| parse_err(&edge_path, *line, e))?;
        let (u_state, v_state) = states
            .as_ref()
            .map_or((DynamicState::NonRelevant, DynamicState::NonRelevant), |s| s[idx]);
        edges.push(EdgeLabel {
            class,
            u_state,
            v_state,
        });
    }

    let node_path = dir.join(NODE_LABELS_FILE);
    let node_text = read_file(&node_path)?;
    let node_tbl = parse_table(&node_path, &node_text, "node-labels", 2)?;
    let mut nodes = vec![None; net.actor_count()];
    for (line, f) in &node_tbl.rows {
        let u = net
            .actor_id(f[0])
            .ok_or_else(|| parse_err(&node_path, *line, format!("unknown actor `{}`", f[0])))?;
        let class: ClassLabel = f[1]
            .parse()
            .map_err(|e: String| parse_err(&node_path, *line, e))?;
        nodes[u.index()] = Some(class);
    }
    Ok(ClassificationResult { edges, nodes })
}

pub fn node_metrics_to_tsv(net: &TemporalNetwork, m: &MetricsReport) -> String {
    let mut out = String::new();
    writeln!(out, "{}", schema_line("node-metrics")).unwrap();
    writeln!(out, "#columns\tu\t{}", MetricsReport::NODE_COLUMNS.join("\t")).unwrap();
    for u in net.active_actors() {
        let i = u.index();
        writeln!(
            out,
            "{}\t{}\t{}\t{}\t{}\t{}",
            net.actor_name(u),
            fmt_g9(m.degree[i]),
            fmt_g9(m.closeness[i]),
            fmt_g9(m.betweenness[i]),
            fmt_g9(m.clustering[i]),
            fmt_g9(m.pagerank[i])
        )
        .unwrap();
    }
    out
}

pub fn edge_metrics_to_tsv(net: &TemporalNetwork, m: &MetricsReport) -> String {
    let g = net.simple_view();
    let mut out = String::new();
    writeln!(out, "{}", schema_line("edge-metrics")).unwrap();
    writeln!(out, "#columns\tu\tv\tbetweenness").unwrap();
    for (eid, &(a, b)) in g.edges().iter().enumerate() {
        writeln!(
            out,
            "{}\t{}\t{}",
            net.actor_name(ActorId(a)),
            net.actor_name(ActorId(b)),
            fmt_g9(m.edge_betweenness[eid])
        )
        .unwrap();
    }
    out
}

/// Reads metric tables written for `net`. Values carry 9 significant digits.
pub fn load_metrics(dir: &Path, net: &TemporalNetwork) -> Result<MetricsReport, FormatError> {
    let n = net.actor_count();
    let node_path = dir.join(NODE_METRICS_FILE);
    let text = read_file(&node_path)?;
    let tbl = parse_table(&node_path, &text, "node-metrics", 6)?;
    let mut cols = vec![vec![0.0; n]; 5];
    for (line, f) in &tbl.rows {
        let u = net
            .actor_id(f[0])
            .ok_or_else(|| parse_err(&node_path, *line, format!("unknown actor `{}`", f[0])))?;
        for c in 0..5 {
            cols[c][u.index()] = f[c + 1]
                .parse()
                .map_err(|_| parse_err(&node_path, *line, format!("bad number `{}`", f[c + 1])))?;
        }
    }
    let g = net.simple_view();
    let edge_path = dir.join(EDGE_METRICS_FILE);
    let text = read_file(&edge_path)?;
    let tbl = parse_table(&edge_path, &text, "edge-metrics", 3)?;
    let mut edge = vec![0.0; g.edge_count()];
    for (line, f) in &tbl.rows {
        let (a, b) = match (net.actor_id(f[0]), net.actor_id(f[1])) {
            (Some(a), Some(b)) => (a, b),
            _ => return Err(parse_err(&edge_path, *line, "unknown actor")),
        };
        let eid = g
            .edge_id(a.0, b.0)
            .ok_or_else(|| parse_err(&edge_path, *line, "no such edge in the network"))?;
        edge[eid] = f[2]
            .parse()
            .map_err(|_| parse_err(&edge_path, *line, format!("bad number `{}`", f[2])))?;
    }
    let mut it = cols.into_iter();
    Ok(MetricsReport {
        degree: it.next().unwrap(),
        closeness: it.next().unwrap(),
        betweenness: it.next().unwrap(),
        clustering: it.next().unwrap(),
        pagerank: it.next().unwrap(),
        edge_betweenness: edge,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn g9_formatting() {
        assert_eq!(fmt_g9(0.0), "0");
        assert_eq!(fmt_g9(1.0), "1");
        assert_eq!(fmt_g9(0.25), "0.25");
        assert_eq!(fmt_g9(2.0 / 3.0), "0.666666667");
        assert_eq!(fmt_g9(123456789.0), "123456789");
        assert_eq!(fmt_g9(1234567890.0), "1.23456789e+09");
        assert_eq!(fmt_g9(0.000012345), "1.2345e-05");
        assert_eq!(fmt_g9(-31.5), "-31.5");
    }

    #[test]
    fn schema_mismatch_is_rejected() {
        let err = network_from_tsv(Path::new("x"), "#socialtie-network\tv0\n").unwrap_err();
        assert!(matches!(err, FormatError::Schema { .. }));
    }

    #[test]
    fn network_round_trip() {
        let text = "#socialtie-network\tv1\n#snapshots\t3\nA\tB\t0\tx,y\nB\tC\t2\t\n";
        let net = network_from_tsv(Path::new("x"), text).unwrap();
        assert_eq!(net.instances().len(), 2);
        let again = network_to_tsv(&net);
        let net2 = network_from_tsv(Path::new("x"), &again).unwrap();
        assert_eq!(net2.instances(), net.instances());
        assert_eq!(network_to_tsv(&net2), again);
    }
}
