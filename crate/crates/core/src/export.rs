//! Classified networks as DOT or GraphML, and plot-ready report tables.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::classifier::{class_summary, ClassLabel, ClassificationResult};
use crate::graph::{ActorId, SimpleGraph, TemporalNetwork};
use crate::io::{fmt_g9, schema_line};
use crate::metrics::MetricsReport;
use crate::validation::{BucketReport, ClassDistributionReport, MetricDistribution};

pub const DOT_FILE: &str = "classified.dot";
pub const GRAPHML_FILE: &str = "classified.graphml";
pub const CLASS_SUMMARY_FILE: &str = "class_summary.tsv";
pub const DISTRIBUTIONS_FILE: &str = "distributions.tsv";
pub const TESTS_FILE: &str = "tests.tsv";

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ExportError {
    #[error("{labels} edge labels for {instances} instances")]
    EdgeLabelCount { labels: usize, instances: usize },
    #[error("{labels} node labels for {actors} actors")]
    NodeLabelCount { labels: usize, actors: usize },
    #[error("active actor `{0}` has no class")]
    UnlabeledNode(String),
}

pub fn class_color(class: ClassLabel) -> &'static str {
    match class {
        ClassLabel::Closure => "blue",
        ClassLabel::Brokerage => "red",
        ClassLabel::Innocuous => "black",
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExportFormat {
    Dot,
    Graphml,
    Tsv,
}

impl std::str::FromStr for ExportFormat {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "dot" => Ok(Self::Dot),
            "graphml" => Ok(Self::Graphml),
            "tsv" => Ok(Self::Tsv),
            other => Err(format!("unknown export format `{other}`")),
        }
    }
}

/// Class of each collapsed edge of `g`: the highest-precedence class among
/// the instances between its endpoints.
pub fn collapsed_classes(
    net: &TemporalNetwork,
    g: &SimpleGraph,
    result: &ClassificationResult,
) -> Result<Vec<ClassLabel>, ExportError> {
    check_labels(net, result)?;
    let mut out: Vec<Option<ClassLabel>> = vec![None; g.edge_count()];
    for (inst, label) in net.instances().iter().zip(&result.edges) {
        let eid = g.edge_id(inst.u.0, inst.v.0).expect("instance edge in view");
        out[eid] = out[eid].max(Some(label.class));
    }
    Ok(out
        .into_iter()
        .map(|c| c.expect("every collapsed edge has an instance"))
        .collect())
}

fn check_labels(net: &TemporalNetwork, result: &ClassificationResult) -> Result<(), ExportError> {
    if result.edges.len() != net.instances().len() {
        return Err(ExportError::EdgeLabelCount {
            labels: result.edges.len(),
            instances: net.instances().len(),
        });
    }
    if result.nodes.len() != net.actor_count() {
        return Err(ExportError::NodeLabelCount {
            labels: result.nodes.len(),
            actors: net.actor_count(),
        });
    }
    for u in net.active_actors() {
        if result.nodes[u.index()].is_none() {
            return Err(ExportError::UnlabeledNode(net.actor_name(u).to_owned()));
        }
    }
    Ok(())
}

fn dot_id(s: &str) -> String {
    let mut out = String::with_capacity(s.len() + 2);
    out.push('"');
    for c in s.chars() {
        if c == '"' || c == '\\' {
            out.push('\\');
        }
        out.push(c);
    }
    out.push('"');
    out
}

/// Undirected DOT graph with one edge per interacting pair. Inactive actors
/// are left out.
pub fn export_dot(net: &TemporalNetwork, result: &ClassificationResult) -> Result<String, ExportError> {
    let g = net.simple_view();
    let edge_classes = collapsed_classes(net, &g, result)?;
    let mut out = String::new();
    out.push_str("graph socialtie {\n");
    out.push_str("  node [style=filled, fontcolor=white];\n");
    for u in net.active_actors() {
        let c = result.nodes[u.index()].expect("checked");
        writeln!(
            out,
            "  {} [class={}, color={}, fillcolor={}];",
            dot_id(net.actor_name(u)),
            c,
            class_color(c),
            class_color(c)
        )
        .unwrap();
    }
    for (&(a, b), &c) in g.edges().iter().zip(&edge_classes) {
        writeln!(
            out,
            "  {} -- {} [class={}, color={}];",
            dot_id(net.actor_name(ActorId(a))),
            dot_id(net.actor_name(ActorId(b))),
            c,
            class_color(c)
        )
        .unwrap();
    }
    out.push_str("}\n");
    Ok(out)
}

fn xml_escape(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for c in s.chars() {
        match c {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '"' => out.push_str("&quot;"),
            '\'' => out.push_str("&apos;"),
            _ => out.push(c),
        }
    }
    out
}

/// GraphML with the same content as [`export_dot`], plus metric values as
/// typed attributes when `metrics` is given.
pub fn export_graphml(
    net: &TemporalNetwork,
    result: &ClassificationResult,
    metrics: Option<&MetricsReport>,
) -> Result<String, ExportError> {
    let g = net.simple_view();
    let edge_classes = collapsed_classes(net, &g, result)?;
    let mut out = String::new();
    out.push_str("<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n");
    out.push_str("<graphml xmlns=\"http://graphml.graphdrawing.org/xmlns\">\n");
    out.push_str("  <key id=\"class\" for=\"node\" attr.name=\"class\" attr.type=\"string\"/>\n");
    out.push_str("  <key id=\"color\" for=\"node\" attr.name=\"color\" attr.type=\"string\"/>\n");
    out.push_str("  <key id=\"eclass\" for=\"edge\" attr.name=\"class\" attr.type=\"string\"/>\n");
    out.push_str("  <key id=\"ecolor\" for=\"edge\" attr.name=\"color\" attr.type=\"string\"/>\n");
    out.push_str("  <key id=\"instances\" for=\"edge\" attr.name=\"instances\" attr.type=\"int\"/>\n");
    if metrics.is_some() {
        for name in MetricsReport::NODE_COLUMNS {
            writeln!(
                out,
                "  <key id=\"{name}\" for=\"node\" attr.name=\"{name}\" attr.type=\"double\"/>"
            )
            .unwrap();
        }
        out.push_str(
            "  <key id=\"ebetweenness\" for=\"edge\" attr.name=\"betweenness\" attr.type=\"double\"/>\n",
        );
    }
    out.push_str("  <graph id=\"socialtie\" edgedefault=\"undirected\">\n");
    for u in net.active_actors() {
        let c = result.nodes[u.index()].expect("checked");
        writeln!(out, "    <node id=\"{}\">", xml_escape(net.actor_name(u))).unwrap();
        writeln!(out, "      <data key=\"class\">{c}</data>").unwrap();
        writeln!(out, "      <data key=\"color\">{}</data>", class_color(c)).unwrap();
        if let Some(m) = metrics {
            for (col, name) in MetricsReport::NODE_COLUMNS.iter().enumerate() {
                writeln!(
                    out,
                    "      <data key=\"{name}\">{}</data>",
                    fmt_g9(m.node_column(col)[u.index()])
                )
                .unwrap();
            }
        }
        out.push_str("    </node>\n");
    }
    let mut multiplicity = vec![0usize; g.edge_count()];
    for inst in net.instances() {
        multiplicity[g.edge_id(inst.u.0, inst.v.0).expect("instance edge")] += 1;
    }
    for (eid, (&(a, b), &c)) in g.edges().iter().zip(&edge_classes).enumerate() {
        writeln!(
            out,
            "    <edge id=\"e{eid}\" source=\"{}\" target=\"{}\">",
            xml_escape(net.actor_name(ActorId(a))),
            xml_escape(net.actor_name(ActorId(b)))
        )
        .unwrap();
        writeln!(out, "      <data key=\"eclass\">{c}</data>").unwrap();
        writeln!(out, "      <data key=\"ecolor\">{}</data>", class_color(c)).unwrap();
        writeln!(out, "      <data key=\"instances\">{}</data>", multiplicity[eid]).unwrap();
        if let Some(m) = metrics {
            writeln!(
                out,
                "      <data key=\"ebetweenness\">{}</data>",
                fmt_g9(m.edge_betweenness[eid])
            )
            .unwrap();
        }
        out.push_str("    </edge>\n");
    }
    out.push_str("  </graph>\n</graphml>\n");
    Ok(out)
}

/// Node and edge counts and percentages per class.
pub fn class_summary_tsv(result: &ClassificationResult) -> String {
    let s = class_summary(result);
    let mut out = String::new();
    writeln!(out, "{}", schema_line("class-summary")).unwrap();
    writeln!(out, "#columns\tscope\tclass\tcount\ttotal\tpercent").unwrap();
    for (scope, counts) in [("node", &s.nodes), ("edge", &s.edges)] {
        if counts.total == 0 {
            continue;
        }
        for c in ClassLabel::ALL {
            writeln!(
                out,
                "{scope}\t{c}\t{}\t{}\t{}",
                counts.count(c),
                counts.total,
                fmt_g9(counts.percent(c))
            )
            .unwrap();
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValidationOutput {
    pub alpha: f64,
    pub buckets: Vec<u32>,
    pub overall: ClassDistributionReport,
    pub by_existence_time: Vec<BucketReport>,
}

impl ValidationOutput {
    fn sections(&self) -> Vec<(String, &ClassDistributionReport)> {
        let mut v = vec![("all".to_owned(), &self.overall)];
        for b in &self.by_existence_time {
            if let Some(r) = &b.report {
                v.push((b.label(), r));
            }
        }
        v
    }
}

fn opt_g9(x: Option<f64>) -> String {
    x.map(fmt_g9).unwrap_or_default()
}

/// Per-class summary statistics of every metric, for box plots.
pub fn distributions_tsv(v: &ValidationOutput) -> String {
    let mut out = String::new();
    writeln!(out, "{}", schema_line("distributions")).unwrap();
    writeln!(
        out,
        "#columns\tbucket\tscope\tmetric\tclass\tn\tmin\tq1\tmedian\tq3\tmax\tmean"
    )
    .unwrap();
    for (bucket, report) in v.sections() {
        for m in &report.metrics {
            for g in &m.groups {
                let s = g.summary;
                writeln!(
                    out,
                    "{bucket}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}",
                    m.scope,
                    m.metric,
                    g.class,
                    g.n,
                    opt_g9(s.map(|s| s.min)),
                    opt_g9(s.map(|s| s.q1)),
                    opt_g9(s.map(|s| s.median)),
                    opt_g9(s.map(|s| s.q3)),
                    opt_g9(s.map(|s| s.max)),
                    opt_g9(s.map(|s| s.mean)),
                )
                .unwrap();
            }
        }
    }
    out
}

fn test_rows(out: &mut String, bucket: &str, m: &MetricDistribution) {
    let prefix = format!("{bucket}\t{}\t{}", m.scope, m.metric);
    match &m.omnibus {
        Some(r) => writeln!(
            out,
            "{prefix}\t{}\t{}\t{}\t{}\t{}\t{}\t",
            r.test.name(),
            r.groups.join(","),
            fmt_g9(r.statistic),
            fmt_g9(r.p_value),
            r.reject,
            method_name(r)
        )
        .unwrap(),
        None => writeln!(
            out,
            "{prefix}\tkruskal-wallis\t\t\t\t\t\t{}",
            m.omnibus_skipped.as_deref().unwrap_or("")
        )
        .unwrap(),
    }
    for p in &m.pairwise {
        let groups = format!("{},{}", p.a, p.b);
        match &p.result {
            Some(r) => writeln!(
                out,
                "{prefix}\t{}\t{groups}\t{}\t{}\t{}\t{}\t",
                r.test.name(),
                fmt_g9(r.statistic),
                fmt_g9(r.p_value),
                r.reject,
                method_name(r)
            )
            .unwrap(),
            None => writeln!(
                out,
                "{prefix}\tmann-whitney-u\t{groups}\t\t\t\t\t{}",
                p.skipped.as_deref().unwrap_or("")
            )
            .unwrap(),
        }
    }
}

fn method_name(r: &crate::stats::StatTestResult) -> &'static str {
    match r.method {
        crate::stats::PValueMethod::Exact => "exact",
        crate::stats::PValueMethod::Asymptotic => "asymptotic",
    }
}

/// One row per hypothesis test: the omnibus test and each class pair.
pub fn tests_tsv(v: &ValidationOutput) -> String {
    let mut out = String::new();
    writeln!(out, "{}", schema_line("tests")).unwrap();
    writeln!(out, "#alpha\t{}", fmt_g9(v.alpha)).unwrap();
    writeln!(
        out,
        "#columns\tbucket\tscope\tmetric\ttest\tgroups\tstatistic\tp_value\treject\tmethod\tskipped"
    )
    .unwrap();
    for (bucket, report) in v.sections() {
        for m in &report.metrics {
            test_rows(&mut out, &bucket, m);
        }
    }
    out
}
