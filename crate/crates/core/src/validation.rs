//! Distributions of structural metrics grouped by assigned class, with
//! Kruskal–Wallis across classes and Mann–Whitney between class pairs.

use serde::{Deserialize, Serialize};

use crate::classifier::{ClassLabel, ClassificationResult};
use crate::graph::{ActorId, TemporalNetwork};
use crate::metrics::MetricsReport;
use crate::stats::{kruskal_wallis, mann_whitney_u, FiveNumber, PercentileRule, StatTestResult};

/// Existence-time bucket lower bounds, in snapshots: [1,5), [5,10), [10,15), [15,inf).
pub const DEFAULT_BUCKETS: [u32; 4] = [1, 5, 10, 15];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroupSummary {
    pub class: ClassLabel,
    pub n: usize,
    pub summary: Option<FiveNumber>,
    #[serde(skip)]
    pub sample: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairTest {
    pub a: ClassLabel,
    pub b: ClassLabel,
    pub result: Option<StatTestResult>,
    pub skipped: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricDistribution {
    pub metric: String,
    /// `node` or `edge`.
    pub scope: String,
    pub groups: Vec<GroupSummary>,
    pub omnibus: Option<StatTestResult>,
    pub omnibus_skipped: Option<String>,
    pub pairwise: Vec<PairTest>,
}

impl MetricDistribution {
    pub fn group(&self, class: ClassLabel) -> &GroupSummary {
        &self.groups[class.slot()]
    }

    pub fn pair(&self, a: ClassLabel, b: ClassLabel) -> Option<&PairTest> {
        self.pairwise
            .iter()
            .find(|p| (p.a == a && p.b == b) || (p.a == b && p.b == a))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassDistributionReport {
    pub alpha: f64,
    pub node_population: usize,
    pub edge_population: usize,
    pub metrics: Vec<MetricDistribution>,
}

impl ClassDistributionReport {
    pub fn metric(&self, name: &str, scope: &str) -> Option<&MetricDistribution> {
        self.metrics.iter().find(|m| m.metric == name && m.scope == scope)
    }

    /// Same report with every test decision re-evaluated at `alpha`.
    pub fn with_alpha(&self, alpha: f64) -> Self {
        let mut r = self.clone();
        r.alpha = alpha;
        for m in &mut r.metrics {
            if let Some(o) = &mut m.omnibus {
                *o = o.with_alpha(alpha);
            }
            for p in &mut m.pairwise {
                if let Some(t) = &mut p.result {
                    *t = t.with_alpha(alpha);
                }
            }
        }
        r
    }
}

fn distribution(metric: &str, scope: &str, items: &[(ClassLabel, f64)], alpha: f64) -> MetricDistribution {
    let mut samples: [Vec<f64>; 3] = Default::default();
    for &(c, x) in items {
        samples[c.slot()].push(x);
    }
    let groups: Vec<GroupSummary> = ClassLabel::ALL
        .iter()
        .map(|&class| {
            let sample = std::mem::take(&mut samples[class.slot()]);
            GroupSummary {
                class,
                n: sample.len(),
                summary: FiveNumber::of(&sample, PercentileRule::Linear),
                sample,
            }
        })
        .collect();

    let testable: Vec<&GroupSummary> = groups.iter().filter(|g| g.n >= 2).collect();
    let (omnibus, omnibus_skipped) = if testable.len() >= 2 {
        let slices: Vec<&[f64]> = testable.iter().map(|g| g.sample.as_slice()).collect();
        let mut r = kruskal_wallis(&slices, alpha).expect("groups checked nonempty");
        r.groups = testable.iter().map(|g| g.class.name().to_owned()).collect();
        (Some(r), None)
    } else {
        (
            None,
            Some(format!(
                "{} class(es) with at least 2 members; omnibus test needs 2",
                testable.len()
            )),
        )
    };

    let mut pairwise = Vec::new();
    for (i, &a) in ClassLabel::ALL.iter().enumerate() {
        for &b in &ClassLabel::ALL[i + 1..] {
            let (ga, gb) = (&groups[a.slot()], &groups[b.slot()]);
            let test = if ga.n < 2 || gb.n < 2 {
                PairTest {
                    a,
                    b,
                    result: None,
                    skipped: Some(format!("{a}: {} member(s), {b}: {} member(s)", ga.n, gb.n)),
                }
            } else {
                let mut r = mann_whitney_u(&ga.sample, &gb.sample, alpha).expect("nonempty samples");
                r.groups = vec![a.name().to_owned(), b.name().to_owned()];
                PairTest {
                    a,
                    b,
                    result: Some(r),
                    skipped: None,
                }
            };
            pairwise.push(test);
        }
    }

    MetricDistribution {
        metric: metric.to_owned(),
        scope: scope.to_owned(),
        groups,
        omnibus,
        omnibus_skipped,
        pairwise,
    }
}

fn node_report(
    nodes: &[ActorId],
    result: &ClassificationResult,
    metrics: &MetricsReport,
    edge_items: Option<Vec<(ClassLabel, f64)>>,
    alpha: f64,
) -> ClassDistributionReport {
    let labelled: Vec<(ActorId, ClassLabel)> = nodes
        .iter()
        .filter_map(|&u| result.nodes[u.index()].map(|c| (u, c)))
        .collect();
    let mut out = Vec::new();
    for (col, name) in MetricsReport::NODE_COLUMNS.iter().enumerate() {
        let values = metrics.node_column(col);
        let items: Vec<(ClassLabel, f64)> = labelled.iter().map(|&(u, c)| (c, values[u.index()])).collect();
        out.push(distribution(name, "node", &items, alpha));
    }
    let edge_population = edge_items.as_ref().map_or(0, Vec::len);
    if let Some(items) = edge_items {
        out.push(distribution("betweenness", "edge", &items, alpha));
    }
    ClassDistributionReport {
        alpha,
        node_population: labelled.len(),
        edge_population,
        metrics: out,
    }
}

/// Groups every node metric by node class and edge betweenness by the class
/// of each interaction (an interaction contributes the betweenness of its
/// collapsed edge).
pub fn class_distributions(
    net: &TemporalNetwork,
    result: &ClassificationResult,
    metrics: &MetricsReport,
    alpha: f64,
) -> ClassDistributionReport {
    let graph = net.simple_view();
    let edge_items: Vec<(ClassLabel, f64)> = net
        .instances()
        .iter()
        .zip(&result.edges)
        .map(|(inst, label)| {
            let eid = graph
                .edge_id(inst.u.0, inst.v.0)
                .expect("every instance has a collapsed edge");
            (label.class, metrics.edge_betweenness[eid])
        })
        .collect();
    let nodes: Vec<ActorId> = net.active_actors().collect();
    node_report(&nodes, result, metrics, Some(edge_items), alpha)
}

/// Span between first and last active snapshot, inclusive. `None` if inactive.
pub fn existence_time(net: &TemporalNetwork, u: ActorId) -> Option<u32> {
    let p = net.actor_presence(u);
    Some(p.last()? - p.first()? + 1)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BucketReport {
    pub lower: u32,
    /// Exclusive; `None` is unbounded.
    pub upper: Option<u32>,
    pub size: usize,
    pub report: Option<ClassDistributionReport>,
    pub skipped: Option<String>,
}

impl BucketReport {
    pub fn label(&self) -> String {
        match self.upper {
            Some(u) => format!("[{},{})", self.lower, u),
            None => format!("[{},inf)", self.lower),
        }
    }
}

/// Index of the bucket holding `existence`, given ascending lower bounds.
pub fn bucket_of(bounds: &[u32], existence: u32) -> Option<usize> {
    let i = bounds.partition_point(|&b| b <= existence);
    i.checked_sub(1)
}

/// Node-level class distributions within each existence-time bucket.
pub fn existence_time_buckets(
    net: &TemporalNetwork,
    result: &ClassificationResult,
    metrics: &MetricsReport,
    alpha: f64,
    bounds: &[u32],
) -> Vec<BucketReport> {
    let mut members: Vec<Vec<ActorId>> = vec![Vec::new(); bounds.len()];
    for u in net.active_actors() {
        let e = existence_time(net, u).expect("active actor");
        if let Some(b) = bucket_of(bounds, e) {
            members[b].push(u);
        }
    }
    members
        .into_iter()
        .enumerate()
        .map(|(i, nodes)| {
            let (report, skipped) = if nodes.is_empty() {
                (None, Some("empty bucket".to_owned()))
            } else {
                (Some(node_report(&nodes, result, metrics, None, alpha)), None)
            };
            BucketReport {
                lower: bounds[i],
                upper: bounds.get(i + 1).copied(),
                size: nodes.len(),
                report,
                skipped,
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bucket_assignment() {
        let b = DEFAULT_BUCKETS;
        assert_eq!(bucket_of(&b, 1), Some(0));
        assert_eq!(bucket_of(&b, 4), Some(0));
        assert_eq!(bucket_of(&b, 5), Some(1));
        assert_eq!(bucket_of(&b, 14), Some(2));
        assert_eq!(bucket_of(&b, 55), Some(3));
        assert_eq!(bucket_of(&b, 0), None);
    }

    #[test]
    fn degenerate_grouping_skips_tests() {
        let items: Vec<(ClassLabel, f64)> = (0..5).map(|i| (ClassLabel::Closure, i as f64)).collect();
        let d = distribution("degree", "node", &items, 0.05);
        assert!(d.omnibus.is_none());
        assert!(d.omnibus_skipped.is_some());
        assert!(d.pairwise.iter().all(|p| p.result.is_none()));
        assert_eq!(d.group(ClassLabel::Closure).n, 5);
        assert_eq!(d.group(ClassLabel::Closure).summary.unwrap().median, 2.0);
    }

    #[test]
    fn small_class_only_skips_its_pairs() {
        let mut items: Vec<(ClassLabel, f64)> = (0..4).map(|i| (ClassLabel::Closure, i as f64)).collect();
        items.extend((0..4).map(|i| (ClassLabel::Brokerage, 10.0 + i as f64)));
        items.push((ClassLabel::Innocuous, 0.0));
        let d = distribution("degree", "node", &items, 0.05);
        let omni = d.omnibus.as_ref().unwrap();
        assert_eq!(omni.groups, vec!["closure", "brokerage"]);
        assert!(d
            .pair(ClassLabel::Closure, ClassLabel::Brokerage)
            .unwrap()
            .result
            .is_some());
        assert!(d
            .pair(ClassLabel::Closure, ClassLabel::Innocuous)
            .unwrap()
            .skipped
            .is_some());
    }
}
