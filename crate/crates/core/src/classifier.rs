//! Social classes for interactions and actors.
//!
//! Each endpoint of an interaction at snapshot `k` gets a dynamic state from
//! its relevant set at `k`: strong when the set meets the interaction's
//! attributes, weak when it is nonempty but disjoint, non-relevant when empty.
//! An interaction is closure if either endpoint is strong, brokerage if either
//! is weak, innocuous otherwise. An actor is closure if its final relevant set
//! is nonempty, brokerage if it was active in more than one snapshot, and
//! innocuous otherwise.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::{ActorId, AttributeId, EdgeInstance, TemporalNetwork};
use crate::relevance::RelevanceMap;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DynamicState {
    Strong,
    Weak,
    NonRelevant,
}

impl DynamicState {
    pub fn name(self) -> &'static str {
        match self {
            DynamicState::Strong => "strong",
            DynamicState::Weak => "weak",
            DynamicState::NonRelevant => "non-relevant",
        }
    }
}

impl fmt::Display for DynamicState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Ordered by precedence: `Closure > Brokerage > Innocuous`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ClassLabel {
    Innocuous,
    Brokerage,
    Closure,
}

impl ClassLabel {
    pub const ALL: [ClassLabel; 3] = [ClassLabel::Closure, ClassLabel::Brokerage, ClassLabel::Innocuous];

    pub fn name(self) -> &'static str {
        match self {
            ClassLabel::Closure => "closure",
            ClassLabel::Brokerage => "brokerage",
            ClassLabel::Innocuous => "innocuous",
        }
    }

    /// Position in [`ClassLabel::ALL`].
    pub fn slot(self) -> usize {
        match self {
            ClassLabel::Closure => 0,
            ClassLabel::Brokerage => 1,
            ClassLabel::Innocuous => 2,
        }
    }
}

impl fmt::Display for ClassLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ClassLabel {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "closure" => Ok(ClassLabel::Closure),
            "brokerage" => Ok(ClassLabel::Brokerage),
            "innocuous" => Ok(ClassLabel::Innocuous),
            other => Err(format!("unknown class `{other}`")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct EdgeLabel {
    pub class: ClassLabel,
    pub u_state: DynamicState,
    pub v_state: DynamicState,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ClassifyError {
    #[error("no relevant-attribute entry for actor `{actor}` at snapshot {snapshot}")]
    MissingRelevance { actor: String, snapshot: u32 },
    #[error("relevance map covers {map} snapshots but the network has {net}")]
    HorizonMismatch { map: usize, net: usize },
}

/// Labels for every instance (indexed like `net.instances()`) and every actor
/// (indexed by actor id; `None` for actors with no interactions).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClassificationResult {
    pub edges: Vec<EdgeLabel>,
    pub nodes: Vec<Option<ClassLabel>>,
}

fn intersects(sorted_a: &[AttributeId], sorted_b: &[AttributeId]) -> bool {
    let (mut i, mut j) = (0, 0);
    while i < sorted_a.len() && j < sorted_b.len() {
        match sorted_a[i].cmp(&sorted_b[j]) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => return true,
        }
    }
    false
}

pub fn dynamic_state(relevant: &[AttributeId], edge_attrs: &[AttributeId]) -> DynamicState {
    if relevant.is_empty() {
        DynamicState::NonRelevant
    } else if intersects(relevant, edge_attrs) {
        DynamicState::Strong
    } else {
        DynamicState::Weak
    }
}

pub fn edge_class(u_state: DynamicState, v_state: DynamicState) -> ClassLabel {
    use DynamicState::*;
    if u_state == Strong || v_state == Strong {
        ClassLabel::Closure
    } else if u_state == Weak || v_state == Weak {
        ClassLabel::Brokerage
    } else {
        ClassLabel::Innocuous
    }
}

fn lookup<'a>(
    net: &TemporalNetwork,
    rel: &'a RelevanceMap,
    u: ActorId,
    s: u32,
) -> Result<&'a [AttributeId], ClassifyError> {
    rel.get(u, s).ok_or_else(|| ClassifyError::MissingRelevance {
        actor: net.actor_name(u).to_owned(),
        snapshot: s,
    })
}

fn check_horizon(net: &TemporalNetwork, rel: &RelevanceMap) -> Result<(), ClassifyError> {
    if rel.t() != net.t() {
        return Err(ClassifyError::HorizonMismatch {
            map: rel.t(),
            net: net.t(),
        });
    }
    Ok(())
}

pub fn classify_edge(
    net: &TemporalNetwork,
    rel: &RelevanceMap,
    e: &EdgeInstance,
) -> Result<EdgeLabel, ClassifyError> {
    let u_state = dynamic_state(lookup(net, rel, e.u, e.snapshot)?, &e.attrs);
    let v_state = dynamic_state(lookup(net, rel, e.v, e.snapshot)?, &e.attrs);
    Ok(EdgeLabel {
        class: edge_class(u_state, v_state),
        u_state,
        v_state,
    })
}

pub fn classify_edges(net: &TemporalNetwork, rel: &RelevanceMap) -> Result<Vec<EdgeLabel>, ClassifyError> {
    check_horizon(net, rel)?;
    net.instances()
        .par_iter()
        .map(|e| classify_edge(net, rel, e))
        .collect()
}

pub fn classify_nodes(
    net: &TemporalNetwork,
    rel: &RelevanceMap,
) -> Result<Vec<Option<ClassLabel>>, ClassifyError> {
    check_horizon(net, rel)?;
    let last = net.t() as u32 - 1;
    (0..net.actor_count() as u32)
        .into_par_iter()
        .map(|u| {
            let u = ActorId(u);
            if !net.is_active(u) {
                return Ok(None);
            }
            let class = if !lookup(net, rel, u, last)?.is_empty() {
                ClassLabel::Closure
            } else if net.actor_presence(u).len() > 1 {
                ClassLabel::Brokerage
            } else {
                ClassLabel::Innocuous
            };
            Ok(Some(class))
        })
        .collect()
}

pub fn classify(net: &TemporalNetwork, rel: &RelevanceMap) -> Result<ClassificationResult, ClassifyError> {
    Ok(ClassificationResult {
        edges: classify_edges(net, rel)?,
        nodes: classify_nodes(net, rel)?,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct ClassCounts {
    /// Indexed by [`ClassLabel::slot`].
    pub counts: [usize; 3],
    pub total: usize,
}

impl ClassCounts {
    pub fn from_labels(labels: impl IntoIterator<Item = ClassLabel>) -> Self {
        let mut c = ClassCounts::default();
        for l in labels {
            c.counts[l.slot()] += 1;
            c.total += 1;
        }
        c
    }

    pub fn count(&self, class: ClassLabel) -> usize {
        self.counts[class.slot()]
    }

    /// Share of `class` in percent; 0 for an empty population.
    pub fn percent(&self, class: ClassLabel) -> f64 {
        if self.total == 0 {
            0.0
        } else {
            100.0 * self.count(class) as f64 / self.total as f64
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct ClassSummary {
    pub nodes: ClassCounts,
    pub edges: ClassCounts,
}

pub fn class_summary(result: &ClassificationResult) -> ClassSummary {
    ClassSummary {
        nodes: ClassCounts::from_labels(result.nodes.iter().flatten().copied()),
        edges: ClassCounts::from_labels(result.edges.iter().map(|e| e.class)),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::Interner;
    use crate::relevance::{RelevanceMap, RELEVANCE_HEADER};
    use DynamicState::*;

    fn ids(v: &[u32]) -> Vec<AttributeId> {
        v.iter().copied().map(AttributeId).collect()
    }

    #[test]
    fn edge_rule_cases() {
        let s = |g: &[u32], e: &[u32]| dynamic_state(&ids(g), &ids(e));
        let (a, b, c) = (0, 1, 2);
        let (us, vs) = (s(&[a], &[a, b]), s(&[], &[a, b]));
        assert_eq!(
            (edge_class(us, vs), us, vs),
            (ClassLabel::Closure, Strong, NonRelevant)
        );
        let (us, vs) = (s(&[c], &[a]), s(&[], &[a]));
        assert_eq!(
            (edge_class(us, vs), us, vs),
            (ClassLabel::Brokerage, Weak, NonRelevant)
        );
        let (us, vs) = (s(&[], &[a]), s(&[], &[a]));
        assert_eq!(
            (edge_class(us, vs), us, vs),
            (ClassLabel::Innocuous, NonRelevant, NonRelevant)
        );
        assert_eq!(edge_class(Weak, Strong), ClassLabel::Closure);
    }

    fn fixture() -> TemporalNetwork {
        // u active at 1 and 4 (0-based), w only at 2.
        let mut actors = Interner::new();
        for n in ["u", "v", "w", "x"] {
            actors.intern(n);
        }
        let mut attrs = Interner::new();
        attrs.intern("a");
        let e = |p: u32, q: u32, k: u32| EdgeInstance::new(ActorId(p), ActorId(q), k, ids(&[0]));
        TemporalNetwork::build(actors, attrs, vec![e(0, 1, 1), e(0, 1, 4), e(2, 3, 2)], 5).unwrap()
    }

    #[test]
    fn node_rule_cases() {
        let net = fixture();
        let text = format!("{RELEVANCE_HEADER}\n#snapshots\t5\nu\t0\t\nv\t0\t\nv\t4\ta\nw\t0\t\nx\t0\t\n");
        let rel = RelevanceMap::from_tsv(&text, &net).unwrap();
        let nodes = classify_nodes(&net, &rel).unwrap();
        assert_eq!(nodes[1], Some(ClassLabel::Closure));
        assert_eq!(nodes[0], Some(ClassLabel::Brokerage));
        assert_eq!(nodes[2], Some(ClassLabel::Innocuous));
        let edges = classify_edges(&net, &rel).unwrap();
        assert_eq!(edges[0].class, ClassLabel::Innocuous);
        // instances are ordered by snapshot: (u,v,1), (w,x,2), (u,v,4)
        assert_eq!(edges[1].class, ClassLabel::Innocuous);
        assert_eq!(edges[2].class, ClassLabel::Closure);
        assert_eq!(edges[2].v_state, Strong);
    }

    #[test]
    fn missing_entry_names_actor() {
        let net = fixture();
        let text = format!("{RELEVANCE_HEADER}\n#snapshots\t5\nu\t0\t\nv\t3\t\n");
        let rel = RelevanceMap::from_tsv(&text, &net).unwrap();
        let err = classify_edges(&net, &rel).unwrap_err();
        assert_eq!(
            err,
            ClassifyError::MissingRelevance {
                actor: "v".into(),
                snapshot: 1
            }
        );
    }

    #[test]
    fn summary_percentages() {
        let r = ClassificationResult {
            edges: [
                ClassLabel::Closure,
                ClassLabel::Closure,
                ClassLabel::Brokerage,
                ClassLabel::Brokerage,
            ]
            .into_iter()
            .map(|class| EdgeLabel {
                class,
                u_state: Strong,
                v_state: Strong,
            })
            .collect(),
            nodes: vec![],
        };
        let s = class_summary(&r);
        assert_eq!(s.edges.percent(ClassLabel::Closure), 50.0);
        assert_eq!(s.edges.percent(ClassLabel::Brokerage), 50.0);
        assert_eq!(s.edges.percent(ClassLabel::Innocuous), 0.0);
        let empty = class_summary(&ClassificationResult {
            edges: vec![],
            nodes: vec![],
        });
        assert_eq!(empty.nodes.total + empty.edges.total, 0);
        assert_eq!(empty.nodes.percent(ClassLabel::Closure), 0.0);
    }

    #[test]
    fn precedence_order() {
        assert!(ClassLabel::Closure > ClassLabel::Brokerage);
        assert!(ClassLabel::Brokerage > ClassLabel::Innocuous);
    }
}
