//! Dynamic attributed multigraph.
//!
//! A [`TemporalNetwork`] is the union of `t` snapshot graphs. Every interaction
//! is an [`EdgeInstance`] between two actors at one snapshot, carrying a set of
//! attribute tokens. The actor–attribute view is kept as per-actor snapshot
//! sets, so `attr_presence(u, a)` answers "was `u` linked to `a` at snapshot k".

use std::collections::HashMap;
use std::fmt;

use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ActorId(pub u32);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct AttributeId(pub u32);

impl ActorId {
    #[inline]
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl AttributeId {
    #[inline]
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl fmt::Display for ActorId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "actor#{}", self.0)
    }
}

impl fmt::Display for AttributeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "attr#{}", self.0)
    }
}

/// Bijective string <-> dense id table. Ids are handed out in order of first
/// appearance.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Interner {
    names: Vec<String>,
    index: HashMap<String, u32>,
}

impl Interner {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn intern(&mut self, name: &str) -> u32 {
        if let Some(&id) = self.index.get(name) {
            return id;
        }
        let id = u32::try_from(self.names.len()).expect("more than u32::MAX interned names");
        self.names.push(name.to_owned());
        self.index.insert(name.to_owned(), id);
        id
    }

    pub fn get(&self, name: &str) -> Option<u32> {
        self.index.get(name).copied()
    }

    pub fn name(&self, id: u32) -> Option<&str> {
        self.names.get(id as usize).map(String::as_str)
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }
}

/// One interaction between `u` and `v` at a 0-based snapshot index.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct EdgeInstance {
    pub u: ActorId,
    pub v: ActorId,
    pub snapshot: u32,
    /// Sorted, deduplicated.
    pub attrs: Vec<AttributeId>,
}

impl EdgeInstance {
    pub fn new(u: ActorId, v: ActorId, snapshot: u32, mut attrs: Vec<AttributeId>) -> Self {
        attrs.sort_unstable();
        attrs.dedup();
        Self {
            u,
            v,
            snapshot,
            attrs,
        }
    }

    pub fn has_attr(&self, a: AttributeId) -> bool {
        self.attrs.binary_search(&a).is_ok()
    }

    /// Unordered endpoint pair, smaller id first.
    pub fn pair(&self) -> (ActorId, ActorId) {
        if self.u <= self.v {
            (self.u, self.v)
        } else {
            (self.v, self.u)
        }
    }
}

/// Sorted set of 0-based snapshot indices.
///
/// A sorted list rather than a fixed-width bitset: minute-binned Q&A data can
/// have millions of snapshots while each actor touches only a handful.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash)]
pub struct SnapshotSet(Vec<u32>);

impl SnapshotSet {
    pub fn contains(&self, k: u32) -> bool {
        self.0.binary_search(&k).is_ok()
    }

    /// Number of member snapshots strictly below `k`.
    pub fn count_below(&self, k: u32) -> usize {
        self.0.partition_point(|&s| s < k)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = u32> + '_ {
        self.0.iter().copied()
    }

    pub fn first(&self) -> Option<u32> {
        self.0.first().copied()
    }

    pub fn last(&self) -> Option<u32> {
        self.0.last().copied()
    }

    fn insert_sorted_tail(&mut self, k: u32) {
        // Instances are visited in snapshot order, so pushes arrive sorted.
        if self.0.last() != Some(&k) {
            debug_assert!(self.0.last().is_none_or(|&l| l < k));
            self.0.push(k);
        }
    }

    pub fn to_bits(&self, t: usize) -> Vec<bool> {
        let mut bits = vec![false; t];
        for k in self.iter() {
            bits[k as usize] = true;
        }
        bits
    }
}

impl FromIterator<u32> for SnapshotSet {
    fn from_iter<I: IntoIterator<Item = u32>>(iter: I) -> Self {
        let mut v: Vec<u32> = iter.into_iter().collect();
        v.sort_unstable();
        v.dedup();
        SnapshotSet(v)
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GraphError {
    #[error("snapshot count must be at least 1")]
    NoSnapshots,
    #[error("instance {index} ({u} - {v}) has snapshot {snapshot} but the network has only {t} snapshots")]
    SnapshotOutOfRange {
        index: usize,
        u: ActorId,
        v: ActorId,
        snapshot: u32,
        t: usize,
    },
    #[error("instance {index} is a self-interaction of {u}")]
    SelfInteraction { index: usize, u: ActorId },
    #[error("instance {index} references {what} id {id} which is not interned")]
    UnknownId {
        index: usize,
        what: &'static str,
        id: u32,
    },
}

/// Immutable dynamic multigraph plus its actor–attribute presence index.
#[derive(Debug, Clone)]
pub struct TemporalNetwork {
    t: usize,
    actors: Interner,
    attributes: Interner,
    instances: Vec<EdgeInstance>,
    /// `instances[offsets[k]..offsets[k + 1]]` are the instances at snapshot k.
    offsets: Vec<usize>,
    actor_presence: Vec<SnapshotSet>,
    /// Per actor, sorted by attribute id.
    attr_presence: Vec<Vec<(AttributeId, SnapshotSet)>>,
    /// Per actor, indices into `instances` of incident instances, in snapshot order.
    incident: Vec<Vec<u32>>,
}

/// Result of [`TemporalNetwork::build_lenient`]: the network and how many
/// self-interactions were discarded.
#[derive(Debug, Clone)]
pub struct BuildOutcome {
    pub network: TemporalNetwork,
    pub dropped_self_loops: usize,
}

impl TemporalNetwork {
    /// Builds the network, rejecting out-of-range snapshots and self-interactions.
    pub fn build(
        actors: Interner,
        attributes: Interner,
        instances: Vec<EdgeInstance>,
        t: usize,
    ) -> Result<Self, GraphError> {
        Self::build_inner(actors, attributes, instances, t, false).map(|o| o.network)
    }

    /// Like [`build`](Self::build) but drops self-interactions with a count
    /// instead of failing.
    pub fn build_lenient(
        actors: Interner,
        attributes: Interner,
        instances: Vec<EdgeInstance>,
        t: usize,
    ) -> Result<BuildOutcome, GraphError> {
        Self::build_inner(actors, attributes, instances, t, true)
    }

    fn build_inner(
        actors: Interner,
        attributes: Interner,
        instances: Vec<EdgeInstance>,
        t: usize,
        drop_self_loops: bool,
    ) -> Result<BuildOutcome, GraphError> {
        if t == 0 {
            return Err(GraphError::NoSnapshots);
        }
        let n_actors = actors.len();
        let n_attrs = attributes.len();
        let mut kept = Vec::with_capacity(instances.len());
        let mut dropped = 0usize;
        for (index, mut inst) in instances.into_iter().enumerate() {
            for (what, id, bound) in [("actor", inst.u.0, n_actors), ("actor", inst.v.0, n_actors)] {
                if id as usize >= bound {
                    return Err(GraphError::UnknownId { index, what, id });
                }
            }
            if let Some(bad) = inst.attrs.iter().find(|a| a.index() >= n_attrs) {
                return Err(GraphError::UnknownId {
                    index,
                    what: "attribute",
                    id: bad.0,
                });
            }
            if inst.snapshot as usize >= t {
                return Err(GraphError::SnapshotOutOfRange {
                    index,
                    u: inst.u,
                    v: inst.v,
                    snapshot: inst.snapshot,
                    t,
                });
            }
            if inst.u == inst.v {
                if drop_self_loops {
                    dropped += 1;
                    continue;
                }
                return Err(GraphError::SelfInteraction { index, u: inst.u });
            }
            inst.attrs.sort_unstable();
            inst.attrs.dedup();
            kept.push(inst);
        }
        if dropped > 0 {
            log::warn!("dropped {dropped} self-interaction(s) while building the network");
        }

        // Stable: preserves input order within a snapshot.
        kept.sort_by_key(|i| i.snapshot);

        let mut offsets = vec![0usize; t + 1];
        for inst in &kept {
            offsets[inst.snapshot as usize + 1] += 1;
        }
        for k in 0..t {
            offsets[k + 1] += offsets[k];
        }

        let mut actor_presence = vec![SnapshotSet::default(); n_actors];
        let mut incident: Vec<Vec<u32>> = vec![Vec::new(); n_actors];
        let mut attr_map: Vec<HashMap<AttributeId, SnapshotSet>> = vec![HashMap::new(); n_actors];
        for (idx, inst) in kept.iter().enumerate() {
            let idx = u32::try_from(idx).expect("more than u32::MAX instances");
            for end in [inst.u, inst.v] {
                actor_presence[end.index()].insert_sorted_tail(inst.snapshot);
                incident[end.index()].push(idx);
                let per_actor = &mut attr_map[end.index()];
                for &a in &inst.attrs {
                    per_actor.entry(a).or_default().insert_sorted_tail(inst.snapshot);
                }
            }
        }
        let attr_presence = attr_map
            .into_iter()
            .map(|m| {
                let mut v: Vec<_> = m.into_iter().collect();
                v.sort_unstable_by_key(|(a, _)| *a);
                v
            })
            .collect();

        Ok(BuildOutcome {
            network: TemporalNetwork {
                t,
                actors,
                attributes,
                instances: kept,
                offsets,
                actor_presence,
                attr_presence,
                incident,
            },
            dropped_self_loops: dropped,
        })
    }

    /// Number of snapshots.
    pub fn t(&self) -> usize {
        self.t
    }

    pub fn actors(&self) -> &Interner {
        &self.actors
    }

    pub fn attributes(&self) -> &Interner {
        &self.attributes
    }

    pub fn actor_count(&self) -> usize {
        self.actors.len()
    }

    pub fn attribute_count(&self) -> usize {
        self.attributes.len()
    }

    pub fn actor_name(&self, u: ActorId) -> &str {
        self.actors.name(u.0).unwrap_or("?")
    }

    pub fn attribute_name(&self, a: AttributeId) -> &str {
        self.attributes.name(a.0).unwrap_or("?")
    }

    pub fn actor_id(&self, name: &str) -> Option<ActorId> {
        self.actors.get(name).map(ActorId)
    }

    pub fn attribute_id(&self, name: &str) -> Option<AttributeId> {
        self.attributes.get(name).map(AttributeId)
    }

    /// All instances, ordered by snapshot.
    pub fn instances(&self) -> &[EdgeInstance] {
        &self.instances
    }

    pub fn snapshot(&self, k: usize) -> &[EdgeInstance] {
        &self.instances[self.offsets[k]..self.offsets[k + 1]]
    }

    pub fn actor_presence(&self, u: ActorId) -> &SnapshotSet {
        &self.actor_presence[u.index()]
    }

    /// Whether `u` participates in at least one instance.
    pub fn is_active(&self, u: ActorId) -> bool {
        !self.actor_presence[u.index()].is_empty()
    }

    /// Actors that appear in at least one instance (the aggregate node set).
    pub fn active_actors(&self) -> impl Iterator<Item = ActorId> + '_ {
        (0..self.actors.len() as u32)
            .map(ActorId)
            .filter(|&u| self.is_active(u))
    }

    pub fn attributes_of(&self, u: ActorId) -> &[(AttributeId, SnapshotSet)] {
        &self.attr_presence[u.index()]
    }

    pub fn attr_presence(&self, u: ActorId, a: AttributeId) -> Option<&SnapshotSet> {
        let list = &self.attr_presence[u.index()];
        list.binary_search_by_key(&a, |(x, _)| *x)
            .ok()
            .map(|i| &list[i].1)
    }

    /// Indices into [`instances`](Self::instances) of the instances touching `u`.
    pub fn incident(&self, u: ActorId) -> &[u32] {
        &self.incident[u.index()]
    }

    /// Rebuilds the network with each instance's attribute set replaced.
    /// `attrs` is indexed like [`instances`](Self::instances).
    pub fn with_attributes(&self, attrs: Vec<Vec<AttributeId>>) -> Result<Self, GraphError> {
        assert_eq!(attrs.len(), self.instances.len());
        let instances = self
            .instances
            .iter()
            .zip(attrs)
            .map(|(i, a)| EdgeInstance::new(i.u, i.v, i.snapshot, a))
            .collect();
        Self::build(self.actors.clone(), self.attributes.clone(), instances, self.t)
    }

    /// Collapses the multigraph into an undirected simple graph.
    pub fn simple_view(&self) -> SimpleGraph {
        SimpleGraph::from_pairs(self.actors.len(), self.instances.iter().map(|i| (i.u.0, i.v.0)))
    }
}

/// Undirected simple graph in compressed adjacency form.
///
/// Node ids coincide with [`ActorId`] indices of the source network. Edges are
/// numbered in lexicographic `(lo, hi)` order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SimpleGraph {
    n: usize,
    edges: Vec<(u32, u32)>,
    adj_offsets: Vec<usize>,
    /// (neighbor, edge id), sorted by neighbor.
    adj: Vec<(u32, u32)>,
}

impl SimpleGraph {
    /// Builds from arbitrary (possibly repeated, either-orientation) pairs.
    /// Self-loops are ignored.
    pub fn from_pairs(n: usize, pairs: impl IntoIterator<Item = (u32, u32)>) -> Self {
        let mut edges: Vec<(u32, u32)> = pairs
            .into_iter()
            .filter(|(a, b)| a != b)
            .map(|(a, b)| if a < b { (a, b) } else { (b, a) })
            .collect();
        edges.sort_unstable();
        edges.dedup();
        for &(a, b) in &edges {
            assert!((b as usize) < n, "edge ({a}, {b}) out of range for {n} nodes");
        }

        let mut degree = vec![0usize; n];
        for &(a, b) in &edges {
            degree[a as usize] += 1;
            degree[b as usize] += 1;
        }
        let mut adj_offsets = vec![0usize; n + 1];
        for i in 0..n {
            adj_offsets[i + 1] = adj_offsets[i] + degree[i];
        }
        let mut fill = adj_offsets.clone();
        let mut adj = vec![(0u32, 0u32); adj_offsets[n]];
        for (eid, &(a, b)) in edges.iter().enumerate() {
            let eid = eid as u32;
            adj[fill[a as usize]] = (b, eid);
            fill[a as usize] += 1;
            adj[fill[b as usize]] = (a, eid);
            fill[b as usize] += 1;
        }
        for i in 0..n {
            adj[adj_offsets[i]..adj_offsets[i + 1]].sort_unstable();
        }
        SimpleGraph {
            n,
            edges,
            adj_offsets,
            adj,
        }
    }

    pub fn node_count(&self) -> usize {
        self.n
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn edges(&self) -> &[(u32, u32)] {
        &self.edges
    }

    pub fn degree(&self, i: usize) -> usize {
        self.adj_offsets[i + 1] - self.adj_offsets[i]
    }

    /// (neighbor, edge id) pairs of `i`, sorted by neighbor.
    pub fn neighbors(&self, i: usize) -> &[(u32, u32)] {
        &self.adj[self.adj_offsets[i]..self.adj_offsets[i + 1]]
    }

    pub fn has_edge(&self, a: u32, b: u32) -> bool {
        self.neighbors(a as usize)
            .binary_search_by_key(&b, |(x, _)| *x)
            .is_ok()
    }

    pub fn edge_id(&self, a: u32, b: u32) -> Option<usize> {
        let key = if a < b { (a, b) } else { (b, a) };
        self.edges.binary_search(&key).ok()
    }
}
