//! Independent reference implementations used by the integration tests.
//!
//! Nothing here calls into the library's algorithms; the oracles work from
//! the raw instance list or adjacency matrix.
#![allow(dead_code)]

use std::cmp::Ordering;
use std::collections::BTreeSet;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use socialtie::classifier::ClassLabel;
use socialtie::graph::{ActorId, AttributeId, EdgeInstance, Interner, SimpleGraph, TemporalNetwork};

// ---------------------------------------------------------------- rationals

fn gcd(a: i128, b: i128) -> i128 {
    if b == 0 {
        a.abs()
    } else {
        gcd(b, a % b)
    }
}

/// Exact fraction with positive denominator.
#[derive(Debug, Clone, Copy)]
pub struct Ratio {
    num: i128,
    den: i128,
}

impl Ratio {
    pub fn new(num: i128, den: i128) -> Self {
        assert!(den != 0);
        let g = gcd(num, den).max(1);
        let s = if den < 0 { -1 } else { 1 };
        Ratio {
            num: s * num / g,
            den: s * den / g,
        }
    }

    pub fn int(x: i128) -> Self {
        Ratio::new(x, 1)
    }

    pub fn add(self, o: Ratio) -> Ratio {
        Ratio::new(self.num * o.den + o.num * self.den, self.den * o.den)
    }

    pub fn sub(self, o: Ratio) -> Ratio {
        Ratio::new(self.num * o.den - o.num * self.den, self.den * o.den)
    }

    pub fn mul(self, o: Ratio) -> Ratio {
        Ratio::new(self.num * o.num, self.den * o.den)
    }

    pub fn to_f64(self) -> f64 {
        self.num as f64 / self.den as f64
    }

    pub fn floor(self) -> i128 {
        self.num.div_euclid(self.den)
    }
}

impl PartialEq for Ratio {
    fn eq(&self, o: &Self) -> bool {
        self.cmp(o) == Ordering::Equal
    }
}

impl Eq for Ratio {}

impl PartialOrd for Ratio {
    fn partial_cmp(&self, o: &Self) -> Option<Ordering> {
        Some(self.cmp(o))
    }
}

impl Ord for Ratio {
    fn cmp(&self, o: &Self) -> Ordering {
        (self.num * o.den).cmp(&(o.num * self.den))
    }
}

// ------------------------------------------------------- toy temporal networks

#[derive(Debug, Clone)]
pub struct ToyInstance {
    pub u: u32,
    pub v: u32,
    pub snapshot: u32,
    pub attrs: BTreeSet<u32>,
}

#[derive(Debug, Clone)]
pub struct Toy {
    pub actors: u32,
    pub attributes: u32,
    pub t: u32,
    /// Ordered by snapshot, ties in generation order.
    pub instances: Vec<ToyInstance>,
}

impl Toy {
    pub fn random(rng: &mut ChaCha8Rng, max_actors: u32, max_attrs: u32, max_t: u32) -> Toy {
        let actors = rng.random_range(2..=max_actors);
        let attributes = rng.random_range(1..=max_attrs);
        let t = rng.random_range(1..=max_t);
        let count = rng.random_range(1..=45);
        // Some networks favour few attributes so that persistence varies.
        let density = rng.random_range(0.15..0.7);
        let mut instances: Vec<ToyInstance> = (0..count)
            .map(|_| {
                let u = rng.random_range(0..actors);
                let v = loop {
                    let v = rng.random_range(0..actors);
                    if v != u {
                        break v;
                    }
                };
                let attrs = (0..attributes).filter(|_| rng.random_bool(density)).collect();
                ToyInstance {
                    u,
                    v,
                    snapshot: rng.random_range(0..t),
                    attrs,
                }
            })
            .collect();
        instances.sort_by_key(|i| i.snapshot);
        Toy {
            actors,
            attributes,
            t,
            instances,
        }
    }

    pub fn build(&self) -> TemporalNetwork {
        let mut actors = Interner::new();
        for i in 0..self.actors {
            actors.intern(&format!("a{i}"));
        }
        let mut attributes = Interner::new();
        for i in 0..self.attributes {
            attributes.intern(&format!("x{i}"));
        }
        let inst = self
            .instances
            .iter()
            .map(|i| {
                EdgeInstance::new(
                    ActorId(i.u),
                    ActorId(i.v),
                    i.snapshot,
                    i.attrs.iter().map(|&a| AttributeId(a)).collect(),
                )
            })
            .collect();
        TemporalNetwork::build(actors, attributes, inst, self.t as usize).expect("valid toy")
    }

    fn touches(i: &ToyInstance, u: u32) -> bool {
        i.u == u || i.v == u
    }

    /// Snapshots among the first `k` where u is tied to a, over k.
    pub fn persistence(&self, u: u32, a: u32, k: u32) -> Ratio {
        let mut hit = 0;
        for s in 0..k {
            if self
                .instances
                .iter()
                .any(|i| i.snapshot == s && Self::touches(i, u) && i.attrs.contains(&a))
            {
                hit += 1;
            }
        }
        Ratio::new(hit, k as i128)
    }

    /// Inclusive linear-interpolation percentile on exact values.
    fn percentile(sorted: &[Ratio], p: i128) -> Ratio {
        let n = sorted.len() as i128;
        let rank = Ratio::new((n - 1) * p, 100);
        let lo = rank.floor();
        let frac = rank.sub(Ratio::int(lo));
        let hi = (lo + 1).min(n - 1);
        let (a, b) = (sorted[lo as usize], sorted[hi as usize]);
        a.add(frac.mul(b.sub(a)))
    }

    /// Relevant set of one actor at horizon `k` (1-based), IQR rule.
    pub fn gamma(&self, u: u32, k: u32) -> BTreeSet<u32> {
        let mut a_temp = BTreeSet::new();
        for i in &self.instances {
            if i.snapshot < k && Self::touches(i, u) {
                a_temp.extend(i.attrs.iter().copied());
            }
        }
        if a_temp.is_empty() {
            return BTreeSet::new();
        }
        let vector: Vec<(u32, Ratio)> = a_temp.iter().map(|&a| (a, self.persistence(u, a, k))).collect();
        let mut sorted: Vec<Ratio> = vector.iter().map(|x| x.1).collect();
        sorted.sort();
        let q75 = Self::percentile(&sorted, 75);
        let q25 = Self::percentile(&sorted, 25);
        let iqr = q75.sub(q25);
        let threshold = q75.add(Ratio::new(3, 2).mul(iqr));
        vector
            .into_iter()
            .filter(|&(_, p)| p > threshold)
            .map(|(a, _)| a)
            .collect()
    }

    fn state(gamma: &BTreeSet<u32>, attrs: &BTreeSet<u32>) -> u8 {
        if gamma.is_empty() {
            0
        } else if gamma.is_disjoint(attrs) {
            1
        } else {
            2
        }
    }

    /// Per instance: (class, u state, v state) with states
    /// 2 = strong, 1 = weak, 0 = non-relevant.
    pub fn edge_labels(&self) -> Vec<(ClassLabel, u8, u8)> {
        self.instances
            .iter()
            .map(|i| {
                let k = i.snapshot + 1;
                let su = Self::state(&self.gamma(i.u, k), &i.attrs);
                let sv = Self::state(&self.gamma(i.v, k), &i.attrs);
                let class = if su == 2 || sv == 2 {
                    ClassLabel::Closure
                } else if su == 1 || sv == 1 {
                    ClassLabel::Brokerage
                } else {
                    ClassLabel::Innocuous
                };
                (class, su, sv)
            })
            .collect()
    }

    /// Node classes; `None` for actors without interactions.
    pub fn node_labels(&self) -> Vec<Option<ClassLabel>> {
        (0..self.actors)
            .map(|u| {
                let active: BTreeSet<u32> = self
                    .instances
                    .iter()
                    .filter(|i| Self::touches(i, u))
                    .map(|i| i.snapshot)
                    .collect();
                if active.is_empty() {
                    None
                } else if !self.gamma(u, self.t).is_empty() {
                    Some(ClassLabel::Closure)
                } else if active.len() > 1 {
                    Some(ClassLabel::Brokerage)
                } else {
                    Some(ClassLabel::Innocuous)
                }
            })
            .collect()
    }
}

// ---------------------------------------------------------- simple graphs

/// Dense adjacency matrix.
#[derive(Debug, Clone)]
pub struct Dense {
    pub n: usize,
    pub adj: Vec<Vec<bool>>,
}

impl Dense {
    pub fn new(n: usize, edges: &[(u32, u32)]) -> Self {
        let mut adj = vec![vec![false; n]; n];
        for &(a, b) in edges {
            adj[a as usize][b as usize] = true;
            adj[b as usize][a as usize] = true;
        }
        Dense { n, adj }
    }

    pub fn random(rng: &mut ChaCha8Rng, max_n: usize) -> Self {
        let n = rng.random_range(1..=max_n);
        let p = rng.random_range(0.1..0.8);
        let mut edges = Vec::new();
        for a in 0..n as u32 {
            for b in a + 1..n as u32 {
                if rng.random_bool(p) {
                    edges.push((a, b));
                }
            }
        }
        Dense::new(n, &edges)
    }

    pub fn edges(&self) -> Vec<(u32, u32)> {
        let mut e = Vec::new();
        for a in 0..self.n {
            for b in a + 1..self.n {
                if self.adj[a][b] {
                    e.push((a as u32, b as u32));
                }
            }
        }
        e
    }

    pub fn simple(&self) -> SimpleGraph {
        SimpleGraph::from_pairs(self.n, self.edges())
    }

    pub fn degree(&self, i: usize) -> usize {
        self.adj[i].iter().filter(|&&x| x).count()
    }

    /// All-pairs hop distances (Floyd–Warshall); `None` when unreachable.
    pub fn distances(&self) -> Vec<Vec<Option<u32>>> {
        let n = self.n;
        let mut d = vec![vec![None; n]; n];
        for i in 0..n {
            d[i][i] = Some(0);
            for j in 0..n {
                if self.adj[i][j] {
                    d[i][j] = Some(1);
                }
            }
        }
        for k in 0..n {
            for i in 0..n {
                for j in 0..n {
                    if let (Some(a), Some(b)) = (d[i][k], d[k][j]) {
                        if d[i][j].is_none_or(|c| a + b < c) {
                            d[i][j] = Some(a + b);
                        }
                    }
                }
            }
        }
        d
    }

    pub fn degree_centrality(&self) -> Vec<f64> {
        let max = (0..self.n).map(|i| self.degree(i)).max().unwrap_or(0);
        (0..self.n)
            .map(|i| {
                if max == 0 {
                    0.0
                } else {
                    self.degree(i) as f64 / max as f64
                }
            })
            .collect()
    }

    pub fn closeness(&self) -> Vec<f64> {
        let d = self.distances();
        (0..self.n)
            .map(|i| {
                let reach: Vec<u32> = d[i].iter().flatten().copied().collect();
                let r = reach.len() as f64 - 1.0;
                let sum: u32 = reach.iter().sum();
                if r == 0.0 || self.n < 2 {
                    0.0
                } else {
                    (r / sum as f64) * (r / (self.n - 1) as f64)
                }
            })
            .collect()
    }

    /// Every shortest path from `s` to `t` as a vertex list.
    pub fn shortest_paths(&self, s: usize, t: usize, d: &[Vec<Option<u32>>]) -> Vec<Vec<usize>> {
        let Some(len) = d[s][t] else { return vec![] };
        let mut out = Vec::new();
        let mut path = vec![s];
        self.extend_paths(t, len as usize, d, &mut path, &mut out);
        out
    }

    fn extend_paths(
        &self,
        t: usize,
        len: usize,
        d: &[Vec<Option<u32>>],
        path: &mut Vec<usize>,
        out: &mut Vec<Vec<usize>>,
    ) {
        let v = *path.last().unwrap();
        if v == t {
            out.push(path.clone());
            return;
        }
        let step = path.len();
        for w in 0..self.n {
            // Stay on a geodesic: w is one hop further from the start and
            // still within reach of t.
            if self.adj[v][w] && d[path[0]][w] == Some(step as u32) && d[w][t] == Some((len - step) as u32) {
                path.push(w);
                self.extend_paths(t, len, d, path, out);
                path.pop();
            }
        }
    }

    /// Node and edge betweenness over unordered pairs by explicit path
    /// enumeration; edges keyed like [`Dense::edges`].
    pub fn betweenness(&self) -> (Vec<f64>, Vec<f64>) {
        let d = self.distances();
        let edges = self.edges();
        let mut node = vec![0.0; self.n];
        let mut edge = vec![0.0; edges.len()];
        for s in 0..self.n {
            for t in s + 1..self.n {
                let paths = self.shortest_paths(s, t, &d);
                if paths.is_empty() {
                    continue;
                }
                let sigma = paths.len() as f64;
                for p in &paths {
                    for &v in &p[1..p.len() - 1] {
                        node[v] += 1.0 / sigma;
                    }
                    for w in p.windows(2) {
                        let key = (w[0].min(w[1]) as u32, w[0].max(w[1]) as u32);
                        let e = edges.binary_search(&key).unwrap();
                        edge[e] += 1.0 / sigma;
                    }
                }
            }
        }
        (node, edge)
    }

    /// Number of edges among the neighbours of each node.
    pub fn neighbour_edges(&self, i: usize) -> usize {
        let nb: Vec<usize> = (0..self.n).filter(|&j| self.adj[i][j]).collect();
        let mut e = 0;
        for (x, &a) in nb.iter().enumerate() {
            for &b in &nb[x + 1..] {
                if self.adj[a][b] {
                    e += 1;
                }
            }
        }
        e
    }

    pub fn clustering(&self, normalized: bool) -> Vec<f64> {
        (0..self.n)
            .map(|i| {
                let k = self.degree(i);
                if k < 2 {
                    return 0.0;
                }
                let e = self.neighbour_edges(i) as f64;
                let f = if normalized { 2.0 } else { 1.0 };
                f * e / (k * (k - 1)) as f64
            })
            .collect()
    }

    /// PageRank by solving (I - dM) x = (1 - d)/n with Gaussian elimination,
    /// where M is column-stochastic and dangling columns are uniform.
    pub fn pagerank(&self, damping: f64) -> Vec<f64> {
        let n = self.n;
        let mut a = vec![vec![0.0; n + 1]; n];
        for j in 0..n {
            let deg = self.degree(j);
            for i in 0..n {
                let m = if deg == 0 {
                    1.0 / n as f64
                } else if self.adj[j][i] {
                    1.0 / deg as f64
                } else {
                    0.0
                };
                a[i][j] = if i == j { 1.0 } else { 0.0 } - damping * m;
            }
        }
        for row in a.iter_mut() {
            row[n] = (1.0 - damping) / n as f64;
        }
        solve(a)
    }
}

/// Solves an augmented n x (n+1) system by partial-pivot elimination.
pub fn solve(mut a: Vec<Vec<f64>>) -> Vec<f64> {
    let n = a.len();
    for c in 0..n {
        let p = (c..n)
            .max_by(|&x, &y| a[x][c].abs().total_cmp(&a[y][c].abs()))
            .unwrap();
        a.swap(c, p);
        for r in 0..n {
            if r != c {
                let f = a[r][c] / a[c][c];
                for k in c..=n {
                    a[r][k] -= f * a[c][k];
                }
            }
        }
    }
    (0..n).map(|i| a[i][n] / a[i][i]).collect()
}

/// The canonical graph set used for metric checks.
pub fn canonical_graphs() -> Vec<(&'static str, Dense)> {
    let complete = |n: u32| {
        let mut e = Vec::new();
        for a in 0..n {
            for b in a + 1..n {
                e.push((a, b));
            }
        }
        Dense::new(n as usize, &e)
    };
    vec![
        ("K2", complete(2)),
        ("K3", complete(3)),
        ("K4", complete(4)),
        ("P3", Dense::new(3, &[(0, 1), (1, 2)])),
        ("C5", Dense::new(5, &[(0, 1), (1, 2), (2, 3), (3, 4), (0, 4)])),
        ("K1,3", Dense::new(4, &[(0, 1), (0, 2), (0, 3)])),
        ("K1,4", Dense::new(5, &[(0, 1), (0, 2), (0, 3), (0, 4)])),
        ("2K2", Dense::new(4, &[(0, 1), (2, 3)])),
    ]
}

pub fn close(a: &[f64], b: &[f64], tol: f64) -> bool {
    a.len() == b.len() && a.iter().zip(b).all(|(x, y)| (x - y).abs() <= tol)
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn state_code(s: socialtie::classifier::DynamicState) -> u8 {
    use socialtie::classifier::DynamicState::*;
    match s {
        Strong => 2,
        Weak => 1,
        NonRelevant => 0,
    }
}

/// Runs the library on `toy` and reports the first disagreement with the
/// oracle, if any.
pub fn check_against_oracle(toy: &Toy) -> Result<(), String> {
    use socialtie::relevance::{extract_relevant, RelevanceConfig};
    let net = toy.build();
    let rel = extract_relevant(&net, &RelevanceConfig::default());
    for u in 0..toy.actors {
        for a in 0..toy.attributes {
            for k in 1..=toy.t {
                let want = toy.persistence(u, a, k);
                let got = socialtie::relevance::persistence(&net, ActorId(u), AttributeId(a), k as usize)
                    .map_err(|e| e.to_string())?;
                if got != want.to_f64() {
                    return Err(format!("pers_{k}(a{u}, x{a}): oracle {want:?}, library {got}"));
                }
            }
        }
    }
    for u in 0..toy.actors {
        for k in 1..=toy.t {
            let want = toy.gamma(u, k);
            let got: BTreeSet<u32> = rel
                .get(ActorId(u), k - 1)
                .map(|s| s.iter().map(|a| a.0).collect())
                .unwrap_or_default();
            if want != got {
                return Err(format!("gamma(a{u}, k={k}): oracle {want:?}, library {got:?}"));
            }
        }
    }
    let result = socialtie::classifier::classify(&net, &rel).map_err(|e| e.to_string())?;
    let want = toy.edge_labels();
    // The network keeps instances in snapshot order, as the toy does.
    for (i, (label, w)) in result.edges.iter().zip(&want).enumerate() {
        let inst = &net.instances()[i];
        let t = &toy.instances[i];
        let (su, sv) = if inst.u.0 == t.u {
            (state_code(label.u_state), state_code(label.v_state))
        } else {
            (state_code(label.v_state), state_code(label.u_state))
        };
        if (label.class, su, sv) != *w {
            return Err(format!(
                "instance {i}: oracle {w:?}, library {:?}",
                (label.class, su, sv)
            ));
        }
    }
    let nodes = toy.node_labels();
    if result.nodes != nodes {
        return Err(format!(
            "node labels: oracle {nodes:?}, library {:?}",
            result.nodes
        ));
    }
    Ok(())
}

impl Toy {
    /// Toy view of a library network, for running the oracle on real runs.
    pub fn from_network(net: &TemporalNetwork) -> Toy {
        Toy {
            actors: net.actor_count() as u32,
            attributes: net.attribute_count() as u32,
            t: net.t() as u32,
            instances: net
                .instances()
                .iter()
                .map(|i| ToyInstance {
                    u: i.u.0,
                    v: i.v.0,
                    snapshot: i.snapshot,
                    attrs: i.attrs.iter().map(|a| a.0).collect(),
                })
                .collect(),
        }
    }
}
