//! Structural metrics on the collapsed simple graph.
//!
//! Betweenness runs one breadth-first search per source (every node, or the
//! sampled pivots). The per-source work is split into a fixed number of blocks
//! whose partial sums are combined in block order, so results do not depend on
//! the worker count. Closeness needs only distance sums, which come from a
//! bit-parallel search over 256 sources at a time.

use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::SimpleGraph;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MetricsError {
    #[error("pagerank did not converge in {iterations} iterations (residual {residual:e})")]
    NotConverged { iterations: usize, residual: f64 },
    #[error("damping factor must be in (0, 1), got {0}")]
    BadDamping(f64),
}

/// `deg(i) / max deg`. All zeros for an edgeless graph.
pub fn degree_centrality(g: &SimpleGraph) -> Vec<f64> {
    let max = (0..g.node_count()).map(|i| g.degree(i)).max().unwrap_or(0);
    if max == 0 {
        if g.node_count() > 0 {
            log::warn!("degree centrality on an edgeless graph; all values are 0");
        }
        return vec![0.0; g.node_count()];
    }
    (0..g.node_count())
        .map(|i| g.degree(i) as f64 / max as f64)
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ClusteringFormula {
    /// `e_i / (n_i (n_i - 1))`
    #[default]
    Literal,
    /// `2 e_i / (n_i (n_i - 1))`
    Normalized,
}

impl std::str::FromStr for ClusteringFormula {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "literal" => Ok(Self::Literal),
            "normalized" => Ok(Self::Normalized),
            other => Err(format!("unknown clustering formula `{other}`")),
        }
    }
}

pub fn clustering_coefficient(g: &SimpleGraph, formula: ClusteringFormula) -> Vec<f64> {
    let factor = match formula {
        ClusteringFormula::Literal => 1.0,
        ClusteringFormula::Normalized => 2.0,
    };
    (0..g.node_count())
        .into_par_iter()
        .map(|i| {
            let nbrs = g.neighbors(i);
            let n = nbrs.len();
            if n < 2 {
                return 0.0;
            }
            // Count each neighbor-neighbor edge once via sorted merge.
            let mut links = 0usize;
            for &(a, _) in nbrs {
                let na = g.neighbors(a as usize);
                let (mut x, mut y) = (0, 0);
                while x < na.len() && y < nbrs.len() {
                    let (p, q) = (na[x].0, nbrs[y].0);
                    if p < q {
                        x += 1;
                    } else if p > q {
                        y += 1;
                    } else {
                        if p > a {
                            links += 1;
                        }
                        x += 1;
                        y += 1;
                    }
                }
            }
            factor * links as f64 / (n * (n - 1)) as f64
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "mode")]
pub enum BetweennessMode {
    #[default]
    Exact,
    /// Brandes–Pich style estimate from `pivots` uniformly drawn sources.
    Sampled { pivots: usize, seed: u64 },
}

impl std::str::FromStr for BetweennessMode {
    type Err = String;

    /// `exact` or `sampled:K`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if s == "exact" {
            return Ok(Self::Exact);
        }
        if let Some(k) = s.strip_prefix("sampled:") {
            let pivots = k.parse().map_err(|_| format!("bad pivot count `{k}`"))?;
            if pivots == 0 {
                return Err("pivot count must be positive".into());
            }
            return Ok(Self::Sampled { pivots, seed: 0 });
        }
        Err(format!("unknown betweenness mode `{s}`"))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PairCounting {
    /// Each unordered pair {s, t} counted once.
    #[default]
    Unordered,
    /// (s, t) and (t, s) both counted; doubles every value.
    Ordered,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PathMetrics {
    pub closeness: Vec<f64>,
    pub node_betweenness: Vec<f64>,
    /// Indexed by edge id of the graph.
    pub edge_betweenness: Vec<f64>,
}

struct Scratch {
    dist: Vec<u32>,
    sigma: Vec<f64>,
    delta: Vec<f64>,
    order: Vec<u32>,
}

impl Scratch {
    fn new(n: usize) -> Self {
        Scratch {
            dist: vec![u32::MAX; n],
            sigma: vec![0.0; n],
            delta: vec![0.0; n],
            order: Vec::with_capacity(n),
        }
    }
}

struct Partial {
    node: Vec<f64>,
    edge: Vec<f64>,
}

const BLOCKS: usize = 64;

/// BFS from `s`; fills `order`, `dist`, `sigma`.
fn bfs(g: &SimpleGraph, s: usize, sc: &mut Scratch) {
    for &v in &sc.order {
        sc.dist[v as usize] = u32::MAX;
        sc.sigma[v as usize] = 0.0;
        sc.delta[v as usize] = 0.0;
    }
    sc.order.clear();
    sc.dist[s] = 0;
    sc.sigma[s] = 1.0;
    sc.order.push(s as u32);
    let mut head = 0;
    while head < sc.order.len() {
        let v = sc.order[head] as usize;
        head += 1;
        let dv = sc.dist[v];
        for &(w, _) in g.neighbors(v) {
            let w = w as usize;
            if sc.dist[w] == u32::MAX {
                sc.dist[w] = dv + 1;
                sc.order.push(w as u32);
            }
            if sc.dist[w] == dv + 1 {
                sc.sigma[w] += sc.sigma[v];
            }
        }
    }
}

/// Dependency accumulation over the BFS tree left in `sc`.
fn accumulate(g: &SimpleGraph, s: usize, sc: &mut Scratch, acc: &mut Partial) {
    for idx in (0..sc.order.len()).rev() {
        let v = sc.order[idx] as usize;
        let dv = sc.dist[v];
        let mut dep = 0.0;
        for &(w, e) in g.neighbors(v) {
            let w = w as usize;
            if sc.dist[w] == dv + 1 {
                let c = sc.sigma[v] / sc.sigma[w] * (1.0 + sc.delta[w]);
                acc.edge[e as usize] += c;
                dep += c;
            }
        }
        sc.delta[v] = dep;
        if v != s {
            acc.node[v] += dep;
        }
    }
}

fn closeness_from(n: usize, reached: u64, dist_sum: u64) -> f64 {
    if reached == 0 || dist_sum == 0 || n <= 1 {
        return 0.0;
    }
    let r = reached as f64;
    (r / dist_sum as f64) * (r / (n - 1) as f64)
}

/// Closeness (with the reachable-mass correction) and node/edge betweenness.
pub fn path_metrics(g: &SimpleGraph, mode: BetweennessMode, pairs: PairCounting) -> PathMetrics {
    let n = g.node_count();
    let m = g.edge_count();
    if n == 0 {
        return PathMetrics {
            closeness: vec![],
            node_betweenness: vec![],
            edge_betweenness: vec![],
        };
    }

    let (sources, scale): (Vec<usize>, f64) = match mode {
        BetweennessMode::Sampled { pivots, seed } if pivots < n => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut s = sample(&mut rng, n, pivots).into_vec();
            s.sort_unstable();
            (s, n as f64 / pivots as f64)
        }
        _ => ((0..n).collect(), 1.0),
    };
    let pair_scale = match pairs {
        PairCounting::Unordered => 0.5,
        PairCounting::Ordered => 1.0,
    };

    let block = sources.len().div_ceil(BLOCKS);
    let parts: Vec<Partial> = sources
        .par_chunks(block)
        .map(|chunk| {
            let mut sc = Scratch::new(n);
            let mut acc = Partial {
                node: vec![0.0; n],
                edge: vec![0.0; m],
            };
            for &s in chunk {
                bfs(g, s, &mut sc);
                accumulate(g, s, &mut sc, &mut acc);
            }
            acc
        })
        .collect();

    let mut node = vec![0.0; n];
    let mut edge = vec![0.0; m];
    for p in parts {
        node.iter_mut().zip(&p.node).for_each(|(a, b)| *a += b);
        edge.iter_mut().zip(&p.edge).for_each(|(a, b)| *a += b);
    }
    let k = scale * pair_scale;
    node.iter_mut().for_each(|x| *x *= k);
    edge.iter_mut().for_each(|x| *x *= k);
    PathMetrics {
        closeness: closeness_centrality(g),
        node_betweenness: node,
        edge_betweenness: edge,
    }
}

const LANES: usize = 4;
type Bits = [u64; LANES];

struct Wave {
    seen: Vec<Bits>,
    frontier: Vec<Bits>,
    next: Vec<Bits>,
}

/// Per node: how many other nodes reach it, and the sum of their distances.
#[derive(Clone)]
struct Farness {
    reach: Vec<u64>,
    sum: Vec<u64>,
}

/// Breadth-first search from up to 256 sources at once, one bit per source.
/// Distances are symmetric, so a node discovered by `c` sources at depth `d`
/// adds `c` to its own reach and `c * d` to its own distance sum.
fn wave(g: &SimpleGraph, sources: std::ops::Range<usize>, w: &mut Wave, f: &mut Farness) {
    let n = g.node_count();
    w.seen.iter_mut().for_each(|b| *b = [0; LANES]);
    w.frontier.iter_mut().for_each(|b| *b = [0; LANES]);
    for (i, s) in sources.enumerate() {
        w.seen[s][i / 64] |= 1 << (i % 64);
        w.frontier[s][i / 64] |= 1 << (i % 64);
    }
    let mut depth = 0u64;
    loop {
        depth += 1;
        w.next.iter_mut().for_each(|b| *b = [0; LANES]);
        for v in 0..n {
            let fv = w.frontier[v];
            if fv == [0; LANES] {
                continue;
            }
            for &(x, _) in g.neighbors(v) {
                let nx = &mut w.next[x as usize];
                for l in 0..LANES {
                    nx[l] |= fv[l];
                }
            }
        }
        let mut any = false;
        for v in 0..n {
            let mut count = 0u64;
            for l in 0..LANES {
                let fresh = w.next[v][l] & !w.seen[v][l];
                w.seen[v][l] |= fresh;
                w.frontier[v][l] = fresh;
                count += fresh.count_ones() as u64;
            }
            if count > 0 {
                f.reach[v] += count;
                f.sum[v] += count * depth;
                any = true;
            }
        }
        if !any {
            break;
        }
    }
}

pub fn closeness_centrality(g: &SimpleGraph) -> Vec<f64> {
    let n = g.node_count();
    let width = 64 * LANES;
    let empty = || Farness {
        reach: vec![0; n],
        sum: vec![0; n],
    };
    // Integer sums, so the combination order does not matter.
    let total = (0..n.div_ceil(width))
        .into_par_iter()
        .fold(
            || {
                let w = Wave {
                    seen: vec![[0; LANES]; n],
                    frontier: vec![[0; LANES]; n],
                    next: vec![[0; LANES]; n],
                };
                (w, empty())
            },
            |(mut w, mut f), b| {
                wave(g, b * width..((b + 1) * width).min(n), &mut w, &mut f);
                (w, f)
            },
        )
        .map(|(_, f)| f)
        .reduce(empty, |mut a, b| {
            a.reach.iter_mut().zip(&b.reach).for_each(|(x, y)| *x += y);
            a.sum.iter_mut().zip(&b.sum).for_each(|(x, y)| *x += y);
            a
        });
    (0..n)
        .map(|v| closeness_from(n, total.reach[v], total.sum[v]))
        .collect()
}

/// Node and edge betweenness (unordered pairs, exact).
pub fn betweenness(g: &SimpleGraph) -> (Vec<f64>, Vec<f64>) {
    let p = path_metrics(g, BetweennessMode::Exact, PairCounting::Unordered);
    (p.node_betweenness, p.edge_betweenness)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PageRankConfig {
    pub damping: f64,
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for PageRankConfig {
    fn default() -> Self {
        PageRankConfig {
            damping: 0.85,
            tol: 1e-10,
            max_iter: 200,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PageRank {
    pub scores: Vec<f64>,
    /// L1 distance between successive iterates, one per iteration.
    pub residuals: Vec<f64>,
}

/// Power iteration with uniform teleport; isolated nodes spread their mass
/// uniformly.
pub fn pagerank(g: &SimpleGraph, cfg: &PageRankConfig) -> Result<PageRank, MetricsError> {
    if !(cfg.damping > 0.0 && cfg.damping < 1.0) {
        return Err(MetricsError::BadDamping(cfg.damping));
    }
    let n = g.node_count();
    if n == 0 {
        return Ok(PageRank {
            scores: vec![],
            residuals: vec![],
        });
    }
    let d = cfg.damping;
    let nf = n as f64;
    let mut x = vec![1.0 / nf; n];
    let mut residuals = Vec::new();
    for _ in 0..cfg.max_iter {
        let dangling: f64 = (0..n).filter(|&i| g.degree(i) == 0).map(|i| x[i]).sum();
        let base = (1.0 - d) / nf + d * dangling / nf;
        let next: Vec<f64> = (0..n)
            .into_par_iter()
            .map(|i| {
                let inflow: f64 = g
                    .neighbors(i)
                    .iter()
                    .map(|&(j, _)| x[j as usize] / g.degree(j as usize) as f64)
                    .sum();
                base + d * inflow
            })
            .collect();
        let residual: f64 = next.iter().zip(&x).map(|(a, b)| (a - b).abs()).sum();
        x = next;
        residuals.push(residual);
        if residual < cfg.tol {
            let total: f64 = x.iter().sum();
            x.iter_mut().for_each(|v| *v /= total);
            return Ok(PageRank { scores: x, residuals });
        }
    }
    Err(MetricsError::NotConverged {
        iterations: cfg.max_iter,
        residual: residuals.last().copied().unwrap_or(f64::NAN),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MetricsConfig {
    pub betweenness: BetweennessMode,
    pub pairs: PairCounting,
    pub clustering: ClusteringFormula,
    pub pagerank: PageRankConfig,
}

impl Default for MetricsConfig {
    fn default() -> Self {
        MetricsConfig {
            betweenness: BetweennessMode::Exact,
            pairs: PairCounting::Unordered,
            clustering: ClusteringFormula::Literal,
            pagerank: PageRankConfig::default(),
        }
    }
}

/// Per-node metrics indexed by node id, per-edge betweenness by edge id.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricsReport {
    pub degree: Vec<f64>,
    pub closeness: Vec<f64>,
    pub betweenness: Vec<f64>,
    pub clustering: Vec<f64>,
    pub pagerank: Vec<f64>,
    pub edge_betweenness: Vec<f64>,
}

impl MetricsReport {
    pub const NODE_COLUMNS: [&'static str; 5] =
        ["degree", "closeness", "betweenness", "clustering", "pagerank"];

    /// Node metric column by position in [`NODE_COLUMNS`](Self::NODE_COLUMNS).
    pub fn node_column(&self, i: usize) -> &[f64] {
        match i {
            0 => &self.degree,
            1 => &self.closeness,
            2 => &self.betweenness,
            3 => &self.clustering,
            4 => &self.pagerank,
            _ => panic!("no node metric column {i}"),
        }
    }
}

pub fn compute_all(g: &SimpleGraph, cfg: &MetricsConfig) -> Result<MetricsReport, MetricsError> {
    let paths = path_metrics(g, cfg.betweenness, cfg.pairs);
    Ok(MetricsReport {
        degree: degree_centrality(g),
        closeness: paths.closeness,
        betweenness: paths.node_betweenness,
        clustering: clustering_coefficient(g, cfg.clustering),
        pagerank: pagerank(g, &cfg.pagerank)?.scores,
        edge_betweenness: paths.edge_betweenness,
    })
}
