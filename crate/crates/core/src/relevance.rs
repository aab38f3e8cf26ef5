//! Persistence of actor–attribute ties and extraction of each actor's
//! relevant attributes per snapshot.
//!
//! `pers_k(u, a)` is the fraction of the first `k` snapshots in which `u`
//! carried attribute `a`. At every `k` the persistences of all attributes
//! seen by `u` so far form a sample; attributes that are upper outliers of that
//! sample are relevant. All persistences at one `k` share the denominator `k`,
//! so the outlier test runs on raw presence counts. With the linear percentile
//! rule those thresholds are dyadic rationals and the comparison is exact.

use std::collections::BTreeSet;
use std::fmt::Write as _;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::{ActorId, AttributeId, GraphError, TemporalNetwork};
use crate::stats::{binomial_upper_tail, percentile_sorted, PercentileRule};

pub const RELEVANCE_HEADER: &str = "#socialtie-relevance\tv1";

#[derive(Debug, Error)]
pub enum RelevanceError {
    #[error("persistence needs 1 <= k <= {t}, got k = {k}")]
    BadHorizon { k: usize, t: usize },
    #[error("randomization filter needs at least one trial")]
    NoTrials,
    #[error("significance level must be in (0, 1), got {0}")]
    BadAlpha(f64),
    #[error("relevance table line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error(transparent)]
    Graph(#[from] GraphError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum OutlierMethod {
    #[default]
    Iqr,
    ModifiedZ,
}

impl std::str::FromStr for OutlierMethod {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "iqr" => Ok(Self::Iqr),
            "mz" | "modified-z" => Ok(Self::ModifiedZ),
            other => Err(format!("unknown outlier method `{other}`")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RelevanceConfig {
    pub method: OutlierMethod,
    pub percentile: PercentileRule,
    pub iqr_multiplier: f64,
    pub modified_z_threshold: f64,
}

impl Default for RelevanceConfig {
    fn default() -> Self {
        RelevanceConfig {
            method: OutlierMethod::Iqr,
            percentile: PercentileRule::Linear,
            iqr_multiplier: 1.5,
            modified_z_threshold: 3.5,
        }
    }
}

/// `pers_k(u, a)`: share of snapshots `0..k` in which `u` is linked to `a`.
pub fn persistence(
    net: &TemporalNetwork,
    u: ActorId,
    a: AttributeId,
    k: usize,
) -> Result<f64, RelevanceError> {
    if k == 0 || k > net.t() {
        return Err(RelevanceError::BadHorizon { k, t: net.t() });
    }
    let count = net.attr_presence(u, a).map_or(0, |s| s.count_below(k as u32));
    Ok(count as f64 / k as f64)
}

/// Indices of upper outliers in `values` (same scale as one another).
pub fn upper_outliers(values: &[f64], cfg: &RelevanceConfig) -> Vec<usize> {
    if values.is_empty() {
        return Vec::new();
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let iqr_threshold = || {
        let q75 = percentile_sorted(&sorted, 75.0, cfg.percentile);
        let q25 = percentile_sorted(&sorted, 25.0, cfg.percentile);
        q75 + (q75 - q25) * cfg.iqr_multiplier
    };
    match cfg.method {
        OutlierMethod::Iqr => {
            let thr = iqr_threshold();
            (0..values.len()).filter(|&i| values[i] > thr).collect()
        }
        OutlierMethod::ModifiedZ => {
            let median = percentile_sorted(&sorted, 50.0, PercentileRule::Linear);
            let mut dev: Vec<f64> = sorted.iter().map(|x| (x - median).abs()).collect();
            dev.sort_by(f64::total_cmp);
            let mad = percentile_sorted(&dev, 50.0, PercentileRule::Linear);
            if mad == 0.0 {
                let thr = iqr_threshold();
                return (0..values.len()).filter(|&i| values[i] > thr).collect();
            }
            (0..values.len())
                .filter(|&i| 0.6745 * (values[i] - median) / mad > cfg.modified_z_threshold)
                .collect()
        }
    }
}

/// Relevant-attribute sets for every actor and snapshot.
///
/// Stored as change points: `runs[u]` lists `(from_snapshot, set)` in
/// increasing snapshot order, and a set holds until the next change. Snapshot
/// indices are 0-based; the set at snapshot `s` is the one evaluated after the
/// interactions of `s`, i.e. over the first `s + 1` snapshots.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RelevanceMap {
    t: usize,
    runs: Vec<Option<Vec<(u32, Box<[AttributeId]>)>>>,
}

impl RelevanceMap {
    pub fn t(&self) -> usize {
        self.t
    }

    pub fn actor_count(&self) -> usize {
        self.runs.len()
    }

    /// Relevant set of `u` at 0-based snapshot `s`; `None` when not covered.
    pub fn get(&self, u: ActorId, s: u32) -> Option<&[AttributeId]> {
        let runs = self.runs.get(u.index())?.as_ref()?;
        let i = runs.partition_point(|(from, _)| *from <= s);
        if i == 0 {
            None
        } else {
            Some(&runs[i - 1].1)
        }
    }

    /// Relevant set after the final snapshot.
    pub fn final_set(&self, u: ActorId) -> Option<&[AttributeId]> {
        self.get(u, self.t as u32 - 1)
    }

    pub fn runs(&self, u: ActorId) -> Option<&[(u32, Box<[AttributeId]>)]> {
        self.runs.get(u.index())?.as_deref()
    }

    /// Every attribute that is relevant for some actor at some snapshot.
    pub fn ever_relevant(&self) -> BTreeSet<AttributeId> {
        self.runs
            .iter()
            .flatten()
            .flatten()
            .flat_map(|(_, set)| set.iter().copied())
            .collect()
    }

    /// Tab-separated dump: `actor<TAB>snapshot<TAB>attr,attr,...`, one row per
    /// change point.
    pub fn to_tsv(&self, net: &TemporalNetwork) -> String {
        let mut out = String::new();
        writeln!(out, "{RELEVANCE_HEADER}").unwrap();
        writeln!(out, "#snapshots\t{}", self.t).unwrap();
        for (u, runs) in self.runs.iter().enumerate() {
            let Some(runs) = runs else { continue };
            let name = net.actor_name(ActorId(u as u32));
            for (from, set) in runs {
                let attrs: Vec<&str> = set.iter().map(|&a| net.attribute_name(a)).collect();
                writeln!(out, "{name}\t{from}\t{}", attrs.join(",")).unwrap();
            }
        }
        out
    }

    /// Parses [`to_tsv`](Self::to_tsv) output, resolving names against `net`.
    /// Actors without rows stay uncovered, as do snapshots before an actor's
    /// first row.
    pub fn from_tsv(text: &str, net: &TemporalNetwork) -> Result<Self, RelevanceError> {
        let err = |line: usize, msg: String| RelevanceError::Parse { line, msg };
        let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l));
        match lines.next() {
            Some((_, h)) if h == RELEVANCE_HEADER => {}
            Some((n, h)) => {
                return Err(err(
                    n,
                    format!("expected header `{RELEVANCE_HEADER}`, found `{h}`"),
                ))
            }
            None => return Err(err(1, "empty input".into())),
        }
        let mut rows: Vec<Vec<(u32, Box<[AttributeId]>)>> = vec![Vec::new(); net.actor_count()];
        let mut t = net.t();
        for (n, line) in lines {
            if line.is_empty() {
                continue;
            }
            if let Some(rest) = line.strip_prefix("#snapshots\t") {
                t = rest
                    .parse()
                    .map_err(|_| err(n, format!("bad snapshot count `{rest}`")))?;
                if t != net.t() {
                    return Err(err(
                        n,
                        format!("table covers {t} snapshots but the network has {}", net.t()),
                    ));
                }
                continue;
            }
            if line.starts_with('#') {
                continue;
            }
            let fields: Vec<&str> = line.split('\t').collect();
            if fields.len() != 3 {
                return Err(err(n, format!("expected 3 fields, found {}", fields.len())));
            }
            let u = net
                .actor_id(fields[0])
                .ok_or_else(|| err(n, format!("unknown actor `{}`", fields[0])))?;
            let s: u32 = fields[1]
                .parse()
                .map_err(|_| err(n, format!("bad snapshot `{}`", fields[1])))?;
            if s as usize >= t {
                return Err(err(n, format!("snapshot {s} out of range")));
            }
            let mut set = Vec::new();
            for tok in fields[2].split(',').filter(|x| !x.is_empty()) {
                set.push(
                    net.attribute_id(tok)
                        .ok_or_else(|| err(n, format!("unknown attribute `{tok}`")))?,
                );
            }
            set.sort_unstable();
            set.dedup();
            rows[u.index()].push((s, set.into_boxed_slice()));
        }
        let runs = rows
            .into_iter()
            .map(|mut r| {
                if r.is_empty() {
                    None
                } else {
                    r.sort_by_key(|(s, _)| *s);
                    Some(r)
                }
            })
            .collect();
        Ok(RelevanceMap { t, runs })
    }
}

/// Change-point runs of one actor's relevant sets.
fn actor_runs(net: &TemporalNetwork, u: ActorId, cfg: &RelevanceConfig) -> Vec<(u32, Box<[AttributeId]>)> {
    let mut runs: Vec<(u32, Box<[AttributeId]>)> = vec![(0, Box::new([]))];
    let attrs = net.attributes_of(u);
    if attrs.is_empty() {
        return runs;
    }
    // (snapshot, position in `attrs`) events in snapshot order.
    let mut events: Vec<(u32, u32)> = attrs
        .iter()
        .enumerate()
        .flat_map(|(i, (_, set))| set.iter().map(move |s| (s, i as u32)))
        .collect();
    events.sort_unstable();

    // Attributes enter the working set in first-seen order; `slot` maps
    // position in `attrs` to position in `seen`.
    let mut slot = vec![u32::MAX; attrs.len()];
    let mut seen: Vec<AttributeId> = Vec::new();
    let mut counts: Vec<f64> = Vec::new();
    let mut i = 0;
    while i < events.len() {
        let s = events[i].0;
        while i < events.len() && events[i].0 == s {
            let p = events[i].1 as usize;
            if slot[p] == u32::MAX {
                slot[p] = seen.len() as u32;
                seen.push(attrs[p].0);
                counts.push(0.0);
            }
            counts[slot[p] as usize] += 1.0;
            i += 1;
        }
        let mut set: Vec<AttributeId> = upper_outliers(&counts, cfg)
            .into_iter()
            .map(|j| seen[j])
            .collect();
        set.sort_unstable();
        if *runs.last().unwrap().1 != *set {
            if runs.last().unwrap().0 == s {
                runs.last_mut().unwrap().1 = set.into_boxed_slice();
            } else {
                runs.push((s, set.into_boxed_slice()));
            }
        }
    }
    runs
}

/// Relevant attributes of every actor at every snapshot.
pub fn extract_relevant(net: &TemporalNetwork, cfg: &RelevanceConfig) -> RelevanceMap {
    let runs = (0..net.actor_count() as u32)
        .into_par_iter()
        .map(|u| {
            let u = ActorId(u);
            if net.is_active(u) {
                Some(actor_runs(net, u, cfg))
            } else {
                None
            }
        })
        .collect();
    RelevanceMap { t: net.t(), runs }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ShuffleUnit {
    /// Permute whole attribute sets across instances.
    #[default]
    AttributeSet,
    /// Permute individual tokens, keeping each instance's token count.
    Token,
}

impl std::str::FromStr for ShuffleUnit {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "set" | "attribute-set" => Ok(Self::AttributeSet),
            "token" => Ok(Self::Token),
            other => Err(format!("unknown shuffle unit `{other}`")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FilterConfig {
    pub trials: usize,
    pub alpha: f64,
    pub seed: u64,
    pub unit: ShuffleUnit,
}

impl Default for FilterConfig {
    fn default() -> Self {
        FilterConfig {
            trials: 100,
            alpha: 0.05,
            seed: 0,
            unit: ShuffleUnit::AttributeSet,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AttributeFrequency {
    pub attribute: String,
    /// Trials in which the attribute was relevant for some actor at some snapshot.
    pub hits: u64,
    pub frequency: f64,
    pub p_value: f64,
    pub excluded: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RandomizationReport {
    pub trials: usize,
    pub alpha: f64,
    pub seed: u64,
    pub unit: ShuffleUnit,
    /// One row per attribute of the network, in attribute-id order.
    pub attributes: Vec<AttributeFrequency>,
    pub excluded: Vec<String>,
}

impl RandomizationReport {
    pub fn excluded_ids(&self, net: &TemporalNetwork) -> BTreeSet<AttributeId> {
        self.excluded.iter().filter_map(|n| net.attribute_id(n)).collect()
    }
}

fn shuffled_attributes(
    net: &TemporalNetwork,
    unit: ShuffleUnit,
    rng: &mut ChaCha8Rng,
) -> Vec<Vec<AttributeId>> {
    let mut sets: Vec<Vec<AttributeId>> = net.instances().iter().map(|i| i.attrs.clone()).collect();
    match unit {
        ShuffleUnit::AttributeSet => sets.shuffle(rng),
        ShuffleUnit::Token => {
            let mut tokens: Vec<AttributeId> = sets.iter().flatten().copied().collect();
            tokens.shuffle(rng);
            let mut it = tokens.into_iter();
            for s in sets.iter_mut() {
                let n = s.len();
                s.clear();
                s.extend(it.by_ref().take(n));
            }
        }
    }
    sets
}

/// Estimates how often each attribute would be flagged relevant if attributes
/// were assigned to instances at random, and marks those flagged significantly
/// more often than `alpha` (one-sided exact binomial test).
pub fn randomization_filter(
    net: &TemporalNetwork,
    relevance: &RelevanceConfig,
    filter: &FilterConfig,
) -> Result<RandomizationReport, RelevanceError> {
    if filter.trials == 0 {
        return Err(RelevanceError::NoTrials);
    }
    if !(filter.alpha > 0.0 && filter.alpha < 1.0) {
        return Err(RelevanceError::BadAlpha(filter.alpha));
    }
    let per_trial: Vec<BTreeSet<AttributeId>> = (0..filter.trials as u64)
        .into_par_iter()
        .map(|trial| {
            let mut rng = ChaCha8Rng::seed_from_u64(filter.seed);
            rng.set_stream(trial);
            let attrs = shuffled_attributes(net, filter.unit, &mut rng);
            let shuffled = net.with_attributes(attrs)?;
            Ok(extract_relevant(&shuffled, relevance).ever_relevant())
        })
        .collect::<Result<_, GraphError>>()?;

    let mut hits = vec![0u64; net.attribute_count()];
    for set in &per_trial {
        for a in set {
            hits[a.index()] += 1;
        }
    }
    let attributes: Vec<AttributeFrequency> = hits
        .iter()
        .enumerate()
        .map(|(a, &h)| {
            let p_value = binomial_upper_tail(h, filter.trials as u64, filter.alpha);
            AttributeFrequency {
                attribute: net.attribute_name(AttributeId(a as u32)).to_owned(),
                hits: h,
                frequency: h as f64 / filter.trials as f64,
                p_value,
                excluded: p_value < filter.alpha,
            }
        })
        .collect();
    let excluded = attributes
        .iter()
        .filter(|f| f.excluded)
        .map(|f| f.attribute.clone())
        .collect();
    Ok(RandomizationReport {
        trials: filter.trials,
        alpha: filter.alpha,
        seed: filter.seed,
        unit: filter.unit,
        attributes,
        excluded,
    })
}

/// Copy of `net` with the given attributes removed from every instance.
pub fn remove_attributes(
    net: &TemporalNetwork,
    excluded: &BTreeSet<AttributeId>,
) -> Result<TemporalNetwork, GraphError> {
    let attrs = net
        .instances()
        .iter()
        .map(|i| {
            i.attrs
                .iter()
                .copied()
                .filter(|a| !excluded.contains(a))
                .collect()
        })
        .collect();
    net.with_attributes(attrs)
}

/// Per-(actor, snapshot) agreement between two relevance maps over the same
/// network: fraction of covered cells whose sets are identical.
pub fn agreement(a: &RelevanceMap, b: &RelevanceMap, net: &TemporalNetwork) -> f64 {
    let mut same = 0usize;
    let mut total = 0usize;
    for u in net.active_actors() {
        for s in 0..net.t() as u32 {
            total += 1;
            same += (a.get(u, s) == b.get(u, s)) as usize;
        }
    }
    if total == 0 {
        1.0
    } else {
        same as f64 / total as f64
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{EdgeInstance, Interner};

    fn cfg() -> RelevanceConfig {
        RelevanceConfig::default()
    }

    /// Actor 0 talks to actor 1 at each listed snapshot with the given attrs.
    fn history(t: usize, events: &[(u32, &[u32])], n_attrs: u32) -> TemporalNetwork {
        let mut actors = Interner::new();
        actors.intern("u");
        actors.intern("v");
        let mut attrs = Interner::new();
        for a in 0..n_attrs {
            attrs.intern(&format!("a{a}"));
        }
        let inst = events
            .iter()
            .map(|(k, a)| {
                EdgeInstance::new(
                    ActorId(0),
                    ActorId(1),
                    *k,
                    a.iter().copied().map(AttributeId).collect(),
                )
            })
            .collect();
        TemporalNetwork::build(actors, attrs, inst, t).unwrap()
    }

    #[test]
    fn persistence_full_and_partial() {
        let net = history(5, &[(0, &[0]), (1, &[0]), (2, &[0]), (3, &[0, 1]), (4, &[0])], 2);
        assert_eq!(persistence(&net, ActorId(0), AttributeId(0), 5).unwrap(), 1.0);
        assert_eq!(persistence(&net, ActorId(0), AttributeId(1), 4).unwrap(), 0.25);
        assert!(matches!(
            persistence(&net, ActorId(0), AttributeId(0), 0),
            Err(RelevanceError::BadHorizon { k: 0, .. })
        ));
    }

    #[test]
    fn single_attribute_never_relevant() {
        assert!(upper_outliers(&[0.7], &cfg()).is_empty());
    }

    #[test]
    fn one_dominant_attribute() {
        let mut v = vec![1.0];
        v.extend(std::iter::repeat(0.1).take(9));
        assert_eq!(upper_outliers(&v, &cfg()), vec![0]);
    }

    #[test]
    fn equal_values_yield_nothing() {
        assert!(upper_outliers(&[0.3; 6], &cfg()).is_empty());
        let mz = RelevanceConfig {
            method: OutlierMethod::ModifiedZ,
            ..cfg()
        };
        assert!(upper_outliers(&[0.3; 6], &mz).is_empty());
    }

    #[test]
    fn modified_z_flags_far_value() {
        let mz = RelevanceConfig {
            method: OutlierMethod::ModifiedZ,
            ..cfg()
        };
        // median 3, MAD 1, score of 10 = 0.6745 * 7 = 4.72
        let v = [1.0, 2.0, 3.0, 4.0, 5.0, 3.0, 10.0];
        assert_eq!(upper_outliers(&v, &mz), vec![6]);
    }

    #[test]
    fn runs_track_changes() {
        // a0 every snapshot, a fresh token each snapshot otherwise.
        let net = history(4, &[(0, &[0, 1]), (1, &[0, 2]), (2, &[0, 3]), (3, &[0, 4])], 5);
        let map = extract_relevant(&net, &cfg());
        let u = ActorId(0);
        assert_eq!(map.get(u, 0), Some(&[][..]));
        // k=2: counts a0=2, a1=1, a2=1 -> q75 = 1.5, q25 = 1, thr = 2.25
        assert_eq!(map.get(u, 1), Some(&[][..]));
        // k=3: [3,1,1,1] -> q75 = 1.5, thr = 2.25 -> a0
        assert_eq!(map.get(u, 2), Some(&[AttributeId(0)][..]));
        assert_eq!(map.final_set(u), Some(&[AttributeId(0)][..]));
    }

    #[test]
    fn tsv_round_trip() {
        let net = history(3, &[(0, &[0, 1]), (1, &[0, 2]), (2, &[0, 3])], 4);
        let map = extract_relevant(&net, &cfg());
        let text = map.to_tsv(&net);
        assert_eq!(RelevanceMap::from_tsv(&text, &net).unwrap(), map);
    }

    #[test]
    fn partial_fixture_leaves_gaps() {
        let net = history(3, &[(0, &[0]), (2, &[1])], 2);
        let text = format!("{RELEVANCE_HEADER}\n#snapshots\t3\nu\t1\ta0\n");
        let map = RelevanceMap::from_tsv(&text, &net).unwrap();
        assert_eq!(map.get(ActorId(0), 0), None);
        assert_eq!(map.get(ActorId(0), 2), Some(&[AttributeId(0)][..]));
        assert_eq!(map.get(ActorId(1), 2), None);
    }

    #[test]
    fn filter_rejects_zero_trials() {
        let net = history(2, &[(0, &[0]), (1, &[0])], 1);
        let f = FilterConfig {
            trials: 0,
            ..Default::default()
        };
        assert!(matches!(
            randomization_filter(&net, &cfg(), &f),
            Err(RelevanceError::NoTrials)
        ));
    }

    #[test]
    fn single_attribute_network_is_shuffle_invariant() {
        let net = history(3, &[(0, &[0]), (1, &[0]), (2, &[0])], 1);
        let f = FilterConfig {
            trials: 10,
            seed: 3,
            ..Default::default()
        };
        let report = randomization_filter(&net, &cfg(), &f).unwrap();
        let base = extract_relevant(&net, &cfg()).ever_relevant();
        assert_eq!(report.attributes[0].hits, if base.is_empty() { 0 } else { 10 });
        assert!(report.excluded.is_empty());
    }

    #[test]
    fn remove_attributes_drops_tokens() {
        let net = history(2, &[(0, &[0, 1]), (1, &[1])], 2);
        let out = remove_attributes(&net, &[AttributeId(1)].into_iter().collect()).unwrap();
        assert!(out.instances().iter().all(|i| !i.has_attr(AttributeId(1))));
        assert!(out.attr_presence(ActorId(0), AttributeId(1)).is_none());
    }
}
