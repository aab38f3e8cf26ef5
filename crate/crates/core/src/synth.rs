//! Synthetic networks: planted social roles, and random large-scale logs.

use std::fmt::Write as _;

use rand::seq::{IndexedRandom, SliceRandom};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::classifier::ClassLabel;

/// One interaction of a generated log.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SynthEdge {
    pub snapshot: u32,
    pub u: u32,
    pub v: u32,
    pub attrs: Vec<String>,
}

#[derive(Debug, Clone)]
pub struct SynthLog {
    pub actors: Vec<String>,
    pub snapshots: u32,
    pub edges: Vec<SynthEdge>,
}

impl SynthLog {
    /// Coauthorship-format lines, one two-author record per interaction.
    /// Attribute tokens are written as the title and survive tokenization
    /// unchanged.
    pub fn to_coauthorship(&self) -> String {
        let mut out = String::new();
        for e in &self.edges {
            writeln!(
                out,
                "{}\t{}|{}\t{}",
                e.snapshot,
                self.actors[e.u as usize],
                self.actors[e.v as usize],
                e.attrs.join(" ")
            )
            .unwrap();
        }
        out
    }
}

#[derive(Debug, Clone)]
pub struct PlantedConfig {
    pub closure: usize,
    pub brokerage: usize,
    pub innocuous: usize,
    pub snapshots: u32,
    pub group_size: usize,
    /// Minimum share of snapshots a closure actor works on its topic.
    pub closure_activity: f64,
    /// Background attributes per closure actor, each used in at most
    /// `background_share` of the snapshots.
    pub background: usize,
    pub background_share: f64,
    pub broker_snapshots: (u32, u32),
    pub broker_partners: (usize, usize),
    pub noise_per_edge: usize,
}

impl Default for PlantedConfig {
    fn default() -> Self {
        PlantedConfig {
            closure: 150,
            brokerage: 150,
            innocuous: 200,
            snapshots: 20,
            group_size: 15,
            closure_activity: 0.85,
            background: 2,
            background_share: 0.2,
            broker_snapshots: (4, 8),
            broker_partners: (3, 5),
            noise_per_edge: 2,
        }
    }
}

#[derive(Debug, Clone)]
pub struct PlantedNetwork {
    pub log: SynthLog,
    /// Planted class per actor, indexed like `log.actors`.
    pub roles: Vec<ClassLabel>,
}

struct Noise(usize);

impl Noise {
    fn take(&mut self, n: usize, attrs: &mut Vec<String>) {
        for _ in 0..n {
            attrs.push(format!("n{}x", self.0));
            self.0 += 1;
        }
    }
}

/// Closure actors work in topic groups and carry their group topic in most
/// snapshots; brokers link closure actors of different groups over a few
/// snapshots with one-off attributes only; innocuous actors interact once.
pub fn planted(cfg: &PlantedConfig, seed: u64) -> PlantedNetwork {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let t = cfg.snapshots;
    let mut noise = Noise(0);
    let mut actors = Vec::new();
    let mut roles = Vec::new();
    let mut edges = Vec::new();

    let closure: Vec<u32> = (0..cfg.closure as u32).collect();
    for i in 0..cfg.closure {
        actors.push(format!("c{i}"));
        roles.push(ClassLabel::Closure);
    }
    let groups: Vec<Vec<u32>> = closure
        .chunks(cfg.group_size.max(2))
        .map(<[u32]>::to_vec)
        .collect();
    let min_active = ((cfg.closure_activity * t as f64).ceil() as u32).min(t);
    let max_background = (cfg.background_share * t as f64).floor() as u32;

    for (g, members) in groups.iter().enumerate() {
        let topic = format!("topic{g}x");
        let mut active: Vec<Vec<u32>> = vec![Vec::new(); t as usize];
        for &c in members {
            let k = rng.random_range(min_active..=t);
            let mut snaps: Vec<u32> = (0..t).collect();
            snaps.shuffle(&mut rng);
            for &s in &snaps[..k as usize] {
                active[s as usize].push(c);
            }
        }
        let background: Vec<Vec<(String, Vec<u32>)>> = members
            .iter()
            .map(|&c| {
                (0..cfg.background)
                    .map(|b| {
                        let uses = rng.random_range(1..=max_background.max(1));
                        let mut snaps: Vec<u32> = (0..t).collect();
                        snaps.shuffle(&mut rng);
                        (format!("bg{c}y{b}x"), snaps[..uses as usize].to_vec())
                    })
                    .collect()
            })
            .collect();
        for s in 0..t {
            let here = &active[s as usize];
            if here.len() < 2 {
                continue;
            }
            for &c in here {
                let partner = loop {
                    let p = *here.choose(&mut rng).unwrap();
                    if p != c {
                        break p;
                    }
                };
                let mut attrs = vec![topic.clone()];
                let slot = members.iter().position(|&m| m == c).unwrap();
                for (name, snaps) in &background[slot] {
                    if snaps.contains(&s) {
                        attrs.push(name.clone());
                    }
                }
                noise.take(cfg.noise_per_edge, &mut attrs);
                edges.push(SynthEdge {
                    snapshot: s,
                    u: c,
                    v: partner,
                    attrs,
                });
            }
        }
    }

    let broker_base = actors.len() as u32;
    for i in 0..cfg.brokerage {
        let b = broker_base + i as u32;
        actors.push(format!("b{i}"));
        roles.push(ClassLabel::Brokerage);
        let k = rng
            .random_range(cfg.broker_snapshots.0..=cfg.broker_snapshots.1)
            .clamp(2, t);
        let mut snaps: Vec<u32> = (0..t).collect();
        snaps.shuffle(&mut rng);
        let snaps = &snaps[..k as usize];
        let p = rng.random_range(cfg.broker_partners.0..=cfg.broker_partners.1);
        let mut gs: Vec<usize> = (0..groups.len()).collect();
        gs.shuffle(&mut rng);
        let partners: Vec<u32> = (0..p)
            .map(|j| *groups[gs[j % gs.len()]].choose(&mut rng).unwrap())
            .collect();
        // Every chosen partner and every chosen snapshot is used at least once.
        for j in 0..(k as usize).max(p) {
            let mut attrs = Vec::new();
            noise.take(cfg.noise_per_edge, &mut attrs);
            edges.push(SynthEdge {
                snapshot: snaps[j % snaps.len()],
                u: b,
                v: partners[j % partners.len()],
                attrs,
            });
        }
    }

    let innocent_base = actors.len() as u32;
    for i in 0..cfg.innocuous {
        let a = innocent_base + i as u32;
        actors.push(format!("i{i}"));
        roles.push(ClassLabel::Innocuous);
        let partner = *closure.choose(&mut rng).unwrap();
        let mut attrs = Vec::new();
        noise.take(cfg.noise_per_edge, &mut attrs);
        edges.push(SynthEdge {
            snapshot: rng.random_range(0..t),
            u: a,
            v: partner,
            attrs,
        });
    }

    edges.sort_by_key(|e| e.snapshot);
    PlantedNetwork {
        log: SynthLog {
            actors,
            snapshots: t,
            edges,
        },
        roles,
    }
}

/// Random interaction log of roughly the given size. Endpoints are drawn
/// with a heavy-tailed activity profile and attributes from a skewed
/// vocabulary.
pub fn random_log(actors: usize, instances: usize, snapshots: u32, seed: u64) -> SynthLog {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let names: Vec<String> = (0..actors).map(|i| format!("u{i}")).collect();
    let vocab = (actors / 4).max(16);
    // Inverse-power sampling gives a few very active actors and a long tail.
    let pick = |rng: &mut ChaCha8Rng, n: usize| -> u32 {
        let x: f64 = rng.random();
        ((n as f64) * x.powf(2.5)) as u32 % n as u32
    };
    let mut edges = Vec::with_capacity(instances);
    // Every actor takes part at least once.
    let mut order: Vec<u32> = (0..actors as u32).collect();
    order.shuffle(&mut rng);
    for i in 0..instances {
        let u = if i < actors {
            order[i]
        } else {
            pick(&mut rng, actors)
        };
        let v = loop {
            let v = rng.random_range(0..actors as u32);
            if v != u {
                break v;
            }
        };
        let n_attrs = rng.random_range(1..=4);
        let attrs = (0..n_attrs)
            .map(|_| format!("w{}x", pick(&mut rng, vocab)))
            .collect();
        edges.push(SynthEdge {
            snapshot: rng.random_range(0..snapshots),
            u,
            v,
            attrs,
        });
    }
    edges.sort_by_key(|e| e.snapshot);
    SynthLog {
        actors: names,
        snapshots,
        edges,
    }
}
