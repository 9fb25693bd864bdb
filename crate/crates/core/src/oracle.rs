//! Ground-truth influence: Monte Carlo simulation of the independent cascade
//! and exact live-edge enumeration for small graphs.

use std::collections::BTreeMap;
use std::ops::Deref;

use rand::Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::graph::{Graph, NodeId};
use crate::rng::{purpose, substream};
use crate::rr::Marks;

/// Largest edge count the enumeration oracles accept.
pub const MAX_BRUTE_FORCE_EDGES: usize = 25;

/// Distinct seed nodes, at most `k` of them.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SeedSet {
    nodes: Vec<NodeId>,
    k: usize,
}

impl SeedSet {
    pub fn new(nodes: Vec<NodeId>, k: usize, n: usize) -> Result<Self> {
        let mut sorted = nodes.clone();
        sorted.sort_unstable();
        sorted.dedup();
        if sorted.len() != nodes.len() {
            return Err(Error::InvalidArgument(
                "seed set contains duplicates".into(),
            ));
        }
        if nodes.len() > k {
            return Err(Error::InvalidArgument(format!(
                "{} seeds exceed the budget {k}",
                nodes.len()
            )));
        }
        if let Some(&bad) = nodes.iter().find(|&&x| x as usize >= n) {
            return Err(Error::UnknownNode(bad as u64));
        }
        Ok(SeedSet { nodes, k })
    }

    /// All nodes of an `n`-node graph.
    pub fn all(n: usize) -> Self {
        SeedSet {
            nodes: (0..n as NodeId).collect(),
            k: n,
        }
    }

    pub fn k(&self) -> usize {
        self.k
    }
}

impl Deref for SeedSet {
    type Target = [NodeId];

    fn deref(&self) -> &[NodeId] {
        &self.nodes
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct InfluenceEstimate {
    pub mean: f64,
    pub stderr: f64,
    pub r: usize,
}

/// Forward IC cascade with reusable scratch space.
#[derive(Clone, Debug)]
pub struct CascadeSimulator {
    active: Marks,
    frontier: Vec<NodeId>,
}

impl CascadeSimulator {
    pub fn new(n: usize) -> Self {
        CascadeSimulator {
            active: Marks::new(n),
            frontier: Vec::new(),
        }
    }

    /// Runs one cascade and returns the number of active nodes at the end,
    /// seeds included.
    pub fn run<R: Rng + ?Sized>(&mut self, g: &Graph, seeds: &[NodeId], rng: &mut R) -> usize {
        self.active.clear();
        self.frontier.clear();
        for &s in seeds {
            if !self.active.get(s) {
                self.active.set(s);
                self.frontier.push(s);
            }
        }
        let mut head = 0;
        while head < self.frontier.len() {
            let u = self.frontier[head];
            head += 1;
            for (v, p) in g.out_neighbors(u) {
                if !self.active.get(v) && rng.gen::<f64>() < p {
                    self.active.set(v);
                    self.frontier.push(v);
                }
            }
        }
        self.frontier.len()
    }
}

pub fn simulate_ic_once<R: Rng + ?Sized>(g: &Graph, seeds: &[NodeId], rng: &mut R) -> usize {
    CascadeSimulator::new(g.n()).run(g, seeds, rng)
}

/// Mean spread over `r` cascades; run `i` uses substream `i` of `seed`.
pub fn estimate_influence_mc(
    g: &Graph,
    seeds: &[NodeId],
    r: usize,
    seed: u64,
) -> Result<InfluenceEstimate> {
    if r == 0 {
        return Err(Error::InvalidArgument(
            "simulation count must be positive".into(),
        ));
    }
    let tags = [purpose::MONTE_CARLO];
    let (sum, sum_sq) = (0..r as u64)
        .into_par_iter()
        .map_init(
            || CascadeSimulator::new(g.n()),
            |sim, i| {
                let x = sim.run(g, seeds, &mut substream(seed, &tags, i)) as f64;
                (x, x * x)
            },
        )
        .collect::<Vec<_>>()
        .into_iter()
        .fold((0.0, 0.0), |(a, b), (x, x2)| (a + x, b + x2));
    let rf = r as f64;
    let mean = sum / rf;
    let var = if r > 1 {
        ((sum_sq - rf * mean * mean) / (rf - 1.0)).max(0.0)
    } else {
        0.0
    };
    Ok(InfluenceEstimate {
        mean,
        stderr: (var / rf).sqrt(),
        r,
    })
}

fn check_capacity(g: &Graph) -> Result<()> {
    if g.edge_count() > MAX_BRUTE_FORCE_EDGES {
        Err(Error::Capacity {
            edges: g.edge_count(),
            max: MAX_BRUTE_FORCE_EDGES,
        })
    } else {
        Ok(())
    }
}

/// Calls `visit(live, probability)` for every live-edge world with nonzero
/// probability; `live[e]` tells whether edge id `e` is live.
fn for_each_world(g: &Graph, mut visit: impl FnMut(&[bool], f64)) {
    let weights = g.weights();
    let m = weights.len();
    let mut live = vec![false; m];
    for mask in 0u64..(1u64 << m) {
        let mut prob = 1.0;
        for (e, p) in weights.iter().enumerate() {
            live[e] = mask >> e & 1 == 1;
            prob *= if live[e] { *p } else { 1.0 - *p };
        }
        if prob > 0.0 {
            visit(&live, prob);
        }
    }
}

/// Exact expected spread of `seeds` by enumerating all `2^|E|` worlds.
pub fn exact_influence_bruteforce(g: &Graph, seeds: &[NodeId]) -> Result<f64> {
    check_capacity(g)?;
    let edges: Vec<(NodeId, NodeId)> = g.edges().map(|(u, v, _)| (u, v)).collect();
    let n = g.n();
    let mut total = 0.0;
    for_each_world(g, |live, prob| {
        let mut reached = vec![false; n];
        let mut stack: Vec<NodeId> = Vec::new();
        for &s in seeds {
            if !reached[s as usize] {
                reached[s as usize] = true;
                stack.push(s);
            }
        }
        while let Some(x) = stack.pop() {
            for (e, &(u, v)) in edges.iter().enumerate() {
                if live[e] && u == x && !reached[v as usize] {
                    reached[v as usize] = true;
                    stack.push(v);
                }
            }
        }
        total += prob * reached.iter().filter(|&&r| r).count() as f64;
    });
    Ok(total)
}

/// Distribution of the node set (sorted) reverse-reachable from `root`.
pub fn exact_rr_distribution(g: &Graph, root: NodeId) -> Result<BTreeMap<Vec<NodeId>, f64>> {
    check_capacity(g)?;
    if root as usize >= g.n() {
        return Err(Error::UnknownNode(root as u64));
    }
    let edges: Vec<(NodeId, NodeId)> = g.edges().map(|(u, v, _)| (u, v)).collect();
    let n = g.n();
    let mut dist = BTreeMap::new();
    for_each_world(g, |live, prob| {
        let mut reached = vec![false; n];
        reached[root as usize] = true;
        let mut stack = vec![root];
        while let Some(x) = stack.pop() {
            for (e, &(u, v)) in edges.iter().enumerate() {
                if live[e] && v == x && !reached[u as usize] {
                    reached[u as usize] = true;
                    stack.push(u);
                }
            }
        }
        let set: Vec<NodeId> = (0..n as NodeId).filter(|&x| reached[x as usize]).collect();
        *dist.entry(set).or_insert(0.0) += prob;
    });
    Ok(dist)
}

/// Outcome distribution of an RR set with a uniform root, keyed by
/// `(root, sorted node set)`.
pub fn exact_rr_mixture(g: &Graph) -> Result<BTreeMap<(NodeId, Vec<NodeId>), f64>> {
    let share = 1.0 / g.n() as f64;
    let mut out = BTreeMap::new();
    for root in 0..g.n() as NodeId {
        for (set, p) in exact_rr_distribution(g, root)? {
            out.insert((root, set), p * share);
        }
    }
    Ok(out)
}

/// Total variation distance between an empirical histogram and a reference
/// distribution over the same keys.
pub fn total_variation<K: Ord + Clone>(
    counts: &BTreeMap<K, usize>,
    reference: &BTreeMap<K, f64>,
) -> f64 {
    let total: usize = counts.values().sum();
    let mut keys: Vec<&K> = counts.keys().chain(reference.keys()).collect();
    keys.sort();
    keys.dedup();
    0.5 * keys
        .into_iter()
        .map(|k| {
            let emp = counts.get(k).copied().unwrap_or(0) as f64 / total as f64;
            (emp - reference.get(k).copied().unwrap_or(0.0)).abs()
        })
        .sum::<f64>()
}
