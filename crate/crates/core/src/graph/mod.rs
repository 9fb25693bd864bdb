//! Directed weighted graphs stored as compressed in/out adjacency.
//!
//! Edge ids are positions in the in-adjacency arrays (edges grouped by target,
//! sources ascending within a target). Topology is shared between snapshots;
//! each snapshot owns its weight vector and a version tag.

mod io;
mod update;

pub use io::{load_edge_list, load_edge_list_path, write_edge_list, EdgeListReport};
pub use update::{
    apply_update_batch, changed_source_nodes, changed_target_nodes, generate_random_updates,
    read_batch_csv, write_batch_csv, UpdateBatch, WeightDelta,
};

use std::collections::HashMap;
use std::sync::Arc;

use crate::error::{Error, Result};

pub type NodeId = u32;

#[derive(Debug)]
struct Topology {
    n: usize,
    in_offsets: Vec<usize>,
    in_sources: Vec<NodeId>,
    out_offsets: Vec<usize>,
    out_targets: Vec<NodeId>,
    out_edge_ids: Vec<u32>,
    original_ids: Vec<u64>,
    by_original: HashMap<u64, NodeId>,
}

/// An immutable graph snapshot. Cloning is cheap.
#[derive(Clone, Debug)]
pub struct Graph {
    topo: Arc<Topology>,
    weights: Arc<Vec<f64>>,
    version: u64,
}

impl Topology {
    /// `edges` must be free of duplicates and self-loops with endpoints `< n`.
    fn build(n: usize, edges: &[(NodeId, NodeId)], original_ids: Vec<u64>) -> Self {
        let mut order: Vec<usize> = (0..edges.len()).collect();
        order.sort_unstable_by_key(|&i| (edges[i].1, edges[i].0));

        let mut in_offsets = vec![0usize; n + 1];
        let mut out_offsets = vec![0usize; n + 1];
        for &(u, v) in edges {
            in_offsets[v as usize + 1] += 1;
            out_offsets[u as usize + 1] += 1;
        }
        for i in 0..n {
            in_offsets[i + 1] += in_offsets[i];
            out_offsets[i + 1] += out_offsets[i];
        }

        let in_sources: Vec<NodeId> = order.iter().map(|&i| edges[i].0).collect();
        let mut out_targets = vec![0; edges.len()];
        let mut out_edge_ids = vec![0; edges.len()];
        let mut cursor = out_offsets.clone();
        // Walking edge ids in order keeps out-lists sorted by target.
        for (eid, &i) in order.iter().enumerate() {
            let (u, v) = edges[i];
            let slot = &mut cursor[u as usize];
            out_targets[*slot] = v;
            out_edge_ids[*slot] = eid as u32;
            *slot += 1;
        }

        let by_original = original_ids
            .iter()
            .enumerate()
            .map(|(i, &o)| (o, i as NodeId))
            .collect();
        Topology {
            n,
            in_offsets,
            in_sources,
            out_offsets,
            out_targets,
            out_edge_ids,
            original_ids,
            by_original,
        }
    }
}

impl Graph {
    fn from_topology(topo: Topology, weights: Vec<f64>) -> Self {
        debug_assert_eq!(weights.len(), topo.in_sources.len());
        Graph {
            topo: Arc::new(topo),
            weights: Arc::new(weights),
            version: 0,
        }
    }

    /// Builds a graph from explicit `(u, v, p)` triples over nodes `0..n`.
    pub fn from_weighted_edges(n: usize, edges: &[(NodeId, NodeId, f64)]) -> Result<Self> {
        if n > NodeId::MAX as usize {
            return Err(Error::InvalidArgument(format!(
                "{n} nodes exceed the id space"
            )));
        }
        let mut seen = std::collections::HashSet::with_capacity(edges.len());
        for &(u, v, p) in edges {
            if u as usize >= n || v as usize >= n {
                return Err(Error::InvalidArgument(format!(
                    "edge ({u}, {v}) out of range for {n} nodes"
                )));
            }
            if u == v {
                return Err(Error::InvalidArgument(format!("self-loop at node {u}")));
            }
            check_probability(p)?;
            if !seen.insert((u, v)) {
                return Err(Error::InvalidArgument(format!("duplicate edge ({u}, {v})")));
            }
        }
        let pairs: Vec<(NodeId, NodeId)> = edges.iter().map(|&(u, v, _)| (u, v)).collect();
        let topo = Topology::build(n, &pairs, (0..n as u64).collect());
        let g = Graph::from_topology(topo, vec![1.0; edges.len()]);
        let mut weights = vec![0.0; edges.len()];
        for &(u, v, p) in edges {
            weights[g.edge_id(u, v).expect("edge just inserted")] = p;
        }
        Ok(g.with_weights(weights, 0))
    }

    /// Topology-only construction; every weight is 1.0 until a weight model is applied.
    pub(crate) fn unweighted(n: usize, edges: &[(NodeId, NodeId)], original_ids: Vec<u64>) -> Self {
        let topo = Topology::build(n, edges, original_ids);
        let m = edges.len();
        Graph::from_topology(topo, vec![1.0; m])
    }

    /// New snapshot over the same topology.
    pub(crate) fn with_weights(&self, weights: Vec<f64>, version: u64) -> Self {
        assert_eq!(weights.len(), self.edge_count());
        Graph {
            topo: Arc::clone(&self.topo),
            weights: Arc::new(weights),
            version,
        }
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.topo.n
    }

    #[inline]
    pub fn edge_count(&self) -> usize {
        self.topo.in_sources.len()
    }

    /// Snapshot tag; incremented by every applied update batch.
    #[inline]
    pub fn version(&self) -> u64 {
        self.version
    }

    pub fn shares_topology(&self, other: &Graph) -> bool {
        Arc::ptr_eq(&self.topo, &other.topo)
    }

    /// In-edges of `v` as parallel `(sources, weights)` slices.
    #[inline]
    pub fn in_edges(&self, v: NodeId) -> (&[NodeId], &[f64]) {
        let r = self.topo.in_offsets[v as usize]..self.topo.in_offsets[v as usize + 1];
        (&self.topo.in_sources[r.clone()], &self.weights[r])
    }

    pub fn in_neighbors(&self, v: NodeId) -> impl Iterator<Item = (NodeId, f64)> + '_ {
        let (src, w) = self.in_edges(v);
        src.iter().copied().zip(w.iter().copied())
    }

    pub fn out_neighbors(&self, u: NodeId) -> impl Iterator<Item = (NodeId, f64)> + '_ {
        let r = self.topo.out_offsets[u as usize]..self.topo.out_offsets[u as usize + 1];
        self.topo.out_targets[r.clone()]
            .iter()
            .zip(&self.topo.out_edge_ids[r])
            .map(move |(&v, &e)| (v, self.weights[e as usize]))
    }

    /// Out-neighbor ids of `u`, ascending.
    #[inline]
    pub fn out_targets(&self, u: NodeId) -> &[NodeId] {
        let r = self.topo.out_offsets[u as usize]..self.topo.out_offsets[u as usize + 1];
        &self.topo.out_targets[r]
    }

    #[inline]
    pub fn in_degree(&self, v: NodeId) -> usize {
        self.topo.in_offsets[v as usize + 1] - self.topo.in_offsets[v as usize]
    }

    #[inline]
    pub fn out_degree(&self, u: NodeId) -> usize {
        self.topo.out_offsets[u as usize + 1] - self.topo.out_offsets[u as usize]
    }

    pub fn edge_id(&self, u: NodeId, v: NodeId) -> Option<usize> {
        if u as usize >= self.n() || v as usize >= self.n() {
            return None;
        }
        let start = self.topo.in_offsets[v as usize];
        let (src, _) = self.in_edges(v);
        src.binary_search(&u).ok().map(|i| start + i)
    }

    pub fn edge_endpoints(&self, eid: usize) -> (NodeId, NodeId) {
        let v = self.topo.in_offsets.partition_point(|&o| o <= eid) - 1;
        (self.topo.in_sources[eid], v as NodeId)
    }

    pub fn weight(&self, u: NodeId, v: NodeId) -> Option<f64> {
        self.edge_id(u, v).map(|e| self.weights[e])
    }

    /// Weights indexed by edge id.
    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// All edges `(u, v, p)` in edge-id order.
    pub fn edges(&self) -> impl Iterator<Item = (NodeId, NodeId, f64)> + '_ {
        (0..self.n() as NodeId).flat_map(move |v| self.in_neighbors(v).map(move |(u, p)| (u, v, p)))
    }

    pub fn original_id(&self, node: NodeId) -> u64 {
        self.topo.original_ids[node as usize]
    }

    pub fn node_by_original(&self, original: u64) -> Option<NodeId> {
        self.topo.by_original.get(&original).copied()
    }
}

pub(crate) fn check_probability(p: f64) -> Result<()> {
    if p > 0.0 && p <= 1.0 {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!(
            "probability {p} outside (0, 1]"
        )))
    }
}

/// Weighted cascade: every in-edge of `v` gets probability `1 / in_degree(v)`.
pub fn assign_wc_weights(g: &Graph) -> Graph {
    let mut weights = vec![0.0; g.edge_count()];
    for v in 0..g.n() {
        let r = g.topo.in_offsets[v]..g.topo.in_offsets[v + 1];
        let p = 1.0 / r.len() as f64;
        weights[r].fill(p);
    }
    g.with_weights(weights, g.version())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> Graph {
        Graph::from_weighted_edges(
            4,
            &[
                (0, 1, 0.5),
                (2, 1, 0.25),
                (1, 3, 1.0),
                (0, 3, 0.1),
                (3, 0, 0.7),
            ],
        )
        .unwrap()
    }

    #[test]
    fn in_and_out_views_agree() {
        let g = sample();
        let mut from_in: Vec<_> = g.edges().collect();
        let mut from_out: Vec<_> = (0..4)
            .flat_map(|u| g.out_neighbors(u).map(move |(v, p)| (u, v, p)))
            .collect();
        from_in.sort_by(|a, b| a.partial_cmp(b).unwrap());
        from_out.sort_by(|a, b| a.partial_cmp(b).unwrap());
        assert_eq!(from_in, from_out);
        assert_eq!(g.edge_count(), 5);
        assert_eq!(g.in_degree(1), 2);
        assert_eq!(g.out_degree(0), 2);
        assert_eq!(g.weight(2, 1), Some(0.25));
        assert_eq!(g.weight(1, 2), None);
    }

    #[test]
    fn rejects_bad_edges() {
        assert!(Graph::from_weighted_edges(2, &[(0, 1, 0.0)]).is_err());
        assert!(Graph::from_weighted_edges(2, &[(0, 1, 1.5)]).is_err());
        assert!(Graph::from_weighted_edges(2, &[(0, 0, 0.5)]).is_err());
        assert!(Graph::from_weighted_edges(2, &[(0, 2, 0.5)]).is_err());
        assert!(Graph::from_weighted_edges(2, &[(0, 1, 0.5), (0, 1, 0.2)]).is_err());
    }

    #[test]
    fn wc_weights() {
        // star: five leaves pointing at the center
        let edges: Vec<_> = (1..6).map(|u| (u, 0, 1.0)).collect();
        let g = assign_wc_weights(&Graph::from_weighted_edges(6, &edges).unwrap());
        for (_, p) in g.in_neighbors(0) {
            assert_eq!(p, 0.2);
        }
        let g = assign_wc_weights(&sample());
        assert_eq!(g.weight(0, 1), Some(0.5));
        assert_eq!(g.weight(2, 1), Some(0.5));
        assert_eq!(g.weight(3, 0), Some(1.0));
        for v in 0..g.n() as NodeId {
            let s: f64 = g.in_neighbors(v).map(|(_, p)| p).sum();
            if g.in_degree(v) > 0 {
                assert!((s - 1.0).abs() < 1e-9);
            }
        }
    }
}
