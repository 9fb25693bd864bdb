//! Reverse-reachable set sampling.

mod collection;
mod index;

pub use collection::{build_collection, coverage, estimate_influence_rr, RRCollection};
pub use index::InvertedIndex;

use rand::Rng;

use crate::error::{Error, Result};
use crate::graph::{Graph, NodeId};

/// Nodes reached by one reverse BFS, in activation order, with the BFS edge of
/// every non-root node.
///
/// `nodes[0]` is the root. For `i >= 1`, `(nodes[i], parents[i])` is the edge
/// through which `nodes[i]` was activated; `parents[0]` is the root itself.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct RRSet {
    nodes: Vec<NodeId>,
    parents: Vec<NodeId>,
}

impl RRSet {
    pub fn singleton(root: NodeId) -> Self {
        RRSet {
            nodes: vec![root],
            parents: vec![root],
        }
    }

    /// Validates the BFS-tree shape: distinct nodes, and every parent appears
    /// earlier in the activation order.
    pub fn from_parts(nodes: Vec<NodeId>, parents: Vec<NodeId>) -> Result<Self> {
        let bad = |m: String| Err(Error::InvalidArgument(m));
        if nodes.is_empty() {
            return bad("RR set has no root".into());
        }
        if nodes.len() != parents.len() {
            return bad("node and parent lists differ in length".into());
        }
        if parents[0] != nodes[0] {
            return bad("root must be its own parent".into());
        }
        let mut position = std::collections::HashMap::with_capacity(nodes.len());
        for (i, &x) in nodes.iter().enumerate() {
            if position.insert(x, i).is_some() {
                return bad(format!("node {x} listed twice"));
            }
        }
        for i in 1..nodes.len() {
            match position.get(&parents[i]) {
                Some(&j) if j < i => {}
                _ => return bad(format!("node {} has a parent outside the tree", nodes[i])),
            }
        }
        Ok(RRSet { nodes, parents })
    }

    pub(crate) fn from_parts_unchecked(nodes: Vec<NodeId>, parents: Vec<NodeId>) -> Self {
        RRSet { nodes, parents }
    }

    #[inline]
    pub fn root(&self) -> NodeId {
        self.nodes[0]
    }

    #[inline]
    pub fn nodes(&self) -> &[NodeId] {
        &self.nodes
    }

    #[inline]
    pub fn parents(&self) -> &[NodeId] {
        &self.parents
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    /// Never true; an RR set always holds its root.
    pub fn is_empty(&self) -> bool {
        false
    }

    /// `(child, parent)` pairs, i.e. graph edges `child -> parent`.
    pub fn bfs_edges(&self) -> impl Iterator<Item = (NodeId, NodeId)> + '_ {
        self.nodes[1..]
            .iter()
            .copied()
            .zip(self.parents[1..].iter().copied())
    }

    pub fn parent_of(&self, node: NodeId) -> Option<NodeId> {
        self.nodes
            .iter()
            .position(|&x| x == node)
            .map(|i| self.parents[i])
    }

    pub fn contains(&self, node: NodeId) -> bool {
        self.nodes.contains(&node)
    }

    /// Node ids in ascending order.
    pub fn sorted_nodes(&self) -> Vec<NodeId> {
        let mut v = self.nodes.clone();
        v.sort_unstable();
        v
    }
}

/// Epoch-stamped membership marks over `0..n`, cleared in O(1).
#[derive(Clone, Debug)]
pub(crate) struct Marks {
    stamp: Vec<u32>,
    epoch: u32,
}

impl Marks {
    pub(crate) fn new(n: usize) -> Self {
        Marks {
            stamp: vec![0; n],
            epoch: 1,
        }
    }

    #[inline]
    pub(crate) fn clear(&mut self) {
        self.epoch = self.epoch.wrapping_add(1);
        if self.epoch == 0 {
            self.stamp.fill(0);
            self.epoch = 1;
        }
    }

    #[inline]
    pub(crate) fn get(&self, x: NodeId) -> bool {
        self.stamp[x as usize] == self.epoch
    }

    #[inline]
    pub(crate) fn set(&mut self, x: NodeId) {
        self.stamp[x as usize] = self.epoch;
    }
}

/// Reusable scratch space for reverse BFS over one graph size.
#[derive(Clone, Debug)]
pub struct RrSampler {
    active: Marks,
}

impl RrSampler {
    pub fn new(n: usize) -> Self {
        RrSampler {
            active: Marks::new(n),
        }
    }

    pub fn sample<R: Rng + ?Sized>(&mut self, g: &Graph, rng: &mut R) -> RRSet {
        let root = rng.gen_range(0..g.n()) as NodeId;
        self.sample_from_root(g, root, rng)
    }

    /// Reverse BFS with a FIFO queue; in-neighbors are scanned in stored order
    /// and a coin is flipped only for inactive candidates.
    pub fn sample_from_root<R: Rng + ?Sized>(
        &mut self,
        g: &Graph,
        root: NodeId,
        rng: &mut R,
    ) -> RRSet {
        self.active.clear();
        self.active.set(root);
        let mut set = RRSet::singleton(root);
        let mut head = 0;
        while head < set.nodes.len() {
            let v = set.nodes[head];
            head += 1;
            let (sources, weights) = g.in_edges(v);
            for (&u, &p) in sources.iter().zip(weights) {
                if !self.active.get(u) && rng.gen::<f64>() < p {
                    self.active.set(u);
                    set.nodes.push(u);
                    set.parents.push(v);
                }
            }
        }
        set
    }
}

/// One RR set from a uniformly random root.
pub fn sample_rr_set<R: Rng + ?Sized>(g: &Graph, rng: &mut R) -> RRSet {
    RrSampler::new(g.n()).sample(g, rng)
}

pub fn sample_rr_set_from_root<R: Rng + ?Sized>(g: &Graph, root: NodeId, rng: &mut R) -> RRSet {
    RrSampler::new(g.n()).sample_from_root(g, root, rng)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn no_edges_gives_root_only() {
        let g = Graph::from_weighted_edges(3, &[]).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..20 {
            let r = sample_rr_set(&g, &mut rng);
            assert_eq!(r.len(), 1);
            assert_eq!(r.bfs_edges().count(), 0);
        }
    }

    #[test]
    fn deterministic_chain() {
        let g = Graph::from_weighted_edges(2, &[(0, 1, 1.0)]).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..20 {
            let r = sample_rr_set_from_root(&g, 1, &mut rng);
            assert_eq!(r.nodes(), &[1, 0]);
            assert_eq!(r.parent_of(0), Some(1));
        }
    }

    #[test]
    fn from_parts_rejects_broken_trees() {
        assert!(RRSet::from_parts(vec![2, 0, 1], vec![2, 2, 0]).is_ok());
        assert!(RRSet::from_parts(vec![], vec![]).is_err());
        assert!(RRSet::from_parts(vec![2, 0], vec![0, 2]).is_err());
        assert!(RRSet::from_parts(vec![2, 0, 1], vec![2, 1, 0]).is_err());
        assert!(RRSet::from_parts(vec![2, 0, 0], vec![2, 2, 2]).is_err());
        assert!(RRSet::from_parts(vec![2, 0], vec![2, 7]).is_err());
    }

    fn arb_graph() -> impl Strategy<Value = Graph> {
        (2usize..9).prop_flat_map(|n| {
            proptest::collection::vec((0..n as u32, 0..n as u32, 0.05f64..=1.0), 0..20).prop_map(
                move |raw| {
                    let mut seen = std::collections::HashSet::new();
                    let edges: Vec<_> = raw
                        .into_iter()
                        .filter(|&(u, v, _)| u != v && seen.insert((u, v)))
                        .collect();
                    Graph::from_weighted_edges(n, &edges).unwrap()
                },
            )
        })
    }

    proptest! {
        #[test]
        fn sampled_sets_are_trees_over_real_edges(g in arb_graph(), seed in any::<u64>()) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut sampler = RrSampler::new(g.n());
            for _ in 0..20 {
                let r = sampler.sample(&g, &mut rng);
                let rebuilt = RRSet::from_parts(r.nodes().to_vec(), r.parents().to_vec());
                prop_assert!(rebuilt.is_ok());
                for (child, parent) in r.bfs_edges() {
                    prop_assert!(g.weight(child, parent).is_some());
                }
            }
        }

        #[test]
        fn sampling_is_deterministic(g in arb_graph(), seed in any::<u64>()) {
            let a = sample_rr_set(&g, &mut ChaCha8Rng::seed_from_u64(seed));
            let b = sample_rr_set(&g, &mut ChaCha8Rng::seed_from_u64(seed));
            prop_assert_eq!(a, b);
        }
    }
}
