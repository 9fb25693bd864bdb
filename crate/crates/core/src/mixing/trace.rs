//! Fully labelled RR-set generation, used to check the ratio approximation
//! against the exact trace probability. Production code never stores traces.

use std::collections::{HashMap, HashSet, VecDeque};

use rand::Rng;

use crate::graph::{Graph, NodeId};
use crate::rr::RRSet;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum EdgeLabel {
    /// The coin fired and activated the source.
    Bfs,
    /// The source was already active; no coin was drawn.
    Cross,
    /// The coin failed.
    Dead,
}

/// An RR set together with the label of every edge examined while growing it.
#[derive(Clone, Debug)]
pub struct RRTrace {
    pub set: RRSet,
    /// `(u, v) -> label` for every examined edge `u -> v`.
    pub labels: HashMap<(NodeId, NodeId), EdgeLabel>,
}

impl RRTrace {
    pub fn edges_with(&self, label: EdgeLabel) -> impl Iterator<Item = (NodeId, NodeId)> + '_ {
        self.labels
            .iter()
            .filter(move |(_, &l)| l == label)
            .map(|(&e, _)| e)
    }
}

/// Grows an RR set from `root` exactly like the engine's sampler (FIFO queue,
/// stored in-neighbor order, coin only for inactive candidates) while labelling
/// every examined edge. With the same random stream it yields the same set.
pub fn sample_rr_trace<R: Rng + ?Sized>(g: &Graph, root: NodeId, rng: &mut R) -> RRTrace {
    let mut active = HashSet::from([root]);
    let mut order = vec![root];
    let mut parents = vec![root];
    let mut labels = HashMap::new();
    let mut queue = VecDeque::from([root]);
    while let Some(v) = queue.pop_front() {
        for (u, p) in g.in_neighbors(v) {
            let label = if active.contains(&u) {
                EdgeLabel::Cross
            } else if rng.gen::<f64>() < p {
                active.insert(u);
                order.push(u);
                parents.push(v);
                queue.push_back(u);
                EdgeLabel::Bfs
            } else {
                EdgeLabel::Dead
            };
            labels.insert((u, v), label);
        }
    }
    let set = RRSet::from_parts(order, parents).expect("BFS order yields a valid tree");
    RRTrace { set, labels }
}

/// Product of `p` over BFS edges and `1 - p` over dead edges, under `g`'s weights.
pub fn exact_rr_trace_probability(g: &Graph, trace: &RRTrace) -> f64 {
    trace
        .labels
        .iter()
        .map(|(&(u, v), label)| {
            let p = g.weight(u, v).expect("traced edge exists");
            match label {
                EdgeLabel::Bfs => p,
                EdgeLabel::Dead => 1.0 - p,
                EdgeLabel::Cross => 1.0,
            }
        })
        .product()
}
