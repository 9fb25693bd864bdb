//! Preferential-attachment digraphs for benchmarks without downloaded datasets.

use std::collections::HashSet;

use dimp_core::graph::{load_edge_list, Graph, NodeId};
use dimp_core::{Error, Result};
use rand::Rng;

/// Grows a citation-like graph: node `t` links to `min(out_degree, t)`
/// distinct earlier nodes, each picked with probability proportional to
/// `1 + in_degree`. Returns the topology with placeholder weights.
pub fn preferential_attachment<R: Rng + ?Sized>(
    nodes: usize,
    out_degree: usize,
    rng: &mut R,
) -> Result<Graph> {
    if nodes < 2 || out_degree == 0 {
        return Err(Error::InvalidArgument(
            "need at least two nodes and a positive out-degree".into(),
        ));
    }
    // Each node appears once, plus once per in-edge it receives.
    let mut pool: Vec<NodeId> = Vec::with_capacity(nodes * (out_degree + 1));
    let mut text = String::with_capacity(nodes * out_degree * 12);
    let mut picked = HashSet::with_capacity(out_degree);
    pool.push(0);
    for t in 1..nodes as NodeId {
        picked.clear();
        let want = out_degree.min(t as usize);
        while picked.len() < want {
            let v = pool[rng.gen_range(0..pool.len())];
            if picked.insert(v) {
                pool.push(v);
            }
        }
        let mut targets: Vec<_> = picked.iter().copied().collect();
        targets.sort_unstable();
        for v in targets {
            text.push_str(&format!("{t} {v}\n"));
        }
        pool.push(t);
    }
    Ok(load_edge_list(text.as_bytes())?.graph)
}

#[cfg(test)]
mod tests {
    use super::*;
    use dimp_core::rng::stream;

    #[test]
    fn sizes_and_determinism() {
        let g = preferential_attachment(500, 4, &mut stream(1, &[])).unwrap();
        assert_eq!(g.n(), 500);
        assert_eq!(g.edge_count(), 4 * 500 - (1 + 2 + 3 + 4));
        let h = preferential_attachment(500, 4, &mut stream(1, &[])).unwrap();
        assert_eq!(g.weights().len(), h.weights().len());
        assert!(g.edges().zip(h.edges()).all(|(a, b)| a == b));
        let max_in = (0..500).map(|v| g.in_degree(v)).max().unwrap();
        assert!(max_in > 20, "expected hubs, max in-degree {max_in}");
    }
}
