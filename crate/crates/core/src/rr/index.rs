use super::RRSet;
use crate::graph::NodeId;

/// Node -> ids of the sets containing it, stored as one flat CSR array.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct InvertedIndex {
    offsets: Vec<usize>,
    set_ids: Vec<u32>,
}

impl InvertedIndex {
    pub fn build(n: usize, sets: &[RRSet]) -> Self {
        let mut offsets = vec![0usize; n + 1];
        for s in sets {
            for &x in s.nodes() {
                offsets[x as usize + 1] += 1;
            }
        }
        for i in 0..n {
            offsets[i + 1] += offsets[i];
        }
        let mut cursor = offsets.clone();
        let mut set_ids = vec![0u32; offsets[n]];
        for (i, s) in sets.iter().enumerate() {
            for &x in s.nodes() {
                let slot = &mut cursor[x as usize];
                set_ids[*slot] = i as u32;
                *slot += 1;
            }
        }
        InvertedIndex { offsets, set_ids }
    }

    /// Set ids containing `node`, ascending.
    #[inline]
    pub fn sets_containing(&self, node: NodeId) -> &[u32] {
        &self.set_ids[self.offsets[node as usize]..self.offsets[node as usize + 1]]
    }

    pub fn node_count(&self) -> usize {
        self.offsets.len().saturating_sub(1)
    }

    /// Total number of (node, set) memberships.
    pub fn total_entries(&self) -> usize {
        self.set_ids.len()
    }
}
