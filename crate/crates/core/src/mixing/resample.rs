use rand::Rng;

use super::RatioContext;
use crate::graph::Graph;
use crate::rr::{Marks, RRSet};

/// Scratch space for regrowing rejected sets.
#[derive(Clone, Debug)]
pub struct Resampler {
    in_old: Marks,
    active: Marks,
}

impl Resampler {
    pub fn new(n: usize) -> Self {
        Resampler {
            in_old: Marks::new(n),
            active: Marks::new(n),
        }
    }

    /// Reverse BFS from `old`'s root under `g_new`. Coins are redrawn only
    /// where the old outcome says nothing about the new one:
    ///
    /// * changed edge: fresh coin at the new weight;
    /// * unchanged edge with both endpoints in `old`: succeeds;
    /// * unchanged edge whose head was never reached in `old`: fresh coin;
    /// * unchanged edge into `old` from outside it: fails.
    pub fn resample<R: Rng + ?Sized>(
        &mut self,
        old: &RRSet,
        g_new: &Graph,
        ctx: &RatioContext,
        rng: &mut R,
    ) -> RRSet {
        self.in_old.clear();
        for &x in old.nodes() {
            self.in_old.set(x);
        }
        self.active.clear();
        let root = old.root();
        self.active.set(root);
        let mut nodes = vec![root];
        let mut parents = vec![root];
        let mut head = 0;
        while head < nodes.len() {
            let v = nodes[head];
            head += 1;
            let v_in_old = self.in_old.get(v);
            let v_changed = ctx.is_changed_target(v);
            let (sources, weights) = g_new.in_edges(v);
            for (&u, &p) in sources.iter().zip(weights) {
                if self.active.get(u) {
                    continue;
                }
                let changed = v_changed && ctx.changed_weights(u, v).is_some();
                let fires = if changed || !v_in_old {
                    rng.gen::<f64>() < p
                } else {
                    self.in_old.get(u)
                };
                if fires {
                    self.active.set(u);
                    nodes.push(u);
                    parents.push(v);
                }
            }
        }
        RRSet::from_parts_unchecked(nodes, parents)
    }
}

pub fn resample_rr_set<R: Rng + ?Sized>(
    old: &RRSet,
    g_new: &Graph,
    ctx: &RatioContext,
    rng: &mut R,
) -> RRSet {
    Resampler::new(g_new.n()).resample(old, g_new, ctx, rng)
}
