//! Reusing RR sets across a batch of edge-weight changes.
//!
//! Each old set is kept with probability `min(1, p_new(R) / p_old(R))`. A
//! rejected set is regrown from its root, redrawing only the coins that the
//! batch touched, and the regrown set is accepted with probability
//! `max(0, 1 - p_old(R') / p_new(R'))`. Fresh samples fill whatever is missing.
//!
//! Only BFS edges are stored, so `p_new(R) / p_old(R)` is approximated: every
//! changed in-edge of an activated node is treated as a dead edge, and the BFS
//! edges correct that assumption for the edges that actually fired.

mod mix;
mod resample;
pub mod trace;

pub use mix::{mix_collection, MixConfig, MixOutcome, MixStats};
pub use resample::{resample_rr_set, Resampler};

use crate::error::{Error, Result};
use crate::graph::{NodeId, UpdateBatch};
use crate::rr::RRSet;

/// Smoothing constant guarding `1 - p = 0` denominators.
pub const DEFAULT_LAMBDA: f64 = 1e-9;

/// Everything the ratio computation needs about one batch, precomputed once.
#[derive(Clone, Debug)]
pub struct RatioContext {
    batch: UpdateBatch,
    lambda: f64,
    changed_targets: Vec<NodeId>,
    /// Changed in-edges grouped by target: `(u, old_p, new_p)` sorted by `u`,
    /// the group of `v` at `in_offsets[v]..in_offsets[v + 1]`.
    in_offsets: Vec<usize>,
    in_changes: Vec<(NodeId, f64, f64)>,
    is_target: Vec<bool>,
    dead: Vec<f64>,
}

impl RatioContext {
    /// `n` is the node count of the graph the batch belongs to.
    pub fn new(n: usize, batch: &UpdateBatch, lambda: f64) -> Result<Self> {
        if !(lambda > 0.0 && lambda.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "lambda must be a positive finite number, got {lambda}"
            )));
        }
        let mut in_offsets = vec![0usize; n + 1];
        let mut is_target = vec![false; n];
        let mut dead = vec![1.0; n];
        let mut changed_targets = Vec::new();
        for d in &batch.deltas {
            if d.u as usize >= n || d.v as usize >= n {
                return Err(Error::UnknownEdge(d.u, d.v));
            }
            in_offsets[d.v as usize + 1] += 1;
            if !is_target[d.v as usize] {
                is_target[d.v as usize] = true;
                changed_targets.push(d.v);
            }
            dead[d.v as usize] *= dead_factor(d.old_p, d.new_p, lambda);
        }
        changed_targets.sort_unstable();
        for i in 0..n {
            in_offsets[i + 1] += in_offsets[i];
        }
        let mut cursor = in_offsets.clone();
        let mut in_changes = vec![(0, 0.0, 0.0); batch.len()];
        for d in &batch.deltas {
            let slot = &mut cursor[d.v as usize];
            in_changes[*slot] = (d.u, d.old_p, d.new_p);
            *slot += 1;
        }
        for &v in &changed_targets {
            in_changes[in_offsets[v as usize]..in_offsets[v as usize + 1]]
                .sort_unstable_by_key(|c| c.0);
        }
        Ok(RatioContext {
            batch: batch.clone(),
            lambda,
            changed_targets,
            in_offsets,
            in_changes,
            is_target,
            dead,
        })
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn batch(&self) -> &UpdateBatch {
        &self.batch
    }

    /// Nodes with at least one changed in-edge, ascending.
    pub fn changed_targets(&self) -> &[NodeId] {
        &self.changed_targets
    }

    #[inline]
    pub fn is_changed_target(&self, v: NodeId) -> bool {
        self.is_target[v as usize]
    }

    /// `(old_p, new_p)` if edge `u -> v` is in the batch.
    #[inline]
    pub fn changed_weights(&self, u: NodeId, v: NodeId) -> Option<(f64, f64)> {
        if !self.is_target[v as usize] {
            return None;
        }
        let group = &self.in_changes[self.in_offsets[v as usize]..self.in_offsets[v as usize + 1]];
        group
            .binary_search_by_key(&u, |c| c.0)
            .ok()
            .map(|i| (group[i].1, group[i].2))
    }

    /// Cached probability ratio that all in-edges of `v` stay dead.
    #[inline]
    pub fn dead_ratio(&self, v: NodeId) -> f64 {
        self.dead[v as usize]
    }

    /// Uncached evaluation of [`dead_ratio`](Self::dead_ratio).
    pub fn fresh_dead_ratio(&self, v: NodeId) -> f64 {
        self.batch
            .deltas
            .iter()
            .filter(|d| d.v == v)
            .fold(1.0, |acc, d| {
                acc * dead_factor(d.old_p, d.new_p, self.lambda)
            })
    }
}

#[inline]
fn dead_factor(old_p: f64, new_p: f64, lambda: f64) -> f64 {
    (1.0 - new_p + lambda) / (1.0 - old_p + lambda)
}

/// Ratio contributed by a BFS edge on top of its dead factor: the dead factor
/// is divided back out and the success-probability ratio multiplied in.
#[inline]
fn bfs_factor(old_p: f64, new_p: f64, lambda: f64) -> f64 {
    ((new_p + lambda) / (old_p + lambda)) * ((1.0 - old_p + lambda) / (1.0 - new_p + lambda))
}

/// Dead-edge ratio of node `v` under the batch: the product over changed
/// in-edges `(u, v)` of `(1 - p_new + λ) / (1 - p_old + λ)`; 1 if none changed.
pub fn dead_ratio(v: NodeId, ctx: &RatioContext) -> f64 {
    ctx.dead_ratio(v)
}

/// Approximate `p_new(R) / p_old(R)` for a set sampled under the old weights.
///
/// Exactly 1.0 when no node of `r` has a changed in-edge.
pub fn rr_probability_ratio(r: &RRSet, ctx: &RatioContext) -> f64 {
    let mut ratio = 1.0;
    let mut touched = false;
    for &x in r.nodes() {
        if ctx.is_changed_target(x) {
            ratio *= ctx.dead_ratio(x);
            touched = true;
        }
    }
    if !touched {
        return 1.0;
    }
    for (child, parent) in r.bfs_edges() {
        if let Some((old_p, new_p)) = ctx.changed_weights(child, parent) {
            ratio *= bfs_factor(old_p, new_p, ctx.lambda);
        }
    }
    ratio
}

/// Probability of keeping an old set whose probability ratio is `ratio`.
pub fn remain_probability(ratio: f64) -> f64 {
    ratio.min(1.0)
}

/// Probability of accepting a regrown set whose probability ratio is `ratio_new`.
pub fn accept_probability(ratio_new: f64) -> f64 {
    (1.0 - 1.0 / ratio_new).max(0.0)
}
