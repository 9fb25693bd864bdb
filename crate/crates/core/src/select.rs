//! Greedy max-coverage seed selection and sample-size policies.

use std::cmp::Reverse;
use std::collections::BinaryHeap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{Graph, NodeId};
use crate::rng::{derive_seed, purpose};
use crate::rr::{build_collection, RRCollection};

#[derive(Clone, Debug, PartialEq)]
pub struct SelectionResult {
    pub seeds: Vec<NodeId>,
    /// Newly covered sets at each step; non-increasing.
    pub marginal_coverage: Vec<usize>,
    pub total_coverage: usize,
    pub rr_influence_estimate: f64,
}

/// Picks up to `k` nodes, each maximizing the number of newly covered sets.
///
/// Lazy evaluation over a max-heap of stale gains; since gains only shrink, a
/// popped entry whose gain is current is the true argmax. Ties go to the
/// smallest node id. Stops early once no node covers a new set.
pub fn greedy_select(c: &RRCollection, k: usize) -> Result<SelectionResult> {
    if k == 0 {
        return Err(Error::InvalidArgument(
            "seed budget must be positive".into(),
        ));
    }
    let n = c.n();
    let index = c.index();
    let sets = c.sets();
    let mut gain: Vec<usize> = (0..n as NodeId)
        .map(|v| index.sets_containing(v).len())
        .collect();
    let mut heap: BinaryHeap<(usize, Reverse<NodeId>)> = (0..n as NodeId)
        .filter(|&v| gain[v as usize] > 0)
        .map(|v| (gain[v as usize], Reverse(v)))
        .collect();
    let mut covered = vec![false; sets.len()];

    let mut seeds = Vec::with_capacity(k.min(n));
    let mut marginal = Vec::with_capacity(k.min(n));
    while seeds.len() < k {
        let Some((stale, Reverse(v))) = heap.pop() else {
            break;
        };
        let current = gain[v as usize];
        if stale != current {
            if current > 0 {
                heap.push((current, Reverse(v)));
            }
            continue;
        }
        seeds.push(v);
        marginal.push(current);
        for &i in index.sets_containing(v) {
            let i = i as usize;
            if !covered[i] {
                covered[i] = true;
                for &x in sets[i].nodes() {
                    gain[x as usize] -= 1;
                }
            }
        }
    }

    let total: usize = marginal.iter().sum();
    let estimate = if sets.is_empty() {
        0.0
    } else {
        n as f64 * total as f64 / sets.len() as f64
    };
    Ok(SelectionResult {
        seeds,
        marginal_coverage: marginal,
        total_coverage: total,
        rr_influence_estimate: estimate,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SampleSizeMode {
    Fixed,
    Doubling,
}

/// How many RR sets to draw for a selection round.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SampleSizePolicy {
    pub mode: SampleSizeMode,
    pub fixed_n: usize,
    pub epsilon: f64,
    pub ell: f64,
    /// Relative change of the greedy estimate below which doubling stops.
    pub stability_threshold: f64,
    /// Scale of the initial size `c0 * n * log2(n) / epsilon^2`.
    pub c0: f64,
    /// Upper bound on the size doubling may reach.
    pub max_n: usize,
}

impl SampleSizePolicy {
    pub fn fixed(n: usize) -> Self {
        SampleSizePolicy {
            mode: SampleSizeMode::Fixed,
            fixed_n: n,
            ..Self::default()
        }
    }

    pub fn doubling(stability_threshold: f64, c0: f64) -> Self {
        SampleSizePolicy {
            mode: SampleSizeMode::Doubling,
            stability_threshold,
            c0,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidArgument(m.to_string()));
        match self.mode {
            SampleSizeMode::Fixed if self.fixed_n == 0 => bad("fixed sample size must be positive"),
            SampleSizeMode::Doubling if self.epsilon.is_nan() || self.epsilon <= 0.0 => {
                bad("epsilon must be positive")
            }
            SampleSizeMode::Doubling if self.c0.is_nan() || self.c0 <= 0.0 => {
                bad("c0 must be positive")
            }
            SampleSizeMode::Doubling
                if self.stability_threshold.is_nan() || self.stability_threshold <= 0.0 =>
            {
                bad("stability threshold must be positive")
            }
            SampleSizeMode::Doubling if self.max_n == 0 => bad("max_n must be positive"),
            _ => Ok(()),
        }
    }

    /// First size tried in doubling mode.
    pub fn initial_size(&self, n: usize) -> usize {
        let n = n as f64;
        let raw = (self.c0 * n * n.log2().max(0.0) / (self.epsilon * self.epsilon)).ceil();
        (raw as usize).clamp(1, self.max_n)
    }
}

impl Default for SampleSizePolicy {
    fn default() -> Self {
        SampleSizePolicy {
            mode: SampleSizeMode::Fixed,
            fixed_n: 100_000,
            epsilon: 0.1,
            ell: 1.0,
            stability_threshold: 0.01,
            c0: 0.01,
            max_n: 10_000_000,
        }
    }
}

/// Fixed mode returns `fixed_n`. Doubling mode starts at
/// [`SampleSizePolicy::initial_size`] and doubles until the greedy RR
/// estimate at size `s` and `2s` differ by less than the stability threshold
/// (relative), returning `s`; `max_n` caps the search.
pub fn decide_sample_size(
    g: &Graph,
    k: usize,
    policy: &SampleSizePolicy,
    seed: u64,
) -> Result<usize> {
    policy.validate()?;
    match policy.mode {
        SampleSizeMode::Fixed => Ok(policy.fixed_n),
        SampleSizeMode::Doubling => {
            let estimate_at = |size: usize, stage: u64| -> Result<f64> {
                let c =
                    build_collection(g, size, derive_seed(seed, &[purpose::SAMPLE_SIZE, stage]))?;
                Ok(greedy_select(&c, k)?.rr_influence_estimate)
            };
            let mut size = policy.initial_size(g.n());
            let mut stage = 0;
            let mut current = estimate_at(size, stage)?;
            while size < policy.max_n {
                let next_size = (size * 2).min(policy.max_n);
                stage += 1;
                let next = estimate_at(next_size, stage)?;
                let change = (next - current).abs() / current.max(f64::MIN_POSITIVE);
                if change < policy.stability_threshold {
                    return Ok(size);
                }
                size = next_size;
                current = next;
            }
            Ok(size)
        }
    }
}

/// Sample-size decision, collection build and greedy selection in one call.
/// The collection is returned so it can be carried to the next snapshot.
pub fn select_seeds_end_to_end(
    g: &Graph,
    k: usize,
    policy: &SampleSizePolicy,
    seed: u64,
) -> Result<(SelectionResult, RRCollection)> {
    let n_r = decide_sample_size(g, k, policy, seed)?;
    let c = build_collection(g, n_r, seed)?;
    let result = greedy_select(&c, k)?;
    Ok((result, c))
}
