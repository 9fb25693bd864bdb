use std::time::Instant;

use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use super::{
    accept_probability, remain_probability, rr_probability_ratio, RatioContext, Resampler,
    DEFAULT_LAMBDA,
};
use crate::error::{Error, Result};
use crate::graph::{Graph, UpdateBatch};
use crate::rng::{purpose, stream, substream};
use crate::rr::{InvertedIndex, RRCollection, RRSet, RrSampler};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MixConfig {
    pub lambda: f64,
    /// Master seed for the per-set decision streams.
    pub seed: u64,
}

impl Default for MixConfig {
    fn default() -> Self {
        MixConfig {
            lambda: DEFAULT_LAMBDA,
            seed: 0,
        }
    }
}

/// Reuse statistics of one mixing pass.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize)]
pub struct MixStats {
    /// Old sets that survived the remain step.
    pub kept: usize,
    /// Regrown sets accepted in the sample step.
    pub resampled_accepted: usize,
    /// Sets sampled from scratch to reach the target size.
    pub fresh: usize,
    /// Old sets skipped without a ratio evaluation (ratio exactly 1).
    pub ratio_fast_path_hits: usize,
    pub wall_time_ms: f64,
}

impl MixStats {
    /// Share of old sets that survived; 1.0 when there were none.
    pub fn kept_fraction(&self, old_len: usize) -> f64 {
        if old_len == 0 {
            1.0
        } else {
            self.kept as f64 / old_len as f64
        }
    }
}

#[derive(Clone, Debug)]
pub struct MixOutcome {
    pub collection: RRCollection,
    pub stats: MixStats,
}

enum Fate {
    Keep,
    Replace(RRSet),
    Drop,
}

/// Carries `old` (sampled under the batch's source snapshot) over to `g_new`
/// and returns exactly `n_r` sets.
///
/// Only sets containing a node with a changed in-edge are visited; all other
/// sets have ratio 1 and are kept as they are. Decisions for set `i` use
/// substream `i`, so the result is independent of scheduling.
pub fn mix_collection(
    old: RRCollection,
    g_new: &Graph,
    batch: &UpdateBatch,
    n_r: usize,
    config: MixConfig,
) -> Result<MixOutcome> {
    let start = Instant::now();
    check_versions(&old, g_new, batch)?;
    if n_r == 0 {
        return Err(Error::InvalidArgument(
            "collection size must be positive".into(),
        ));
    }
    let ctx = RatioContext::new(g_new.n(), batch, config.lambda)?;
    let n = g_new.n();
    let master_seed = old.master_seed();
    let old_len = old.len();
    let (sets, old_index) = old.into_parts();

    let mut is_candidate = vec![false; old_len];
    for &v in ctx.changed_targets() {
        for &i in old_index.sets_containing(v) {
            is_candidate[i as usize] = true;
        }
    }
    let candidates: Vec<usize> = (0..old_len).filter(|&i| is_candidate[i]).collect();
    if candidates.is_empty() && old_len == n_r {
        let stats = MixStats {
            kept: old_len,
            ratio_fast_path_hits: old_len,
            wall_time_ms: start.elapsed().as_secs_f64() * 1e3,
            ..MixStats::default()
        };
        let collection = RRCollection::with_index(n, sets, old_index, g_new.version(), master_seed);
        return Ok(MixOutcome { collection, stats });
    }

    let tags = [purpose::MIX, batch.timestep];
    let fates: Vec<Fate> = candidates
        .par_iter()
        .map_init(
            || Resampler::new(n),
            |resampler, &i| {
                let old_set = &sets[i];
                let remain = remain_probability(rr_probability_ratio(old_set, &ctx));
                // A draw below 1.0 always succeeds, so the stream is not needed.
                if remain >= 1.0 {
                    return Fate::Keep;
                }
                let mut rng = substream(config.seed, &tags, i as u64);
                if rng.gen::<f64>() < remain {
                    return Fate::Keep;
                }
                let regrown = resampler.resample(old_set, g_new, &ctx, &mut rng);
                let ratio_new = rr_probability_ratio(&regrown, &ctx);
                if rng.gen::<f64>() < accept_probability(ratio_new) {
                    Fate::Replace(regrown)
                } else {
                    Fate::Drop
                }
            },
        )
        .collect();

    let mut stats = MixStats {
        ratio_fast_path_hits: old_len - candidates.len(),
        ..MixStats::default()
    };
    let mut fates = candidates.into_iter().zip(fates).peekable();
    let mut out: Vec<RRSet> = Vec::with_capacity(n_r);
    let mut unchanged_prefix = true;
    for (i, set) in sets.into_iter().enumerate() {
        let fate = match fates.peek() {
            Some(&(j, _)) if j == i => fates.next().expect("peeked").1,
            _ => Fate::Keep,
        };
        match fate {
            Fate::Keep => {
                stats.kept += 1;
                out.push(set);
            }
            Fate::Replace(regrown) => {
                stats.resampled_accepted += 1;
                unchanged_prefix = false;
                out.push(regrown);
            }
            Fate::Drop => unchanged_prefix = false,
        }
        if out.len() >= n_r {
            break;
        }
    }

    if out.len() > n_r {
        let mut rng = stream(config.seed, &[purpose::TRIM, batch.timestep]);
        while out.len() > n_r {
            let victim = rng.gen_range(0..out.len());
            out.swap_remove(victim);
            unchanged_prefix = false;
        }
    }

    let missing = n_r - out.len();
    if missing > 0 {
        let base = out.len() as u64;
        let top_tags = [purpose::TOP_UP, g_new.version()];
        let fresh: Vec<RRSet> = (0..missing as u64)
            .into_par_iter()
            .map_init(
                || RrSampler::new(n),
                |sampler, j| {
                    sampler.sample(g_new, &mut substream(config.seed, &top_tags, base + j))
                },
            )
            .collect();
        stats.fresh = fresh.len();
        out.extend(fresh);
    }

    // The old index is still exact when every old set survived in place.
    let index = if unchanged_prefix && out.len() == old_len {
        old_index
    } else {
        InvertedIndex::build(n, &out)
    };
    let collection = RRCollection::with_index(n, out, index, g_new.version(), master_seed);
    stats.wall_time_ms = start.elapsed().as_secs_f64() * 1e3;
    Ok(MixOutcome { collection, stats })
}

fn check_versions(old: &RRCollection, g_new: &Graph, batch: &UpdateBatch) -> Result<()> {
    if old.graph_version() != batch.timestep {
        return Err(Error::Stale(format!(
            "collection was sampled at snapshot {} but the batch starts from {}",
            old.graph_version(),
            batch.timestep
        )));
    }
    if g_new.version() != batch.timestep + 1 {
        return Err(Error::Stale(format!(
            "graph is at snapshot {} but the batch produces {}",
            g_new.version(),
            batch.timestep + 1
        )));
    }
    if old.n() != g_new.n() {
        return Err(Error::Stale(
            "collection and graph differ in node count".into(),
        ));
    }
    for d in &batch.deltas {
        if g_new.weight(d.u, d.v) != Some(d.new_p) {
            return Err(Error::Stale(format!(
                "edge ({}, {}) does not carry the batch's new weight",
                d.u, d.v
            )));
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{apply_update_batch, WeightDelta};
    use crate::rr::build_collection;

    fn setup() -> (Graph, RRCollection) {
        let g =
            Graph::from_weighted_edges(5, &[(0, 2, 0.5), (1, 2, 0.5), (2, 3, 0.4), (4, 3, 0.3)])
                .unwrap();
        let c = build_collection(&g, 2000, 17).unwrap();
        (g, c)
    }

    #[test]
    fn empty_batch_is_identity() {
        let (g, c) = setup();
        let b = UpdateBatch::empty(0);
        let g1 = apply_update_batch(&g, &b).unwrap();
        let out = mix_collection(c.clone(), &g1, &b, 2000, MixConfig::default()).unwrap();
        assert_eq!(out.collection.sets(), c.sets());
        assert_eq!(out.collection.index(), c.index());
        assert_eq!(out.stats.kept, 2000);
        assert_eq!(out.stats.ratio_fast_path_hits, 2000);
        assert_eq!(out.stats.fresh + out.stats.resampled_accepted, 0);
        assert_eq!(out.collection.graph_version(), 1);
    }

    #[test]
    fn untouched_sets_survive_unmodified() {
        let (g, c) = setup();
        // only sets containing node 3 see the change
        let b = UpdateBatch::new(vec![WeightDelta::new(4, 3, 0.3, 0.6).unwrap()], 0).unwrap();
        let g1 = apply_update_batch(&g, &b).unwrap();
        let out = mix_collection(c.clone(), &g1, &b, 2000, MixConfig::default()).unwrap();
        let untouched: Vec<&RRSet> = c.sets().iter().filter(|s| !s.contains(3)).collect();
        assert_eq!(out.stats.ratio_fast_path_hits, untouched.len());
        for s in untouched {
            assert!(out.collection.sets().contains(s));
        }
        assert_eq!(out.collection.len(), 2000);
        assert_eq!(
            out.collection.index(),
            &InvertedIndex::build(5, out.collection.sets())
        );
    }

    #[test]
    fn output_size_is_exact() {
        let (g, c) = setup();
        let b = UpdateBatch::new(
            vec![
                WeightDelta::new(0, 2, 0.5, 0.25).unwrap(),
                WeightDelta::new(2, 3, 0.4, 0.8).unwrap(),
            ],
            0,
        )
        .unwrap();
        let g1 = apply_update_batch(&g, &b).unwrap();
        for n_r in [1, 500, 2000, 3500] {
            let out = mix_collection(c.clone(), &g1, &b, n_r, MixConfig::default()).unwrap();
            assert_eq!(out.collection.len(), n_r);
            assert_eq!(out.collection.target_size(), n_r);
            let s = out.stats;
            assert_eq!(s.kept + s.resampled_accepted + s.fresh, n_r);
        }
    }

    #[test]
    fn deterministic_given_seed() {
        let (g, c) = setup();
        let b = UpdateBatch::new(vec![WeightDelta::new(0, 2, 0.5, 0.25).unwrap()], 0).unwrap();
        let g1 = apply_update_batch(&g, &b).unwrap();
        let cfg = MixConfig {
            lambda: DEFAULT_LAMBDA,
            seed: 5,
        };
        let a = mix_collection(c.clone(), &g1, &b, 2000, cfg).unwrap();
        let bb = mix_collection(c, &g1, &b, 2000, cfg).unwrap();
        assert_eq!(a.collection, bb.collection);
    }

    #[test]
    fn stale_inputs_are_rejected() {
        let (g, c) = setup();
        let b = UpdateBatch::new(vec![WeightDelta::new(0, 2, 0.5, 0.25).unwrap()], 0).unwrap();
        let g1 = apply_update_batch(&g, &b).unwrap();
        // graph not advanced
        assert!(matches!(
            mix_collection(c.clone(), &g, &b, 10, MixConfig::default()),
            Err(Error::Stale(_))
        ));
        // batch from a later snapshot
        let later = UpdateBatch {
            timestep: 1,
            ..b.clone()
        };
        assert!(matches!(
            mix_collection(c.clone(), &g1, &later, 10, MixConfig::default()),
            Err(Error::Stale(_))
        ));
        assert!(mix_collection(c, &g1, &b, 10, MixConfig::default()).is_ok());
    }
}
