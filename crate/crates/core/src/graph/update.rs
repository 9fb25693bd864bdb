use std::collections::{BTreeSet, HashSet};
use std::io::{Read, Write};

use rand::seq::index;
use rand::Rng;

use super::{check_probability, Graph, NodeId};
use crate::error::{Error, Result};

/// A single edge-weight change between consecutive snapshots.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct WeightDelta {
    pub u: NodeId,
    pub v: NodeId,
    pub old_p: f64,
    pub new_p: f64,
    /// Set when a doubling was cut off at 1.0.
    pub clamped: bool,
}

impl WeightDelta {
    pub fn new(u: NodeId, v: NodeId, old_p: f64, new_p: f64) -> Result<Self> {
        check_probability(old_p)?;
        check_probability(new_p)?;
        if old_p == new_p {
            return Err(Error::InvalidArgument(format!(
                "delta on ({u}, {v}) does not change the weight"
            )));
        }
        let clamped = new_p == 1.0 && old_p > 0.5;
        Ok(WeightDelta {
            u,
            v,
            old_p,
            new_p,
            clamped,
        })
    }
}

/// Edge-weight changes generated against snapshot `timestep`.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct UpdateBatch {
    pub deltas: Vec<WeightDelta>,
    pub timestep: u64,
}

impl UpdateBatch {
    pub fn new(deltas: Vec<WeightDelta>, timestep: u64) -> Result<Self> {
        let mut seen = HashSet::with_capacity(deltas.len());
        for d in &deltas {
            if !seen.insert((d.u, d.v)) {
                return Err(Error::InvalidArgument(format!(
                    "edge ({}, {}) appears twice in one batch",
                    d.u, d.v
                )));
            }
        }
        Ok(UpdateBatch { deltas, timestep })
    }

    pub fn empty(timestep: u64) -> Self {
        UpdateBatch {
            deltas: Vec::new(),
            timestep,
        }
    }

    pub fn len(&self) -> usize {
        self.deltas.len()
    }

    pub fn is_empty(&self) -> bool {
        self.deltas.is_empty()
    }

    /// The batch undoing this one, applicable to the snapshot this one produces.
    pub fn inverse(&self) -> UpdateBatch {
        UpdateBatch {
            deltas: self
                .deltas
                .iter()
                .map(|d| WeightDelta {
                    u: d.u,
                    v: d.v,
                    old_p: d.new_p,
                    new_p: d.old_p,
                    clamped: false,
                })
                .collect(),
            timestep: self.timestep + 1,
        }
    }
}

/// Picks `count` distinct edges uniformly and doubles or halves each weight.
///
/// Doubling clamps at 1.0. An edge already at 1.0 cannot grow, so it is halved.
pub fn generate_random_updates<R: Rng + ?Sized>(
    g: &Graph,
    count: usize,
    rng: &mut R,
) -> Result<UpdateBatch> {
    let m = g.edge_count();
    if count > m {
        return Err(Error::InvalidArgument(format!(
            "requested {count} updates but the graph has {m} edges"
        )));
    }
    let chosen = index::sample(rng, m, count);
    let mut deltas = Vec::with_capacity(count);
    for eid in chosen.iter() {
        let (u, v) = g.edge_endpoints(eid);
        let old_p = g.weights()[eid];
        let double = rng.gen_bool(0.5);
        let new_p = if double && old_p < 1.0 {
            (old_p * 2.0).min(1.0)
        } else {
            old_p / 2.0
        };
        deltas.push(WeightDelta::new(u, v, old_p, new_p)?);
    }
    UpdateBatch::new(deltas, g.version())
}

/// Produces the next snapshot. Fails with [`Error::Stale`] when the batch was
/// generated against a different snapshot.
pub fn apply_update_batch(g: &Graph, batch: &UpdateBatch) -> Result<Graph> {
    if batch.timestep != g.version() {
        return Err(Error::Stale(format!(
            "batch targets snapshot {} but graph is at {}",
            batch.timestep,
            g.version()
        )));
    }
    let mut weights = g.weights().to_vec();
    for d in &batch.deltas {
        let eid = g.edge_id(d.u, d.v).ok_or(Error::UnknownEdge(d.u, d.v))?;
        if weights[eid] != d.old_p {
            return Err(Error::Stale(format!(
                "edge ({}, {}) has weight {} but the batch expects {}",
                d.u, d.v, weights[eid], d.old_p
            )));
        }
        weights[eid] = d.new_p;
    }
    Ok(g.with_weights(weights, g.version() + 1))
}

pub fn changed_source_nodes(batch: &UpdateBatch) -> BTreeSet<NodeId> {
    batch.deltas.iter().map(|d| d.u).collect()
}

/// Nodes whose in-edges changed; these are the nodes whose dead-edge factor moves.
pub fn changed_target_nodes(batch: &UpdateBatch) -> BTreeSet<NodeId> {
    batch.deltas.iter().map(|d| d.v).collect()
}

/// Writes `u,v,old_p,new_p` rows using the graph's original node ids.
pub fn write_batch_csv<W: Write>(g: &Graph, batch: &UpdateBatch, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["u", "v", "old_p", "new_p"])?;
    for d in &batch.deltas {
        w.write_record([
            g.original_id(d.u).to_string(),
            g.original_id(d.v).to_string(),
            d.old_p.to_string(),
            d.new_p.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Reads a batch file written for `g`; the batch is tagged with `g`'s version.
pub fn read_batch_csv<R: Read>(g: &Graph, input: R) -> Result<UpdateBatch> {
    let mut rdr = csv::Reader::from_reader(input);
    let headers = rdr.headers()?.clone();
    if headers.iter().collect::<Vec<_>>() != ["u", "v", "old_p", "new_p"] {
        return Err(Error::Parse {
            line: 1,
            message: format!("expected header u,v,old_p,new_p, got {headers:?}"),
        });
    }
    let mut deltas = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec?;
        let line = i + 2;
        let field = |k: usize| -> Result<&str> {
            rec.get(k).ok_or_else(|| Error::Parse {
                line,
                message: "missing column".into(),
            })
        };
        let bad = |what: &str| Error::Parse {
            line,
            message: format!("bad {what}"),
        };
        let ou: u64 = field(0)?.trim().parse().map_err(|_| bad("u"))?;
        let ov: u64 = field(1)?.trim().parse().map_err(|_| bad("v"))?;
        let old_p: f64 = field(2)?.trim().parse().map_err(|_| bad("old_p"))?;
        let new_p: f64 = field(3)?.trim().parse().map_err(|_| bad("new_p"))?;
        let u = g.node_by_original(ou).ok_or(Error::UnknownNode(ou))?;
        let v = g.node_by_original(ov).ok_or(Error::UnknownNode(ov))?;
        if g.edge_id(u, v).is_none() {
            return Err(Error::UnknownEdge(u, v));
        }
        deltas.push(WeightDelta::new(u, v, old_p, new_p)?);
    }
    UpdateBatch::new(deltas, g.version())
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn g() -> Graph {
        Graph::from_weighted_edges(
            4,
            &[
                (0, 1, 0.5),
                (2, 1, 0.5),
                (1, 3, 0.8),
                (0, 3, 1.0),
                (3, 0, 0.3),
            ],
        )
        .unwrap()
    }

    #[test]
    fn update_rule() {
        let g = g();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..50 {
            let b = generate_random_updates(&g, 5, &mut rng).unwrap();
            assert_eq!(b.len(), 5);
            for d in &b.deltas {
                let allowed: &[f64] = if d.old_p == 0.5 {
                    &[1.0, 0.25]
                } else if d.old_p == 0.8 {
                    &[1.0, 0.4]
                } else if d.old_p == 1.0 {
                    &[0.5]
                } else if d.old_p == 0.3 {
                    &[0.6, 0.15]
                } else {
                    &[]
                };
                let ok = allowed.contains(&d.new_p);
                assert!(ok, "{d:?}");
                assert_eq!(d.clamped, d.old_p == 0.8 && d.new_p == 1.0);
            }
        }
        assert!(generate_random_updates(&g, 6, &mut rng).is_err());
    }

    #[test]
    fn apply_and_staleness() {
        let g = g();
        let same = apply_update_batch(&g, &UpdateBatch::empty(0)).unwrap();
        assert_eq!(same.weights(), g.weights());
        assert_eq!(same.version(), 1);

        let b = UpdateBatch::new(vec![WeightDelta::new(0, 1, 0.5, 0.25).unwrap()], 0).unwrap();
        let g1 = apply_update_batch(&g, &b).unwrap();
        assert_eq!(g1.weight(0, 1), Some(0.25));
        assert_eq!(g1.weight(2, 1), Some(0.5));
        assert_eq!(g.weight(0, 1), Some(0.5));
        assert!(g1.shares_topology(&g));

        let stale = UpdateBatch::new(vec![WeightDelta::new(0, 1, 0.4, 0.2).unwrap()], 0).unwrap();
        assert!(matches!(
            apply_update_batch(&g, &stale),
            Err(Error::Stale(_))
        ));
        assert!(matches!(apply_update_batch(&g1, &b), Err(Error::Stale(_))));

        let back = apply_update_batch(&g1, &b.inverse()).unwrap();
        assert_eq!(back.weights(), g.weights());
    }

    #[test]
    fn batch_invariants() {
        assert!(WeightDelta::new(0, 1, 0.5, 0.5).is_err());
        assert!(WeightDelta::new(0, 1, 0.5, 0.0).is_err());
        let d = WeightDelta::new(0, 1, 0.5, 0.25).unwrap();
        assert!(UpdateBatch::new(vec![d, d], 0).is_err());
    }

    #[test]
    fn changed_sources() {
        let mk = |pairs: &[(NodeId, NodeId)]| {
            UpdateBatch::new(
                pairs
                    .iter()
                    .map(|&(u, v)| WeightDelta::new(u, v, 0.5, 0.25).unwrap())
                    .collect(),
                0,
            )
            .unwrap()
        };
        assert_eq!(
            changed_source_nodes(&mk(&[(3, 7), (3, 9)])),
            BTreeSet::from([3])
        );
        assert!(changed_source_nodes(&mk(&[])).is_empty());
        assert_eq!(
            changed_source_nodes(&mk(&[(1, 2), (4, 2)])),
            BTreeSet::from([1, 4])
        );
        assert_eq!(
            changed_target_nodes(&mk(&[(1, 2), (4, 2)])),
            BTreeSet::from([2])
        );
    }

    #[test]
    fn csv_round_trip_is_exact() {
        let g = g();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let b = generate_random_updates(&g, 5, &mut rng).unwrap();
        let mut buf = Vec::new();
        write_batch_csv(&g, &b, &mut buf).unwrap();
        assert!(buf.starts_with(b"u,v,old_p,new_p\n"));
        let back = read_batch_csv(&g, buf.as_slice()).unwrap();
        assert_eq!(back, b);
    }
}
