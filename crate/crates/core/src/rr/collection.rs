use std::io::{Read, Write};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{InvertedIndex, RRSet, RrSampler};
use crate::error::{Error, Result};
use crate::graph::{Graph, NodeId};
use crate::rng::{purpose, substream};

const FORMAT_TAG: &str = "dimp-rr-collection";
const FORMAT_VERSION: u32 = 1;

/// A fixed-size multiset of RR sets plus its node -> set index.
#[derive(Clone, Debug, PartialEq)]
pub struct RRCollection {
    n: usize,
    sets: Vec<RRSet>,
    target_size: usize,
    index: InvertedIndex,
    graph_version: u64,
    master_seed: u64,
}

impl RRCollection {
    /// Assembles a collection and builds its index. `target_size` is the size
    /// the collection is maintained at.
    pub fn from_sets(
        n: usize,
        sets: Vec<RRSet>,
        target_size: usize,
        graph_version: u64,
        master_seed: u64,
    ) -> Result<Self> {
        if let Some(bad) = sets
            .iter()
            .flat_map(|s| s.nodes())
            .find(|&&x| x as usize >= n)
        {
            return Err(Error::UnknownNode(*bad as u64));
        }
        let index = InvertedIndex::build(n, &sets);
        Ok(RRCollection {
            n,
            sets,
            target_size,
            index,
            graph_version,
            master_seed,
        })
    }

    pub(crate) fn with_index(
        n: usize,
        sets: Vec<RRSet>,
        index: InvertedIndex,
        graph_version: u64,
        master_seed: u64,
    ) -> Self {
        let target_size = sets.len();
        RRCollection {
            n,
            sets,
            target_size,
            index,
            graph_version,
            master_seed,
        }
    }

    pub(crate) fn into_parts(self) -> (Vec<RRSet>, InvertedIndex) {
        (self.sets, self.index)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn sets(&self) -> &[RRSet] {
        &self.sets
    }

    pub fn len(&self) -> usize {
        self.sets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sets.is_empty()
    }

    pub fn target_size(&self) -> usize {
        self.target_size
    }

    pub fn index(&self) -> &InvertedIndex {
        &self.index
    }

    /// Version of the graph snapshot the sets were sampled under.
    pub fn graph_version(&self) -> u64 {
        self.graph_version
    }

    pub fn master_seed(&self) -> u64 {
        self.master_seed
    }

    /// Sum of set sizes.
    pub fn total_size(&self) -> usize {
        self.index.total_entries()
    }

    pub fn coverage(&self, seeds: &[NodeId]) -> usize {
        coverage(self, seeds)
    }

    /// `n * coverage / |sets|`.
    pub fn estimate_influence(&self, seeds: &[NodeId]) -> f64 {
        estimate_influence_rr(self, seeds, self.n)
    }

    pub fn write_json<W: Write>(&self, out: W) -> Result<()> {
        let doc = StoredCollection {
            format: FORMAT_TAG.to_string(),
            version: FORMAT_VERSION,
            n: self.n,
            target_size: self.target_size,
            master_seed: self.master_seed,
            graph_version: self.graph_version,
            sets: self
                .sets
                .iter()
                .map(|s| StoredSet {
                    root: s.root(),
                    nodes: s.nodes().to_vec(),
                    parents: s.parents().to_vec(),
                })
                .collect(),
        };
        serde_json::to_writer(out, &doc)?;
        Ok(())
    }

    pub fn read_json<R: Read>(input: R) -> Result<Self> {
        let doc: StoredCollection = serde_json::from_reader(input)?;
        if doc.format != FORMAT_TAG || doc.version != FORMAT_VERSION {
            return Err(Error::InvalidArgument(format!(
                "unsupported container {} v{}",
                doc.format, doc.version
            )));
        }
        let sets = doc
            .sets
            .into_iter()
            .map(|s| {
                if s.nodes.first() != Some(&s.root) {
                    return Err(Error::InvalidArgument(format!(
                        "set root {} is not its first node",
                        s.root
                    )));
                }
                RRSet::from_parts(s.nodes, s.parents)
            })
            .collect::<Result<Vec<_>>>()?;
        RRCollection::from_sets(
            doc.n,
            sets,
            doc.target_size,
            doc.graph_version,
            doc.master_seed,
        )
    }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct StoredCollection {
    format: String,
    version: u32,
    n: usize,
    target_size: usize,
    master_seed: u64,
    graph_version: u64,
    sets: Vec<StoredSet>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct StoredSet {
    root: NodeId,
    nodes: Vec<NodeId>,
    parents: Vec<NodeId>,
}

/// Samples `n_r` independent RR sets. Set `i` draws from its own substream of
/// `master_seed`, so the result does not depend on thread scheduling.
pub fn build_collection(g: &Graph, n_r: usize, master_seed: u64) -> Result<RRCollection> {
    if n_r == 0 {
        return Err(Error::InvalidArgument(
            "collection size must be positive".into(),
        ));
    }
    if g.n() == 0 {
        return Err(Error::InvalidArgument("graph has no nodes".into()));
    }
    let tags = [purpose::BUILD, g.version()];
    let sets: Vec<RRSet> = (0..n_r as u64)
        .into_par_iter()
        .map_init(
            || RrSampler::new(g.n()),
            |sampler, i| sampler.sample(g, &mut substream(master_seed, &tags, i)),
        )
        .collect();
    RRCollection::from_sets(g.n(), sets, n_r, g.version(), master_seed)
}

/// Number of sets intersecting `seeds`, via the inverted index.
pub fn coverage(c: &RRCollection, seeds: &[NodeId]) -> usize {
    let mut covered = vec![false; c.sets.len()];
    let mut count = 0;
    for &s in seeds {
        if s as usize >= c.n {
            continue;
        }
        for &i in c.index.sets_containing(s) {
            let slot = &mut covered[i as usize];
            if !*slot {
                *slot = true;
                count += 1;
            }
        }
    }
    count
}

pub fn estimate_influence_rr(c: &RRCollection, seeds: &[NodeId], n: usize) -> f64 {
    if c.sets.is_empty() {
        return 0.0;
    }
    n as f64 * coverage(c, seeds) as f64 / c.sets.len() as f64
}
