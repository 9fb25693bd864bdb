//! Reverse-reachable (RR) set machinery for influence maximization on graphs
//! whose edge weights change in batches.
//!
//! * [`graph`]: CSR graph snapshots, SNAP loading, weighted-cascade weights and
//!   update batches.
//! * [`rr`]: RR-set sampling, collections with an inverted index, RR-based
//!   influence estimates.
//! * [`mixing`]: carrying a collection across an update batch by probability
//!   ratio reuse and regrowth of rejected sets.
//! * [`select`]: greedy max-coverage seed selection and sample-size policies.
//! * [`oracle`]: Monte Carlo and exact enumeration references.

pub mod error;
pub mod graph;
pub mod mixing;
pub mod oracle;
pub mod rng;
pub mod rr;
pub mod select;

pub use error::{Error, Result};
pub use graph::{Graph, NodeId, UpdateBatch, WeightDelta};
pub use mixing::{mix_collection, MixConfig, MixOutcome, MixStats};
pub use oracle::{InfluenceEstimate, SeedSet};
pub use rr::{RRCollection, RRSet};
pub use select::{greedy_select, SampleSizePolicy, SelectionResult};
