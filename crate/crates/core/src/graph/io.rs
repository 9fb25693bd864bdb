use std::collections::HashSet;
use std::fs::File;
use std::io::{BufRead, BufReader, Read, Write};
use std::path::Path;

use super::{Graph, NodeId};
use crate::error::{Error, Result};

/// Result of parsing a SNAP edge list.
#[derive(Debug)]
pub struct EdgeListReport {
    /// Loaded topology; weights are placeholders (1.0) until a weight model is applied.
    pub graph: Graph,
    pub self_loops_dropped: usize,
    pub duplicates_collapsed: usize,
}

/// Parses whitespace-separated `u v` pairs; `#` starts a comment line.
///
/// Original ids are remapped to dense ids in ascending order of the original
/// value. Nodes that only occur on self-loop lines are kept as isolated nodes.
pub fn load_edge_list<R: Read>(source: R) -> Result<EdgeListReport> {
    let reader = BufReader::new(source);
    let mut raw: Vec<(u64, u64)> = Vec::new();
    let mut ids: Vec<u64> = Vec::new();
    let mut self_loops = 0;

    for (idx, line) in reader.lines().enumerate() {
        let line = line?;
        let line_no = idx + 1;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let mut fields = trimmed.split_whitespace();
        let (Some(a), Some(b), None) = (fields.next(), fields.next(), fields.next()) else {
            return Err(Error::Parse {
                line: line_no,
                message: format!("expected two node ids, got {trimmed:?}"),
            });
        };
        let parse = |s: &str| {
            s.parse::<u64>().map_err(|e| Error::Parse {
                line: line_no,
                message: format!("bad node id {s:?}: {e}"),
            })
        };
        let (u, v) = (parse(a)?, parse(b)?);
        ids.push(u);
        ids.push(v);
        if u == v {
            self_loops += 1;
        } else {
            raw.push((u, v));
        }
    }

    ids.sort_unstable();
    ids.dedup();
    if ids.len() > NodeId::MAX as usize {
        return Err(Error::InvalidArgument("too many nodes".into()));
    }
    let dense = |o: u64| ids.binary_search(&o).expect("id collected above") as NodeId;

    let mut seen = HashSet::with_capacity(raw.len());
    let mut edges = Vec::with_capacity(raw.len());
    for (u, v) in raw.iter().copied() {
        let e = (dense(u), dense(v));
        if seen.insert(e) {
            edges.push(e);
        }
    }
    let duplicates = raw.len() - edges.len();
    if self_loops > 0 {
        log_warning(&format!("dropped {self_loops} self-loop line(s)"));
    }

    let n = ids.len();
    Ok(EdgeListReport {
        graph: Graph::unweighted(n, &edges, ids),
        self_loops_dropped: self_loops,
        duplicates_collapsed: duplicates,
    })
}

pub fn load_edge_list_path(path: impl AsRef<Path>) -> Result<EdgeListReport> {
    load_edge_list(File::open(path)?)
}

/// Writes the graph's edges in SNAP format using original node ids.
pub fn write_edge_list<W: Write>(g: &Graph, mut out: W) -> Result<()> {
    writeln!(out, "# Nodes: {} Edges: {}", g.n(), g.edge_count())?;
    for u in 0..g.n() as NodeId {
        for &v in g.out_targets(u) {
            writeln!(out, "{}\t{}", g.original_id(u), g.original_id(v))?;
        }
    }
    out.flush()?;
    Ok(())
}

fn log_warning(msg: &str) {
    eprintln!("warning: {msg}");
}
