use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// An update batch or collection does not belong to the snapshot it is applied to.
    #[error("stale input: {0}")]
    Stale(String),

    #[error("brute-force oracle supports at most {max} edges, graph has {edges}")]
    Capacity { edges: usize, max: usize },

    #[error("unknown node id {0}")]
    UnknownNode(u64),

    #[error("edge ({0}, {1}) does not exist")]
    UnknownEdge(u32, u32),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
