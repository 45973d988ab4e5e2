use thiserror::Error;

/// Errors shared by every module of the crate.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("vertex {vertex} out of range for graph with {vertex_count} vertices")]
    InvalidVertex { vertex: usize, vertex_count: usize },

    #[error("graph is disconnected ({components} components); {operation} requires a connected graph")]
    Disconnected {
        operation: &'static str,
        components: usize,
    },

    #[error("{operation} refused: {size} exceeds the configured cap of {cap}")]
    CapExceeded {
        operation: &'static str,
        size: usize,
        cap: usize,
    },

    #[error("generation failed after {attempts} attempts (best second eigenvalue seen: {best_gap:?})")]
    Generation { attempts: usize, best_gap: Option<f64> },

    #[error("walk does not converge: {0}")]
    NonConvergent(String),

    #[error("malformed graph file at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),

    #[error("JSON error: {0}")]
    Json(#[from] serde_json::Error),

    #[error("config error: {0}")]
    Config(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidArgument(msg.into())
}
