//! Random walks on finite graphs: generators for the recursive expander
//! construction, exact and sampled walk statistics, CKR-style random
//! partitions with their embeddings, and the scale-selection machinery used
//! to bound walk speed.

pub mod embed;
pub mod error;
pub mod experiments;
pub mod generators;
pub mod graph;
pub mod io;
pub mod rng;
pub mod scales;
pub mod stats;
pub mod walk;

pub use error::{Error, Result};
pub use graph::{Graph, RootedGraph, VertexSubset};
