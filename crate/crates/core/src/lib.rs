//! Randomized algorithms for arbitrarily oriented Hamilton cycles in
//! random digraphs: path embedding with online edge exposure, two-stage
//! edge-disjoint cycle packing, importance-sampled cycle counting with
//! exact small-instance oracles, and the concentration bounds used to
//! reason about all of them.

pub mod bits;
pub mod complete;
pub mod count;
pub mod embed;
pub mod graph;
pub mod orient;
pub mod pack;
pub mod randgen;
pub mod rng;
pub mod stats;

pub use graph::Digraph;
pub use orient::{Orientation, OrientedCycle, OrientedPath, Sign};

/// Errors shared across the library's modules.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// Structurally invalid input (length mismatches, repeated vertices,
    /// bad characters).
    #[error("malformed input: {0}")]
    Malformed(String),
    /// Arguments outside an operation's domain.
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    /// Text-format parsing failure, with a 1-based line number.
    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },
    /// The instance exceeds a solver's hard cap.
    #[error("instance too large: {0}")]
    TooLarge(String),
}
