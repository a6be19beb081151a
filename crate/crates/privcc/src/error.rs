//! Error type shared across the crate.

use crate::polytope::LpCertificate;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// A line of an edge-list file could not be parsed.
    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    /// A vertex id fell outside `[0, n)`.
    #[error("vertex {id} out of range for a graph on {n} vertices")]
    VertexRange { id: usize, n: usize },

    /// An argument violated a stated parameter range (e.g. a non-positive scale).
    #[error("invalid parameter: {0}")]
    Parameter(String),

    /// The instance is too large for an exact/exponential-time routine.
    #[error("instance exceeds capacity: {0}")]
    Capacity(String),

    /// A caller-side precondition did not hold and the computation cannot proceed.
    #[error("contract violation: {0}")]
    ContractViolation(String),

    /// The linear program was malformed, infeasible, or unbounded.
    #[error("linear program error: {0}")]
    LpStructure(String),

    /// The cutting-plane loop hit its iteration cap; carries the last certificate.
    #[error("cutting-plane loop exceeded {max_iters} iterations")]
    Convergence {
        max_iters: usize,
        last: Box<LpCertificate>,
    },
}

pub type Result<T> = std::result::Result<T, Error>;
