use thiserror::Error;

/// Errors shared by every engine in the crate.
#[derive(Debug, Clone, Error)]
pub enum Error {
    /// Expression source failed to tokenize or parse.
    #[error("parse error at byte {offset}: {message}")]
    Parse { offset: usize, message: String },

    /// A p-box or objective specification is structurally invalid.
    #[error("malformed spec: {0}")]
    MalformedSpec(String),

    /// Argument outside its documented domain (e.g. gamma not in [0,1]).
    #[error("domain error: {0}")]
    Domain(String),

    /// Root finding was asked to work on a bracket without a sign change.
    #[error("bracket error: {0}")]
    Bracket(String),

    /// Sampled slopes do not match the declared or detected shape.
    #[error("shape detection error: {0}")]
    ShapeDetection(String),

    /// Inner random-set discretization has empty focal cells.
    #[error("inconsistent inner discretization: {0}")]
    InconsistentInner(String),

    /// Linear program has no feasible point.
    #[error("infeasible program: {0}")]
    Infeasible(String),

    /// Linear program is unbounded (degenerate point placement).
    #[error("unbounded program: {0}")]
    Unbounded(String),

    /// Conditioning event has lower probability zero or clips every focal element.
    #[error("event error: {0}")]
    Event(String),

    /// Assembled extremizing distribution violates its own invariants.
    #[error("internal consistency error: {0}")]
    InternalConsistency(String),
}

pub type Result<T> = std::result::Result<T, Error>;
