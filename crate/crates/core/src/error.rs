//! Crate-wide error type.

use thiserror::Error;

#[derive(Error, Debug)]
pub enum Error {
    /// An element payload does not belong to the poset family (wrong arity,
    /// negative coordinate, unknown symbol, not a member of the cone, ...).
    #[error("invalid element encoding: {0}")]
    InvalidElement(String),

    /// The declared structure is not a valid poset (cycle in a cover DAG,
    /// transitive edge declared as a cover, bad generator set, ...).
    #[error("invalid poset: {0}")]
    InvalidPoset(String),

    /// A configured budget was exhausted (memo entries, enumeration size,
    /// down-closure nodes, path cap). Never silently truncated.
    #[error("budget exceeded: {0}")]
    Budget(String),

    /// An argument is outside the mathematical domain of the operation
    /// (MGF evaluated at u >= lambda_-, negative time, u outside (0,1), ...).
    #[error("domain violation: {0}")]
    Domain(String),

    /// A structural precondition failed (element not in the maximal
    /// antichain, site not a growth site, empty operand, ...).
    #[error("precondition violated: {0}")]
    Precondition(String),

    /// A coupled dominance run observed a per-replica order violation,
    /// which signals a bug in the declared sampler pair.
    #[error("coupling violation: {0}")]
    CouplingViolation(String),

    /// Bad experiment configuration (schema-level problem).
    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("serialization error: {0}")]
    Serde(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
