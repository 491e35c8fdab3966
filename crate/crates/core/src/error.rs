use thiserror::Error;

/// Everything that can go wrong in this crate.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("invalid chain context: {0}")]
    InvalidContext(String),
    #[error("image {value} at position {position} is not in Y")]
    RangeViolation { position: usize, value: usize },
    #[error("expected {expected} values, got {actual}")]
    LengthMismatch { expected: usize, actual: usize },
    #[error("operands live in different chain contexts")]
    ContextMismatch,
    #[error("invalid partition: {0}")]
    InvalidPartition(String),
    #[error("no partition family member with {blocks} blocks on {n} points (arity out of range)")]
    InvalidArity { n: usize, blocks: usize },
    #[error("arithmetic overflow computing {0}")]
    Overflow(String),
    #[error("cannot refine {partition} as requested: {reason}")]
    InfeasibleRefinement { partition: String, reason: String },
    #[error("partition {0} does not belong to the required family")]
    WrongClass(String),
    #[error("hypothesis violated: {0}")]
    HypothesisViolation(String),
    #[error("{0} is not orientation-preserving")]
    ElementNotInOP(String),
    #[error("permutation {0} is not in the generated subgroup")]
    NotInSubgroup(String),
    #[error("no recorded transformation restricts to {0}")]
    UnknownRestriction(String),
    #[error("budget exceeded: {0}")]
    BudgetExceeded(String),
    #[error("no relative generating set of size <= {0} found")]
    NoWitnessWithinBound(usize),
    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
