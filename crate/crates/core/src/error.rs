use thiserror::Error;

use crate::quaternion::CanonicalIndex;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("zero element has no canonical decomposition")]
    ZeroElement,

    #[error("element {0} is not in the dual lattice S")]
    NotInLattice(String),

    #[error("element {0} is not primitive")]
    NotPrimitive(String),

    #[error("{0} is not an odd prime")]
    NotOddPrime(u64),

    #[error("invalid canonical index {0}: no representative exists")]
    InvalidIndex(CanonicalIndex),

    #[error("index needs K = {needed} but the table only reaches K_max = {k_max}")]
    OutOfBounds { needed: u64, k_max: u64 },

    #[error("table has no entry at valid index {0}")]
    MissingEntry(CanonicalIndex),

    #[error("unassigned symbol {0}")]
    UnassignedSymbol(u64),

    #[error("no Hecke eigenvalue supplied for prime {0}")]
    MissingLambda(u64),

    #[error("no usable index to extract lambda_{0}")]
    NoUsableIndex(u64),

    #[error(
        "lambda_{prime} estimates disagree: spread {spread:e} exceeds tolerance {tolerance:e}"
    )]
    Inconsistent {
        prime: u64,
        spread: f64,
        tolerance: f64,
    },

    #[error("descriptor input does not match the place: {0}")]
    MismatchedDescriptor(String),

    #[error("invalid operator: {0}")]
    InvalidOperator(String),

    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
