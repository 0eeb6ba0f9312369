//! Arithmetic in the Hurwitz order and its dual lattice.

mod arith;
mod enumerate;
mod lattice;

pub use arith::{HurwitzQuaternion, Side};
pub use enumerate::{
    divisibility_counts, divisibility_counts_with, enumerate_cp, enumerate_norm, is_odd_prime,
    UnitGroup,
};
pub use lattice::{
    canonical_decompose, find_representative, is_in_s, three_squares, varpi_pow, CanonicalIndex,
    LatticeElement,
};
