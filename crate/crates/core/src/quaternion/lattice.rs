//! The dual lattice `S = (1+i) O` and the canonical decomposition
//! `beta = (1+i)^u * n * beta0` of its nonzero elements.

use std::fmt;

use num_integer::Integer;
use serde::{Deserialize, Serialize};

use super::arith::HurwitzQuaternion;
use crate::error::{Error, Result};

/// Membership in `S`: integer coordinates and even reduced norm.
pub fn is_in_s(q: &HurwitzQuaternion) -> bool {
    q.integer_coords().is_some() && q.reduced_norm() % 2 == 0
}

/// An element of the dual lattice `S`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct LatticeElement(HurwitzQuaternion);

impl LatticeElement {
    pub fn new(q: HurwitzQuaternion) -> Result<Self> {
        if is_in_s(&q) {
            Ok(Self(q))
        } else {
            Err(Error::NotInLattice(q.to_string()))
        }
    }

    pub fn quaternion(&self) -> HurwitzQuaternion {
        self.0
    }

    pub fn coords(&self) -> [i64; 4] {
        self.0
            .integer_coords()
            .expect("lattice elements have integer coordinates")
    }

    pub fn norm(&self) -> u64 {
        self.0.reduced_norm()
    }

    /// `nu = 2 (mod 4)` and coprime integer coordinates.
    pub fn is_primitive(&self) -> bool {
        self.norm() % 4 == 2 && self.coords().iter().fold(0i64, |g, x| g.gcd(x)) == 1
    }
}

impl fmt::Display for LatticeElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

impl std::str::FromStr for LatticeElement {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Self::new(s.parse()?)
    }
}

/// The invariants `(K, u, n)` labelling a Fourier coefficient.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct CanonicalIndex {
    #[serde(rename = "K")]
    pub k: u64,
    pub u: u32,
    pub n: u64,
}

impl fmt::Display for CanonicalIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{},{})", self.k, self.u, self.n)
    }
}

impl CanonicalIndex {
    pub const fn new(k: u64, u: u32, n: u64) -> Self {
        Self { k, u, n }
    }

    /// The norm of the primitive part, `K / (2^u n^2)`, when that is an integer.
    pub fn primitive_norm(&self) -> Option<u64> {
        if self.n == 0 || self.u >= 63 {
            return None;
        }
        let denom = (1u64 << self.u).checked_mul(self.n.checked_mul(self.n)?)?;
        if self.k == 0 || self.k % denom != 0 {
            return None;
        }
        Some(self.k / denom)
    }

    /// True exactly when some element of `S` carries this index.
    pub fn is_valid(&self) -> bool {
        self.n % 2 == 1 && matches!(self.primitive_norm(), Some(m) if m % 4 == 2)
    }

    /// The unique valid index with norm `k` and odd content `n`, if any.
    pub fn from_norm(k: u64, n: u64) -> Option<Self> {
        if k == 0 || k % 2 == 1 || n % 2 == 0 {
            return None;
        }
        let idx = Self::new(k, k.trailing_zeros() - 1, n);
        idx.is_valid().then_some(idx)
    }

    /// All valid indices with `K <= k_max`, sorted by `(K, u, n)`.
    pub fn all_up_to(k_max: u64) -> Vec<Self> {
        let mut out = Vec::new();
        for k in (2..=k_max).step_by(2) {
            let u = k.trailing_zeros() - 1;
            let odd = k >> (u + 1);
            let mut n = 1u64;
            while n * n <= odd {
                if odd % (n * n) == 0 {
                    out.push(Self::new(k, u, n));
                }
                n += 2;
            }
        }
        out
    }
}

/// Writes a nonzero `beta in S` as `(1+i)^u * n * beta0` with `beta0` primitive.
///
/// The odd content `n` is split off first, then `(1-i)/2` is applied on the
/// left until the norm is `2 (mod 4)`.
pub fn canonical_decompose(q: &LatticeElement) -> Result<(CanonicalIndex, LatticeElement)> {
    let beta = q.quaternion();
    if beta.is_zero() {
        return Err(Error::ZeroElement);
    }
    let k = beta.reduced_norm();
    let g = q.coords().iter().fold(0i64, |g, x| g.gcd(x)) as u64;
    let n = g >> g.trailing_zeros();
    let mut cur = beta.div_scalar(n as i64).expect("odd content divides");
    let mut u = 0u32;
    while cur.reduced_norm() % 4 == 0 {
        cur = cur
            .div_exact(&HurwitzQuaternion::VARPI, super::Side::Left)
            .expect("elements of S with norm divisible by 4 are left-divisible by 1+i");
        u += 1;
    }
    let beta0 = LatticeElement::new(cur)?;
    debug_assert!(beta0.is_primitive());
    Ok((CanonicalIndex::new(k, u, n), beta0))
}

/// First `(x, y, z)` with `x >= y >= z >= 0`, `x^2 + y^2 + z^2 = target` and
/// not all of `x, y, z` odd, scanning `z` then `y` upwards.
pub fn three_squares(target: u64) -> Option<(u64, u64, u64)> {
    let mut z = 0u64;
    while 3 * z * z <= target {
        let mut y = z;
        while z * z + 2 * y * y <= target {
            let rest = target - z * z - y * y;
            let x = rest.isqrt();
            if x * x == rest && !(x % 2 == 1 && y % 2 == 1 && z % 2 == 1) {
                return Some((x, y, z));
            }
            y += 1;
        }
        z += 1;
    }
    None
}

/// Left power of the uniformizer.
pub fn varpi_pow(u: u32) -> HurwitzQuaternion {
    (0..u).fold(HurwitzQuaternion::ONE, |acc, _| {
        HurwitzQuaternion::VARPI * acc
    })
}

/// A deterministic element of `S` carrying the given index.
///
/// The primitive part is `x + y i + z j + k` from a three-square
/// representation of `m - 1`, where `m = K / (2^u n^2)`.
pub fn find_representative(index: &CanonicalIndex) -> Result<LatticeElement> {
    if !index.is_valid() {
        return Err(Error::InvalidIndex(*index));
    }
    let m = index.primitive_norm().expect("valid index");
    let (x, y, z) = three_squares(m - 1).ok_or(Error::InvalidIndex(*index))?;
    let beta0 = HurwitzQuaternion::from_integer(x as i64, y as i64, z as i64, 1);
    let beta = varpi_pow(index.u) * beta0.scale(index.n as i64);
    LatticeElement::new(beta)
}
