//! Hurwitz quaternions in doubled coordinates.
//!
//! An element `(a + b i + c j + d k) / 2` of the rational quaternion algebra
//! with `i^2 = j^2 = -1`, `ij = -ji = k` is stored as the integer vector
//! `[a, b, c, d]`. It lies in the Hurwitz order exactly when the four entries
//! share a parity.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::str::FromStr;

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct HurwitzQuaternion {
    dc: [i64; 4],
}

/// Which side a divisor or multiplier acts on.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Side {
    Left,
    Right,
}

/// Hamilton product on raw coordinate vectors.
pub(crate) fn hamilton(x: [i64; 4], y: [i64; 4]) -> [i64; 4] {
    let [a1, b1, c1, d1] = x;
    let [a2, b2, c2, d2] = y;
    [
        a1 * a2 - b1 * b2 - c1 * c2 - d1 * d2,
        a1 * b2 + b1 * a2 + c1 * d2 - d1 * c2,
        a1 * c2 - b1 * d2 + c1 * a2 + d1 * b2,
        a1 * d2 + b1 * c2 - c1 * b2 + d1 * a2,
    ]
}

impl HurwitzQuaternion {
    pub const ZERO: Self = Self { dc: [0; 4] };
    pub const ONE: Self = Self { dc: [2, 0, 0, 0] };
    pub const I: Self = Self { dc: [0, 2, 0, 0] };
    pub const J: Self = Self { dc: [0, 0, 2, 0] };
    pub const K: Self = Self { dc: [0, 0, 0, 2] };
    /// The uniformizer `1 + i` at 2.
    pub const VARPI: Self = Self { dc: [2, 2, 0, 0] };

    /// Builds an element from doubled coordinates, rejecting mixed parity.
    pub fn from_doubled(dc: [i64; 4]) -> Result<Self> {
        let p = dc[0].rem_euclid(2);
        if dc.iter().all(|x| x.rem_euclid(2) == p) {
            Ok(Self { dc })
        } else {
            Err(Error::Parse(format!(
                "doubled coordinates {dc:?} mix parities and are not in the Hurwitz order"
            )))
        }
    }

    /// Builds `x + y i + z j + w k` from integer coordinates.
    pub fn from_integer(x: i64, y: i64, z: i64, w: i64) -> Self {
        Self {
            dc: [2 * x, 2 * y, 2 * z, 2 * w],
        }
    }

    pub fn scalar(s: i64) -> Self {
        Self::from_integer(s, 0, 0, 0)
    }

    pub fn doubled(&self) -> [i64; 4] {
        self.dc
    }

    /// Integer coordinates, or `None` when the element has half-integer coordinates.
    pub fn integer_coords(&self) -> Option<[i64; 4]> {
        if self.dc[0].rem_euclid(2) == 0 {
            Some(self.dc.map(|x| x / 2))
        } else {
            None
        }
    }

    pub fn is_zero(&self) -> bool {
        self.dc == [0; 4]
    }

    pub fn conjugate(&self) -> Self {
        let [a, b, c, d] = self.dc;
        Self {
            dc: [a, -b, -c, -d],
        }
    }

    /// Reduced norm `x * conj(x)`.
    pub fn reduced_norm(&self) -> u64 {
        let s: i64 = self.dc.iter().map(|x| x * x).sum();
        debug_assert_eq!(s % 4, 0);
        (s / 4) as u64
    }

    /// Reduced trace `x + conj(x)`.
    pub fn reduced_trace(&self) -> i64 {
        self.dc[0]
    }

    pub fn scale(&self, s: i64) -> Self {
        Self {
            dc: self.dc.map(|x| x * s),
        }
    }

    /// Exact division by a rational integer; `None` when the quotient leaves the order.
    pub fn div_scalar(&self, s: i64) -> Option<Self> {
        assert!(s != 0, "division by zero");
        if self.dc.iter().any(|x| x % s != 0) {
            return None;
        }
        Self::from_doubled(self.dc.map(|x| x / s)).ok()
    }

    /// Exact division by a nonzero quaternion on the given side.
    ///
    /// `Left` computes `by^-1 * self`, `Right` computes `self * by^-1`. Returns
    /// `None` when the quotient is not in the Hurwitz order.
    pub fn div_exact(&self, by: &Self, side: Side) -> Option<Self> {
        assert!(!by.is_zero(), "division by zero quaternion");
        let numer = match side {
            Side::Left => by.conjugate() * *self,
            Side::Right => *self * by.conjugate(),
        };
        numer.div_scalar(by.reduced_norm() as i64)
    }
}

impl Add for HurwitzQuaternion {
    type Output = Self;
    fn add(self, rhs: Self) -> Self {
        Self {
            dc: [
                self.dc[0] + rhs.dc[0],
                self.dc[1] + rhs.dc[1],
                self.dc[2] + rhs.dc[2],
                self.dc[3] + rhs.dc[3],
            ],
        }
    }
}

impl Sub for HurwitzQuaternion {
    type Output = Self;
    fn sub(self, rhs: Self) -> Self {
        self + (-rhs)
    }
}

impl Neg for HurwitzQuaternion {
    type Output = Self;
    fn neg(self) -> Self {
        Self {
            dc: self.dc.map(|x| -x),
        }
    }
}

impl Mul for HurwitzQuaternion {
    type Output = Self;
    fn mul(self, rhs: Self) -> Self {
        let h = hamilton(self.dc, rhs.dc);
        debug_assert!(h.iter().all(|x| x % 2 == 0));
        Self {
            dc: h.map(|x| x / 2),
        }
    }
}

impl fmt::Display for HurwitzQuaternion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for (x, unit) in self.dc.iter().zip(["", "i", "j", "k"]) {
            if *x == 0 {
                continue;
            }
            let sign = if *x < 0 {
                "-"
            } else if first {
                ""
            } else {
                "+"
            };
            let mag = x.unsigned_abs();
            let coef = if mag % 2 == 0 {
                let m = mag / 2;
                if m == 1 && !unit.is_empty() {
                    String::new()
                } else {
                    m.to_string()
                }
            } else {
                format!("{mag}/2")
            };
            write!(f, "{sign}{coef}{unit}")?;
            first = false;
        }
        Ok(())
    }
}

/// Parses `2*q` for a rational coefficient string, requiring the result to be an integer.
fn doubled_coefficient(s: &str) -> Result<i64> {
    let bad = || Error::Parse(format!("bad coefficient '{s}'"));
    let (num, den) = match s.split_once('/') {
        Some((n, d)) => (
            n.trim().parse::<i64>().map_err(|_| bad())?,
            d.trim().parse::<i64>().map_err(|_| bad())?,
        ),
        None => (s.trim().parse::<i64>().map_err(|_| bad())?, 1),
    };
    if den <= 0 || (2 * num) % den != 0 {
        return Err(Error::Parse(format!(
            "coefficient '{s}' is not a multiple of 1/2"
        )));
    }
    Ok(2 * num / den)
}

impl FromStr for HurwitzQuaternion {
    type Err = Error;

    /// Accepts `a+bi+cj+dk` (with `ij` as a synonym for `k`, rational
    /// coefficients such as `1/2`) or a 4-tuple `(a,b,c,d)` / `[a,b,c,d]`.
    fn from_str(s: &str) -> Result<Self> {
        let s: String = s.chars().filter(|c| !c.is_whitespace()).collect();
        if s.is_empty() {
            return Err(Error::Parse("empty quaternion".into()));
        }
        if let Some(inner) = s
            .strip_prefix('(')
            .and_then(|t| t.strip_suffix(')'))
            .or_else(|| s.strip_prefix('[').and_then(|t| t.strip_suffix(']')))
        {
            let parts: Vec<&str> = inner.split(',').collect();
            if parts.len() != 4 {
                return Err(Error::Parse(format!("tuple '{s}' needs 4 entries")));
            }
            let mut dc = [0i64; 4];
            for (slot, p) in dc.iter_mut().zip(&parts) {
                *slot = doubled_coefficient(p.trim_matches('"'))?;
            }
            return Self::from_doubled(dc);
        }

        let mut dc = [0i64; 4];
        let mut terms = Vec::new();
        let mut start = 0;
        let bytes = s.as_bytes();
        for idx in 1..bytes.len() {
            if (bytes[idx] == b'+' || bytes[idx] == b'-') && bytes[idx - 1] != b'/' {
                terms.push(&s[start..idx]);
                start = idx;
            }
        }
        terms.push(&s[start..]);
        for term in terms {
            let (coef, slot) = if let Some(c) = term.strip_suffix("ij") {
                (c, 3)
            } else if let Some(c) = term.strip_suffix('k') {
                (c, 3)
            } else if let Some(c) = term.strip_suffix('i') {
                (c, 1)
            } else if let Some(c) = term.strip_suffix('j') {
                (c, 2)
            } else {
                (term, 0)
            };
            let coef = coef.strip_suffix('*').unwrap_or(coef);
            let value = match coef {
                "" | "+" if slot != 0 => 2,
                "-" if slot != 0 => -2,
                c => doubled_coefficient(c.strip_prefix('+').unwrap_or(c))?,
            };
            dc[slot] += value;
        }
        Self::from_doubled(dc)
    }
}
