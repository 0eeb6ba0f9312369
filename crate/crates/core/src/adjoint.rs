//! Exact matrix identities relating each double coset to its adjoint:
//! `w z h^-1 w` is again one of the generators.

use std::ops::{Add, Mul};

use num_traits::{One, Zero};
use serde::Serialize;

use crate::coeff::{rat, Rational};
use crate::quaternion::HurwitzQuaternion;

pub type Matrix4 = [[Rational; 4]; 4];

fn diag4(d: [i64; 4]) -> Matrix4 {
    std::array::from_fn(|r| {
        std::array::from_fn(|c| {
            if r == c {
                rat(d[r], 1)
            } else {
                Rational::zero()
            }
        })
    })
}

/// `h2 = diag(p,p,p,1)`, `h3 = diag(p,p,1,1)`, `h4 = diag(p,1,1,1)`.
pub fn generator(which: u8, p: i64) -> Matrix4 {
    match which {
        2 => diag4([p, p, p, 1]),
        3 => diag4([p, p, 1, 1]),
        4 => diag4([p, 1, 1, 1]),
        _ => panic!("no generator h{which}"),
    }
}

/// The antidiagonal permutation.
pub fn antidiagonal4() -> Matrix4 {
    std::array::from_fn(|r| {
        std::array::from_fn(|c| {
            if r + c == 3 {
                Rational::one()
            } else {
                Rational::zero()
            }
        })
    })
}

pub fn mat_mul4(a: &Matrix4, b: &Matrix4) -> Matrix4 {
    std::array::from_fn(|r| {
        std::array::from_fn(|c| (0..4).fold(Rational::zero(), |acc, k| acc + &a[r][k] * &b[k][c]))
    })
}

/// Inverse by Gauss-Jordan elimination over the rationals; `None` if singular.
pub fn mat_inv4(a: &Matrix4) -> Option<Matrix4> {
    let mut m = a.clone();
    let mut inv = diag4([1, 1, 1, 1]);
    for col in 0..4 {
        let pivot = (col..4).find(|&r| !m[r][col].is_zero())?;
        m.swap(col, pivot);
        inv.swap(col, pivot);
        let scale = m[col][col].recip();
        for c in 0..4 {
            m[col][c] = &m[col][c] * &scale;
            inv[col][c] = &inv[col][c] * &scale;
        }
        for r in 0..4 {
            if r != col && !m[r][col].is_zero() {
                let f = m[r][col].clone();
                for c in 0..4 {
                    m[r][c] = &m[r][c] - &f * &m[col][c];
                    inv[r][c] = &inv[r][c] - &f * &inv[col][c];
                }
            }
        }
    }
    Some(inv)
}

/// A quaternion with rational coordinates in the basis `1, i, j, ij`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RationalQuaternion(pub [Rational; 4]);

impl RationalQuaternion {
    pub fn zero() -> Self {
        Self(std::array::from_fn(|_| Rational::zero()))
    }

    pub fn one() -> Self {
        Self::from(HurwitzQuaternion::ONE)
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|x| x.is_zero())
    }

    pub fn norm(&self) -> Rational {
        self.0.iter().fold(Rational::zero(), |acc, x| acc + x * x)
    }

    pub fn conjugate(&self) -> Self {
        let [a, b, c, d] = &self.0;
        Self([a.clone(), -b.clone(), -c.clone(), -d.clone()])
    }

    pub fn inverse(&self) -> Option<Self> {
        if self.is_zero() {
            return None;
        }
        let n = self.norm();
        Some(Self(self.conjugate().0.map(|x| x / &n)))
    }

    /// The element in doubled coordinates, if it lies in the Hurwitz order.
    pub fn to_hurwitz(&self) -> Option<HurwitzQuaternion> {
        let mut dc = [0i64; 4];
        for (slot, x) in dc.iter_mut().zip(&self.0) {
            let twice = x * rat(2, 1);
            if !twice.is_integer() {
                return None;
            }
            *slot = i64::try_from(twice.to_integer()).ok()?;
        }
        HurwitzQuaternion::from_doubled(dc).ok()
    }
}

impl From<HurwitzQuaternion> for RationalQuaternion {
    fn from(q: HurwitzQuaternion) -> Self {
        Self(q.doubled().map(|x| rat(x, 2)))
    }
}

impl Add for &RationalQuaternion {
    type Output = RationalQuaternion;
    fn add(self, rhs: Self) -> RationalQuaternion {
        RationalQuaternion(std::array::from_fn(|i| &self.0[i] + &rhs.0[i]))
    }
}

impl Mul for &RationalQuaternion {
    type Output = RationalQuaternion;
    fn mul(self, rhs: Self) -> RationalQuaternion {
        let [a1, b1, c1, d1] = &self.0;
        let [a2, b2, c2, d2] = &rhs.0;
        RationalQuaternion([
            a1 * a2 - b1 * b2 - c1 * c2 - d1 * d2,
            a1 * b2 + b1 * a2 + c1 * d2 - d1 * c2,
            a1 * c2 - b1 * d2 + c1 * a2 + d1 * b2,
            a1 * d2 + b1 * c2 - c1 * b2 + d1 * a2,
        ])
    }
}

/// 2x2 matrices over the rational quaternions.
pub type QuatMatrix2 = [[RationalQuaternion; 2]; 2];

pub fn quat_mul2(a: &QuatMatrix2, b: &QuatMatrix2) -> QuatMatrix2 {
    std::array::from_fn(|r| {
        std::array::from_fn(|c| &(&a[r][0] * &b[0][c]) + &(&a[r][1] * &b[1][c]))
    })
}

pub fn quat_diag2(x: HurwitzQuaternion, y: HurwitzQuaternion) -> QuatMatrix2 {
    [
        [x.into(), RationalQuaternion::zero()],
        [RationalQuaternion::zero(), y.into()],
    ]
}

/// Inverse of a diagonal quaternion matrix; `None` if not diagonal or singular.
pub fn quat_inv_diag2(a: &QuatMatrix2) -> Option<QuatMatrix2> {
    if !a[0][1].is_zero() || !a[1][0].is_zero() {
        return None;
    }
    Some([
        [a[0][0].inverse()?, RationalQuaternion::zero()],
        [RationalQuaternion::zero(), a[1][1].inverse()?],
    ])
}

pub fn quat_antidiagonal2() -> QuatMatrix2 {
    [
        [RationalQuaternion::zero(), RationalQuaternion::one()],
        [RationalQuaternion::one(), RationalQuaternion::zero()],
    ]
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct AdjointCheck {
    pub prime: u64,
    pub identity: String,
    pub holds: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct AdjointReport {
    pub checks: Vec<AdjointCheck>,
    pub pass: bool,
}

/// `w z h_from^-1 w == h_to` at an odd prime with `z = p I`.
pub fn odd_identity(p: i64, from: u8, to: u8) -> bool {
    let w = antidiagonal4();
    let z = diag4([p; 4]);
    let inv = mat_inv4(&generator(from, p)).expect("generators are invertible");
    let lhs = mat_mul4(&mat_mul4(&mat_mul4(&w, &z), &inv), &w);
    lhs == generator(to, p)
}

/// `w diag(1+i, 1+i) diag(1+i, 1)^-1 w == diag(1+i, 1)`, with every entry
/// of the product landing back in the Hurwitz order.
pub fn dyadic_identity() -> bool {
    let varpi = HurwitzQuaternion::VARPI;
    let w = quat_antidiagonal2();
    let z = quat_diag2(varpi, varpi);
    let h = quat_diag2(varpi, HurwitzQuaternion::ONE);
    let inv = quat_inv_diag2(&h).expect("diagonal and invertible");
    let lhs = quat_mul2(&quat_mul2(&quat_mul2(&w, &z), &inv), &w);
    lhs.iter().flatten().all(|x| x.to_hurwitz().is_some()) && lhs == h
}

/// All identities at the given odd primes plus the dyadic one.
pub fn adjoint_matrix_identities(primes: &[u64]) -> AdjointReport {
    let mut checks = Vec::new();
    for &p in primes {
        for (from, to) in [(4u8, 2u8), (3, 3), (2, 4)] {
            checks.push(AdjointCheck {
                prime: p,
                identity: format!("w z h{from}^-1 w = h{to}"),
                holds: odd_identity(p as i64, from, to),
            });
        }
    }
    checks.push(AdjointCheck {
        prime: 2,
        identity: "w diag(1+i,1+i) diag(1+i,1)^-1 w = diag(1+i,1)".into(),
        holds: dyadic_identity(),
    });
    let pass = checks.iter().all(|c| c.holds);
    AdjointReport { checks, pass }
}
