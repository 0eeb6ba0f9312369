//! Norm-level enumeration: the unit group, all elements of a given reduced
//! norm, and the classes `C_p` of norm-`p` elements modulo units.

use std::collections::BTreeSet;

use rayon::prelude::*;

use super::arith::HurwitzQuaternion;
use super::lattice::LatticeElement;
use crate::error::{Error, Result};

pub fn is_odd_prime(p: u64) -> bool {
    p >= 3
        && p % 2 == 1
        && (3..)
            .step_by(2)
            .take_while(|d| d * d <= p)
            .all(|d| p % d != 0)
}

/// All Hurwitz quaternions of reduced norm `m`, sorted by doubled coordinates.
pub fn enumerate_norm(m: u64) -> Vec<HurwitzQuaternion> {
    let target = 4 * m as i64;
    let bound = (target as u64).isqrt() as i64;
    let rows: Vec<Vec<HurwitzQuaternion>> = (-bound..=bound)
        .into_par_iter()
        .map(|a| {
            let mut out = Vec::new();
            let ra = target - a * a;
            let bb = (ra as u64).isqrt() as i64;
            for b in -bb..=bb {
                let rb = ra - b * b;
                let cb = (rb as u64).isqrt() as i64;
                for c in -cb..=cb {
                    let rc = rb - c * c;
                    let d = (rc as u64).isqrt() as i64;
                    if d * d != rc {
                        continue;
                    }
                    let ds: &[i64] = if d == 0 { &[0] } else { &[-d, d] };
                    for &d in ds {
                        if let Ok(q) = HurwitzQuaternion::from_doubled([a, b, c, d]) {
                            out.push(q);
                        }
                    }
                }
            }
            out
        })
        .collect();
    rows.into_iter().flatten().collect()
}

/// The 24 units of the Hurwitz order in a fixed order.
#[derive(Clone, Debug)]
pub struct UnitGroup {
    units: Vec<HurwitzQuaternion>,
}

impl UnitGroup {
    pub fn new() -> Self {
        let units = enumerate_norm(1);
        debug_assert_eq!(units.len(), 24);
        Self { units }
    }

    pub fn units(&self) -> &[HurwitzQuaternion] {
        &self.units
    }

    /// The right orbit `{ alpha * e }` of an element.
    pub fn right_orbit(&self, alpha: &HurwitzQuaternion) -> Vec<HurwitzQuaternion> {
        self.units.iter().map(|e| *alpha * *e).collect()
    }
}

impl Default for UnitGroup {
    fn default() -> Self {
        Self::new()
    }
}

/// Representatives of `{ alpha : nu(alpha) = p } / O^x` under right multiplication
/// by units, each the lexicographic minimum (doubled coordinates) of its orbit.
pub fn enumerate_cp(p: u64) -> Result<Vec<HurwitzQuaternion>> {
    if !is_odd_prime(p) {
        return Err(Error::NotOddPrime(p));
    }
    let units = UnitGroup::new();
    let mut seen = BTreeSet::new();
    let mut reps = Vec::new();
    for alpha in enumerate_norm(p) {
        if seen.contains(&alpha) {
            continue;
        }
        let orbit = units.right_orbit(&alpha);
        let rep = *orbit.iter().min().expect("orbit is nonempty");
        seen.extend(orbit);
        reps.push(rep);
    }
    reps.sort();
    Ok(reps)
}

/// Divisibility counts over `C_p` for a primitive `beta`.
///
/// Returns `(#{alpha in C_p : p | beta alpha}, #{alpha in C_p : p | conj(alpha) beta})`.
/// The second count uses the conjugate representative so that it is
/// well defined on right orbits. Also checks that `p^2` never divides
/// `beta alpha` or `conj(alpha) beta`.
pub fn divisibility_counts(beta: &LatticeElement, p: u64) -> Result<(usize, usize)> {
    if !beta.is_primitive() {
        return Err(Error::NotPrimitive(beta.to_string()));
    }
    let cp = enumerate_cp(p)?;
    Ok(divisibility_counts_with(beta, p, &cp))
}

/// Same as [`divisibility_counts`] with a precomputed `C_p`; `beta` is not
/// checked for primitivity.
pub fn divisibility_counts_with(
    beta: &LatticeElement,
    p: u64,
    cp: &[HurwitzQuaternion],
) -> (usize, usize) {
    let b = beta.quaternion();
    let p = p as i64;
    let mut left = 0;
    let mut right = 0;
    for alpha in cp {
        let ba = b * *alpha;
        let ab = alpha.conjugate() * b;
        if ba.div_scalar(p).is_some() {
            left += 1;
        }
        if ab.div_scalar(p).is_some() {
            right += 1;
        }
        assert!(
            ba.div_scalar(p * p).is_none() && ab.div_scalar(p * p).is_none(),
            "p^2 divides a product with primitive {b}"
        );
    }
    (left, right)
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Box enumeration over |a|,|b|,|c|,|d| <= 2 sqrt(m), independent of the
    /// nested-radius search above.
    fn brute_force_norm(m: u64) -> Vec<HurwitzQuaternion> {
        let r = (2.0 * (m as f64).sqrt()).floor() as i64 + 1;
        let mut out = Vec::new();
        for a in -r..=r {
            for b in -r..=r {
                for c in -r..=r {
                    for d in -r..=r {
                        if a * a + b * b + c * c + d * d == 4 * m as i64 {
                            if let Ok(q) = HurwitzQuaternion::from_doubled([a, b, c, d]) {
                                out.push(q);
                            }
                        }
                    }
                }
            }
        }
        out.sort();
        out
    }

    #[test]
    fn norm_counts_match_brute_force() {
        assert_eq!(enumerate_norm(1).len(), 24);
        assert_eq!(enumerate_norm(2).len(), 24);
        assert_eq!(enumerate_norm(3).len(), 96);
        for m in 1..=20 {
            assert_eq!(enumerate_norm(m), brute_force_norm(m), "m = {m}");
        }
    }

    #[test]
    fn units_form_a_group() {
        let g = UnitGroup::new();
        let set: BTreeSet<_> = g.units().iter().copied().collect();
        for x in g.units() {
            assert!(set.contains(&x.conjugate()));
            for y in g.units() {
                assert!(set.contains(&(*x * *y)));
            }
        }
    }

    #[test]
    fn cp_sizes() {
        assert_eq!(enumerate_cp(3).unwrap().len(), 4);
        assert_eq!(enumerate_cp(5).unwrap().len(), 6);
        assert_eq!(enumerate_cp(2), Err(Error::NotOddPrime(2)));
        assert_eq!(enumerate_cp(9), Err(Error::NotOddPrime(9)));
    }

    #[test]
    fn cp_orbits_partition_norm_p() {
        let units = UnitGroup::new();
        for p in [3u64, 5, 7, 11, 13] {
            let reps = enumerate_cp(p).unwrap();
            let mut covered = BTreeSet::new();
            for r in &reps {
                let orbit: BTreeSet<_> = units.right_orbit(r).into_iter().collect();
                assert_eq!(orbit.len(), 24);
                assert_eq!(*orbit.iter().next().unwrap(), *r);
                assert!(covered.is_disjoint(&orbit));
                covered.extend(orbit);
            }
            let all: BTreeSet<_> = enumerate_norm(p).into_iter().collect();
            assert_eq!(covered, all);
            assert_eq!(all.len() as u64, 24 * (p + 1));
        }
    }

    #[test]
    fn divisibility_count_examples() {
        let beta: LatticeElement = "1-ij".parse().unwrap();
        assert_eq!(divisibility_counts(&beta, 3).unwrap(), (0, 0));
        // nu = 6
        let beta: LatticeElement = "2+i+ij".parse().unwrap();
        assert_eq!(beta.norm(), 6);
        assert_eq!(divisibility_counts(&beta, 3).unwrap(), (1, 1));
        // nu = 10
        let beta: LatticeElement = "3+ij".parse().unwrap();
        assert_eq!(divisibility_counts(&beta, 7).unwrap(), (0, 0));
        let not_prim: LatticeElement = "2ij".parse().unwrap();
        assert!(matches!(
            divisibility_counts(&not_prim, 3),
            Err(Error::NotPrimitive(_))
        ));
    }

    #[test]
    fn no_right_division_by_conjugate_when_p_coprime_to_norm() {
        let beta: LatticeElement = "3+ij".parse().unwrap();
        for alpha in enumerate_cp(3).unwrap() {
            assert!(beta
                .quaternion()
                .div_exact(&alpha.conjugate(), super::super::Side::Right)
                .is_none());
        }
    }
}
