//! Membership in the Maass space and random elements of it.
//!
//! In normalized form the two recurrences read
//!
//! * dyadic: `a(K,u,n) = (-3 epsilon / 2) a(K/2,u-1,n) - (1/2) a(K/4,u-2,n)` for `u >= 1`,
//! * odd: `a(K,u,n) = sum_{d|n} a(K/d^2,u,1)`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::coeff::{rat, Rational, Sign};
use crate::error::Result;
use crate::lift::divisors;
use crate::quaternion::CanonicalIndex;
use crate::table::{Backend, CoeffValue, CoefficientTable};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub enum Relation {
    #[serde(rename = "2a")]
    Dyadic,
    #[serde(rename = "2b")]
    OddDivisor,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RelationFailure {
    pub index: CanonicalIndex,
    pub relation: Relation,
    pub error: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MaassReport {
    pub backend: Backend,
    pub epsilon: Sign,
    pub k_max: u64,
    pub tolerance: f64,
    pub checked_2a: usize,
    pub checked_2b: usize,
    pub max_err_2a: f64,
    pub max_err_2b: f64,
    pub failures: Vec<RelationFailure>,
    pub pass: bool,
}

impl MaassReport {
    pub fn failing_indices(&self) -> Vec<CanonicalIndex> {
        let mut out: Vec<_> = self.failures.iter().map(|f| f.index).collect();
        out.sort();
        out.dedup();
        out
    }
}

/// Right-hand side of the dyadic recurrence as `(coefficient, value)` pairs.
pub fn dyadic_terms<V: CoeffValue>(
    table: &CoefficientTable<V>,
    idx: &CanonicalIndex,
) -> Result<Vec<(Rational, V)>> {
    let eps = table.epsilon.as_i64();
    let u = idx.u as i64;
    Ok(vec![
        (rat(-3 * eps, 2), table.lookup(idx.k, 2, u - 1, idx.n)?),
        (rat(-1, 2), table.lookup(idx.k, 4, u - 2, idx.n)?),
    ])
}

/// Right-hand side of the odd-divisor recurrence.
pub fn odd_divisor_terms<V: CoeffValue>(
    table: &CoefficientTable<V>,
    idx: &CanonicalIndex,
) -> Result<Vec<(Rational, V)>> {
    divisors(idx.n)
        .into_iter()
        .map(|d| Ok((rat(1, 1), table.lookup(idx.k, d * d, idx.u as i64, 1)?)))
        .collect()
}

fn combine_terms<V: CoeffValue>(terms: &[(Rational, V)]) -> (V, f64) {
    let mut acc = V::zero();
    let mut scale = 0.0;
    for (q, v) in terms {
        acc = acc.add(&v.scale(q));
        scale += crate::coeff::rational_to_f64(q).abs() * v.magnitude();
    }
    (acc, scale)
}

/// Checks both recurrences at every entry of the table. Formal values are
/// compared after eigenform-at-2 reduction for the dyadic relation only.
///
/// Numeric errors are relative to the larger of the local term sizes and the
/// largest magnitude in the table, so entries that are zero up to rounding
/// (cancellation in a Hecke image, say) are not judged against their own noise.
pub fn check_maass<V: CoeffValue>(table: &CoefficientTable<V>, tolerance: f64) -> MaassReport {
    let floor = table.iter().map(|(_, v)| v.magnitude()).fold(0.0, f64::max);
    let mut report = MaassReport {
        backend: table.backend(),
        epsilon: table.epsilon,
        k_max: table.k_max,
        tolerance,
        checked_2a: 0,
        checked_2b: 0,
        max_err_2a: 0.0,
        max_err_2b: 0.0,
        failures: Vec::new(),
        pass: true,
    };
    for (idx, lhs) in table.iter() {
        if idx.u >= 1 {
            let err = match dyadic_terms(table, idx) {
                Ok(terms) => {
                    let (rhs, scale) = combine_terms(&terms);
                    let eps = table.epsilon;
                    V::discrepancy(
                        &lhs.reduce_eigen2(eps),
                        &rhs.reduce_eigen2(eps),
                        scale.max(floor),
                    )
                }
                Err(_) => f64::INFINITY,
            };
            report.checked_2a += 1;
            report.max_err_2a = report.max_err_2a.max(err);
            if err > tolerance {
                report.failures.push(RelationFailure {
                    index: *idx,
                    relation: Relation::Dyadic,
                    error: err,
                });
            }
        }
        if idx.n > 1 {
            let err = match odd_divisor_terms(table, idx) {
                Ok(terms) => {
                    let (rhs, scale) = combine_terms(&terms);
                    V::discrepancy(lhs, &rhs, scale.max(floor))
                }
                Err(_) => f64::INFINITY,
            };
            report.checked_2b += 1;
            report.max_err_2b = report.max_err_2b.max(err);
            if err > tolerance {
                report.failures.push(RelationFailure {
                    index: *idx,
                    relation: Relation::OddDivisor,
                    error: err,
                });
            }
        }
    }
    report.pass = report.failures.is_empty() && table.is_complete();
    report
}

/// Builds a Maass-space table from values at the free generators.
///
/// `generator(m)` supplies `a(m,0,1)` for `m = 2 (mod 4)`; everything else
/// follows from the recurrences, processed in increasing `K`.
pub fn maass_table_from_generators<V: CoeffValue>(
    epsilon: Sign,
    k_max: u64,
    mut generator: impl FnMut(u64) -> V,
) -> Result<CoefficientTable<V>> {
    let mut table = CoefficientTable::new(epsilon, k_max);
    for idx in CanonicalIndex::all_up_to(k_max) {
        let value = if idx.n > 1 {
            combine_terms(&odd_divisor_terms(&table, &idx)?).0
        } else if idx.u >= 1 {
            combine_terms(&dyadic_terms(&table, &idx)?).0
        } else {
            generator(idx.k)
        };
        table.insert(idx, value)?;
    }
    Ok(table)
}

fn random_rational(rng: &mut ChaCha8Rng) -> Rational {
    let num: i64 = rng.gen_range(-20..=20);
    let den: i64 = rng.gen_range(1..=12);
    rat(num, den)
}

/// A random element of the Maass space with exact rational coefficients.
pub fn random_maass_table(epsilon: Sign, seed: u64, k_max: u64) -> CoefficientTable<Rational> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    maass_table_from_generators(epsilon, k_max, |_| random_rational(&mut rng))
        .expect("generator construction stays in bounds")
}

/// Like [`random_maass_table`] but without the dyadic recurrence: every
/// `a(K,u,1)` is an independent random value and only the odd-divisor
/// recurrence is imposed.
pub fn random_odd_divisor_table(
    epsilon: Sign,
    seed: u64,
    k_max: u64,
) -> CoefficientTable<Rational> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut table = CoefficientTable::new(epsilon, k_max);
    for idx in CanonicalIndex::all_up_to(k_max) {
        let value = if idx.n > 1 {
            combine_terms(&odd_divisor_terms(&table, &idx).expect("in bounds")).0
        } else {
            random_rational(&mut rng)
        };
        table.insert(idx, value).expect("valid index");
    }
    table
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coeff::FormalCoefficient;
    use crate::lift::{build_lift_table, FormalSource, SourceValues};
    use std::collections::{BTreeMap, BTreeSet};

    #[test]
    fn lifted_formal_table_is_maass() {
        for eps in Sign::both() {
            let t = build_lift_table(&FormalSource { epsilon: eps }, 1000).unwrap();
            let r = check_maass(&t, 0.0);
            assert!(r.pass, "{:?}", &r.failures[..r.failures.len().min(5)]);
            assert!(r.checked_2a > 100 && r.checked_2b > 50);
        }
    }

    #[test]
    fn dyadic_example_after_reduction() {
        let t = build_lift_table(
            &FormalSource {
                epsilon: Sign::Plus,
            },
            4,
        )
        .unwrap();
        let a4 = t.get(&CanonicalIndex::new(4, 1, 1)).unwrap();
        assert_eq!(
            a4.reduce_eigen2(Sign::Plus),
            FormalCoefficient::symbol(1).scale(&rat(-3, 2))
        );
        // without reduction the formal dyadic relation does not hold
        assert_ne!(a4, FormalCoefficient::symbol(1).scale(&rat(-3, 2)));
    }

    #[test]
    fn random_table_examples() {
        for eps in Sign::both() {
            let a = random_maass_table(eps, 7, 300);
            assert!(check_maass(&a, 0.0).pass);
            assert_eq!(a, random_maass_table(eps, 7, 300));
            assert_ne!(a, random_maass_table(eps, 8, 300));
        }
        let t =
            maass_table_from_generators(
                Sign::Minus,
                8,
                |k| {
                    if k == 2 {
                        rat(1, 1)
                    } else {
                        rat(0, 1)
                    }
                },
            )
            .unwrap();
        assert_eq!(t.get(&CanonicalIndex::new(4, 1, 1)).unwrap(), rat(3, 2));
    }

    /// A random Maass table is the lift of the source form with
    /// `c(-M) = a(2M,0,1)` for odd `M` and `c(-2N) = -(epsilon/2) c(-N)`.
    #[test]
    fn random_table_is_a_lift() {
        for eps in Sign::both() {
            let k_max = 400;
            let t = random_maass_table(eps, 3, k_max);
            let mut values = BTreeMap::new();
            for m in 1..=k_max / 2 {
                let v = if m % 2 == 1 {
                    t.get(&CanonicalIndex::new(2 * m, 0, 1)).unwrap()
                } else {
                    &values[&(m / 2)] * rat(-eps.as_i64(), 2)
                };
                values.insert(m, v);
            }
            let lifted = build_lift_table(
                &SourceValues {
                    epsilon: eps,
                    values,
                },
                k_max,
            )
            .unwrap();
            assert_eq!(lifted, t);
        }
    }

    #[test]
    fn perturbation_names_affected_indices() {
        let k_max = 200;
        let mut t = random_maass_table(Sign::Plus, 1, k_max);
        let target = CanonicalIndex::new(24, 2, 1);
        let bumped = t.get(&target).unwrap() + rat(1, 1);
        t.insert(target, bumped).unwrap();
        let r = check_maass(&t, 0.0);
        assert!(!r.pass);

        // independent oracle: indices whose relations mention the target
        let mut expected = BTreeSet::new();
        for idx in CanonicalIndex::all_up_to(k_max) {
            let mut refs = vec![idx];
            if idx.u >= 1 {
                refs.push(CanonicalIndex::new(idx.k / 2, idx.u - 1, idx.n));
                if idx.u >= 2 {
                    refs.push(CanonicalIndex::new(idx.k / 4, idx.u - 2, idx.n));
                }
            }
            let in_2a = idx.u >= 1 && refs.contains(&target);
            let in_2b = idx.n > 1
                && (idx == target
                    || divisors(idx.n)
                        .iter()
                        .any(|d| CanonicalIndex::new(idx.k / (d * d), idx.u, 1) == target));
            if in_2a || in_2b {
                expected.insert(idx);
            }
        }
        let got: BTreeSet<_> = r.failing_indices().into_iter().collect();
        assert_eq!(got, expected);
    }

    #[test]
    fn numeric_tolerance() {
        let t = random_maass_table(Sign::Minus, 4, 200).map(crate::coeff::rational_to_f64);
        let r = check_maass(&t, 1e-12);
        assert!(r.pass, "{}", r.max_err_2a.max(r.max_err_2b));
        let mut bad = t.clone();
        let idx = CanonicalIndex::new(18, 0, 3);
        bad.insert(idx, t.get(&idx).unwrap() * (1.0 + 1e-6))
            .unwrap();
        let r = check_maass(&bad, 1e-8);
        // its own odd-divisor relation plus the dyadic relations one and two levels up
        assert_eq!(
            r.failing_indices(),
            vec![
                idx,
                CanonicalIndex::new(36, 1, 3),
                CanonicalIndex::new(72, 2, 3)
            ]
        );
    }

    #[test]
    fn odd_divisor_table_breaks_dyadic() {
        let t = random_odd_divisor_table(Sign::Plus, 5, 100);
        let r = check_maass(&t, 0.0);
        assert_eq!(r.max_err_2b, 0.0);
        assert!(r.failures.iter().all(|f| f.relation == Relation::Dyadic));
        assert!(!r.pass);
    }
}
