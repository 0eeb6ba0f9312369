//! The lift from source-form coefficients to normalized coefficients
//! `a(K,u,n)`, and its inverse.

use std::collections::BTreeMap;

use rayon::prelude::*;

use crate::coeff::{Assignment, FormalCoefficient, Rational, Sign};
use crate::error::{Error, Result};
use crate::quaternion::CanonicalIndex;
use crate::table::{CoeffValue, CoefficientTable};

/// Source of the coefficients `c(-M)`, `M >= 1`, and the sign `epsilon`.
pub trait SourceForm: Sync {
    type Value: CoeffValue;
    fn epsilon(&self) -> Sign;
    fn coefficient(&self, m: u64) -> Result<Self::Value>;
}

/// The generic source form: `c(-M)` is the symbol `C(M)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct FormalSource {
    pub epsilon: Sign,
}

impl SourceForm for FormalSource {
    type Value = FormalCoefficient;
    fn epsilon(&self) -> Sign {
        self.epsilon
    }
    fn coefficient(&self, m: u64) -> Result<FormalCoefficient> {
        Ok(FormalCoefficient::symbol(m))
    }
}

impl SourceForm for Assignment {
    type Value = f64;
    fn epsilon(&self) -> Sign {
        self.epsilon
    }
    fn coefficient(&self, m: u64) -> Result<f64> {
        self.get(m)
    }
}

/// Explicit coefficient values of any backend.
#[derive(Clone, Debug, PartialEq)]
pub struct SourceValues<V> {
    pub epsilon: Sign,
    pub values: BTreeMap<u64, V>,
}

impl<V: CoeffValue> SourceForm for SourceValues<V> {
    type Value = V;
    fn epsilon(&self) -> Sign {
        self.epsilon
    }
    fn coefficient(&self, m: u64) -> Result<V> {
        self.values
            .get(&m)
            .cloned()
            .ok_or(Error::UnassignedSymbol(m))
    }
}

/// Positive divisors of `n`, ascending.
pub fn divisors(n: u64) -> Vec<u64> {
    let mut small = Vec::new();
    let mut large = Vec::new();
    let mut d = 1;
    while d * d <= n {
        if n % d == 0 {
            small.push(d);
            if d * d != n {
                large.push(n / d);
            }
        }
        d += 1;
    }
    small.extend(large.into_iter().rev());
    small
}

/// `a(K,u,n) = sum_{t<=u} sum_{d|n} (-epsilon)^t c(-K / (2^(t+1) d^2))`.
pub fn lift_value<S: SourceForm + ?Sized>(f: &S, index: &CanonicalIndex) -> Result<S::Value> {
    if !index.is_valid() {
        return Err(Error::InvalidIndex(*index));
    }
    let sign = Rational::from_integer((-f.epsilon().as_i64()).into());
    let mut power = Rational::from_integer(1.into());
    let mut acc = S::Value::zero();
    for t in 0..=index.u {
        for d in divisors(index.n) {
            let denom = (1u64 << (t + 1)) * d * d;
            assert!(
                index.k % denom == 0,
                "valid index {index} gives a non-integral symbol"
            );
            acc = acc.add(&f.coefficient(index.k / denom)?.scale(&power));
        }
        power *= &sign;
    }
    Ok(acc)
}

pub fn lift_coefficient(index: &CanonicalIndex, epsilon: Sign) -> Result<FormalCoefficient> {
    lift_value(&FormalSource { epsilon }, index)
}

/// The lift at every valid index with `K <= k_max`.
pub fn build_lift_table<S: SourceForm + ?Sized>(
    f: &S,
    k_max: u64,
) -> Result<CoefficientTable<S::Value>> {
    let indices = CanonicalIndex::all_up_to(k_max);
    let values: Vec<S::Value> = indices
        .par_iter()
        .map(|idx| lift_value(f, idx))
        .collect::<Result<_>>()?;
    let mut table = CoefficientTable::new(f.epsilon(), k_max);
    for (idx, v) in indices.into_iter().zip(values) {
        table.insert(idx, v)?;
    }
    Ok(table)
}

/// The dyadic depth of the index `(2N, u, 1)` used to recover `c(-N)`.
pub fn u_of_n(n: u64) -> u32 {
    assert!(n >= 1, "N must be positive");
    n.trailing_zeros()
}

/// Recovers `c(-N) = a(2N, u, 1) + epsilon a(N, u-1, 1)`.
pub fn invert_cn<V: CoeffValue>(table: &CoefficientTable<V>, n: u64) -> Result<V> {
    if n == 0 {
        return Err(Error::Parse("N must be positive".into()));
    }
    if 2 * n > table.k_max {
        return Err(Error::OutOfBounds {
            needed: 2 * n,
            k_max: table.k_max,
        });
    }
    let u = u_of_n(n) as i64;
    let first = table.lookup(2 * n, 1, u, 1)?;
    let second = table.lookup(n, 1, u - 1, 1)?;
    let eps = Rational::from_integer(table.epsilon.as_i64().into());
    Ok(first.add(&second.scale(&eps)))
}

/// `c(-N)` for every `N` with `2N <= k_max`.
pub fn invert_all<V: CoeffValue>(table: &CoefficientTable<V>) -> Result<SourceValues<V>> {
    let mut values = BTreeMap::new();
    for n in 1..=table.k_max / 2 {
        values.insert(n, invert_cn(table, n)?);
    }
    Ok(SourceValues {
        epsilon: table.epsilon,
        values,
    })
}

/// Lifts the recovered `c(-N)` again. On a table in the image of the lift
/// this reproduces the input.
pub fn reconstruct<V: CoeffValue>(table: &CoefficientTable<V>) -> Result<CoefficientTable<V>> {
    build_lift_table(&invert_all(table)?, table.k_max)
}
