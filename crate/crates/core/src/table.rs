//! Coefficient tables indexed by `(K, u, n)`.
//!
//! Tables store the normalized coefficients `a(K,u,n) = A(K,u,n) / sqrt(K)`.
//! With this normalization every recurrence in the Maass space has rational
//! coefficients, so formal and exact tables can be compared with `==`.

use std::collections::BTreeMap;
use std::fmt::Debug;

use num_traits::{Signed, Zero};
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::coeff::{
    parse_rational, rational_to_f64, rational_to_string, FormalCoefficient, Rational, Sign,
};
use crate::error::{Error, Result};
use crate::quaternion::CanonicalIndex;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Backend {
    /// Linear combinations of source symbols `C(M)`.
    Formal,
    /// Exact rational numbers.
    Exact,
    /// Double precision.
    Numeric,
}

/// Values a [`CoefficientTable`] can hold.
pub trait CoeffValue: Clone + Debug + PartialEq + Send + Sync {
    const BACKEND: Backend;

    fn zero() -> Self;
    fn is_zero(&self) -> bool;
    fn add(&self, other: &Self) -> Self;
    fn scale(&self, s: &Rational) -> Self;

    /// Canonical form under `c(2N) = -(epsilon/2) c(N)`; identity except for formal values.
    fn reduce_eigen2(&self, _epsilon: Sign) -> Self {
        self.clone()
    }

    /// Absolute size, used to scale relative errors of numeric comparisons.
    fn magnitude(&self) -> f64;

    /// Discrepancy between two values: `0` or `inf` for exact backends,
    /// `|lhs - rhs| / scale` for numeric ones.
    fn discrepancy(lhs: &Self, rhs: &Self, scale: f64) -> f64;

    /// Numeric value, when the backend has one.
    fn to_f64(&self) -> Option<f64>;

    fn to_json(&self) -> Value;
    fn from_json(v: &Value) -> Result<Self>;
}

impl CoeffValue for FormalCoefficient {
    const BACKEND: Backend = Backend::Formal;

    fn zero() -> Self {
        FormalCoefficient::zero()
    }
    fn is_zero(&self) -> bool {
        FormalCoefficient::is_zero(self)
    }
    fn add(&self, other: &Self) -> Self {
        FormalCoefficient::add(self, other)
    }
    fn scale(&self, s: &Rational) -> Self {
        FormalCoefficient::scale(self, s)
    }
    fn reduce_eigen2(&self, epsilon: Sign) -> Self {
        FormalCoefficient::reduce_eigen2(self, epsilon)
    }
    fn magnitude(&self) -> f64 {
        0.0
    }
    fn discrepancy(lhs: &Self, rhs: &Self, _scale: f64) -> f64 {
        if lhs == rhs {
            0.0
        } else {
            f64::INFINITY
        }
    }
    fn to_f64(&self) -> Option<f64> {
        None
    }
    fn to_json(&self) -> Value {
        serde_json::to_value(self).expect("formal coefficients serialize")
    }
    fn from_json(v: &Value) -> Result<Self> {
        serde_json::from_value(v.clone()).map_err(|e| Error::Parse(e.to_string()))
    }
}

impl CoeffValue for Rational {
    const BACKEND: Backend = Backend::Exact;

    fn zero() -> Self {
        Zero::zero()
    }
    fn is_zero(&self) -> bool {
        Zero::is_zero(self)
    }
    fn add(&self, other: &Self) -> Self {
        self + other
    }
    fn scale(&self, s: &Rational) -> Self {
        self * s
    }
    fn magnitude(&self) -> f64 {
        rational_to_f64(&self.abs())
    }
    fn discrepancy(lhs: &Self, rhs: &Self, _scale: f64) -> f64 {
        if lhs == rhs {
            0.0
        } else {
            f64::INFINITY
        }
    }
    fn to_f64(&self) -> Option<f64> {
        Some(rational_to_f64(self))
    }
    fn to_json(&self) -> Value {
        Value::String(rational_to_string(self))
    }
    fn from_json(v: &Value) -> Result<Self> {
        match v {
            Value::String(s) => parse_rational(s),
            Value::Number(n) if n.is_i64() => {
                Ok(Rational::from_integer(n.as_i64().unwrap().into()))
            }
            other => Err(Error::Parse(format!(
                "expected a rational string, got {other}"
            ))),
        }
    }
}

impl CoeffValue for f64 {
    const BACKEND: Backend = Backend::Numeric;

    fn zero() -> Self {
        0.0
    }
    fn is_zero(&self) -> bool {
        *self == 0.0
    }
    fn add(&self, other: &Self) -> Self {
        self + other
    }
    fn scale(&self, s: &Rational) -> Self {
        self * rational_to_f64(s)
    }
    fn magnitude(&self) -> f64 {
        self.abs()
    }
    fn discrepancy(lhs: &Self, rhs: &Self, scale: f64) -> f64 {
        let diff = (lhs - rhs).abs();
        if diff == 0.0 {
            return 0.0;
        }
        let scale = scale.max(lhs.abs()).max(rhs.abs());
        if scale == 0.0 {
            f64::INFINITY
        } else {
            diff / scale
        }
    }
    fn to_f64(&self) -> Option<f64> {
        Some(*self)
    }
    fn to_json(&self) -> Value {
        serde_json::Number::from_f64(*self)
            .map(Value::Number)
            .unwrap_or(Value::Null)
    }
    fn from_json(v: &Value) -> Result<Self> {
        v.as_f64()
            .ok_or_else(|| Error::Parse(format!("expected a number, got {v}")))
    }
}

/// Map from canonical index to normalized coefficient, complete for `K <= k_max`.
#[derive(Clone, Debug, PartialEq)]
pub struct CoefficientTable<V> {
    pub epsilon: Sign,
    pub k_max: u64,
    entries: BTreeMap<CanonicalIndex, V>,
}

impl<V: CoeffValue> CoefficientTable<V> {
    pub fn new(epsilon: Sign, k_max: u64) -> Self {
        Self {
            epsilon,
            k_max,
            entries: BTreeMap::new(),
        }
    }

    pub fn backend(&self) -> Backend {
        V::BACKEND
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn insert(&mut self, index: CanonicalIndex, value: V) -> Result<()> {
        if !index.is_valid() {
            return Err(Error::InvalidIndex(index));
        }
        if index.k > self.k_max {
            return Err(Error::OutOfBounds {
                needed: index.k,
                k_max: self.k_max,
            });
        }
        self.entries.insert(index, value);
        Ok(())
    }

    pub fn iter(&self) -> impl Iterator<Item = (&CanonicalIndex, &V)> {
        self.entries.iter()
    }

    pub fn indices(&self) -> impl Iterator<Item = &CanonicalIndex> {
        self.entries.keys()
    }

    /// Value at an index. Invalid indices read as zero; indices beyond
    /// `k_max` are an error rather than a silent zero.
    pub fn get(&self, index: &CanonicalIndex) -> Result<V> {
        if !index.is_valid() {
            return Ok(V::zero());
        }
        if index.k > self.k_max {
            return Err(Error::OutOfBounds {
                needed: index.k,
                k_max: self.k_max,
            });
        }
        self.entries
            .get(index)
            .cloned()
            .ok_or(Error::MissingEntry(*index))
    }

    /// `a(K, u, n)` with the convention that negative `u` or a non-integral
    /// `K` reads as zero.
    pub fn lookup(&self, k_num: u64, k_den: u64, u: i64, n: u64) -> Result<V> {
        if u < 0 || k_den == 0 || k_num % k_den != 0 {
            return Ok(V::zero());
        }
        self.get(&CanonicalIndex::new(k_num / k_den, u as u32, n))
    }

    pub fn map<W: CoeffValue>(&self, f: impl Fn(&V) -> W) -> CoefficientTable<W> {
        CoefficientTable {
            epsilon: self.epsilon,
            k_max: self.k_max,
            entries: self.entries.iter().map(|(k, v)| (*k, f(v))).collect(),
        }
    }

    pub fn try_map<W: CoeffValue>(
        &self,
        f: impl Fn(&V) -> Result<W>,
    ) -> Result<CoefficientTable<W>> {
        let mut entries = BTreeMap::new();
        for (k, v) in &self.entries {
            entries.insert(*k, f(v)?);
        }
        Ok(CoefficientTable {
            epsilon: self.epsilon,
            k_max: self.k_max,
            entries,
        })
    }

    /// Every valid index up to `k_max` present.
    pub fn is_complete(&self) -> bool {
        CanonicalIndex::all_up_to(self.k_max)
            .iter()
            .all(|i| self.entries.contains_key(i))
    }

    pub fn to_json(&self) -> Value {
        let entries: Vec<Value> = self
            .entries
            .iter()
            .map(|(idx, v)| {
                serde_json::json!({"K": idx.k, "u": idx.u, "n": idx.n, "value": v.to_json()})
            })
            .collect();
        serde_json::json!({
            "backend": V::BACKEND,
            "epsilon": self.epsilon,
            "k_max": self.k_max,
            "entries": entries,
        })
    }

    pub fn from_json(v: &Value) -> Result<Self> {
        let backend: Backend = serde_json::from_value(v["backend"].clone())
            .map_err(|e| Error::Parse(format!("table backend: {e}")))?;
        if backend != V::BACKEND {
            return Err(Error::Parse(format!(
                "table backend is {backend:?}, expected {:?}",
                V::BACKEND
            )));
        }
        let epsilon: Sign = serde_json::from_value(v["epsilon"].clone())
            .map_err(|e| Error::Parse(format!("table epsilon: {e}")))?;
        let k_max = v["k_max"]
            .as_u64()
            .ok_or_else(|| Error::Parse("table k_max missing".into()))?;
        let mut table = Self::new(epsilon, k_max);
        let entries = v["entries"]
            .as_array()
            .ok_or_else(|| Error::Parse("table entries missing".into()))?;
        for (pos, e) in entries.iter().enumerate() {
            let idx: CanonicalIndex = serde_json::from_value(e.clone())
                .map_err(|err| Error::Parse(format!("entry {pos}: {err}")))?;
            let value = V::from_json(&e["value"])
                .map_err(|err| Error::Parse(format!("entry {pos} {idx}: {err}")))?;
            table
                .insert(idx, value)
                .map_err(|err| Error::Parse(format!("entry {pos}: {err}")))?;
        }
        Ok(table)
    }
}

impl CoefficientTable<f64> {
    /// `A(K,u,n) = sqrt(K) a(K,u,n)`.
    pub fn unnormalized(&self, index: &CanonicalIndex) -> Result<f64> {
        Ok(self.get(index)? * (index.k as f64).sqrt())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coeff::rat;

    #[test]
    fn lookup_conventions() {
        let mut t = CoefficientTable::<f64>::new(Sign::Plus, 4);
        t.insert(CanonicalIndex::new(2, 0, 1), 1.0).unwrap();
        t.insert(CanonicalIndex::new(4, 1, 1), 2.0).unwrap();
        assert_eq!(t.lookup(4, 1, -1, 1).unwrap(), 0.0);
        assert_eq!(t.lookup(3, 2, 0, 1).unwrap(), 0.0);
        assert_eq!(t.get(&CanonicalIndex::new(4, 2, 1)).unwrap(), 0.0);
        assert_eq!(t.lookup(8, 2, 1, 1).unwrap(), 2.0);
        assert!(matches!(
            t.get(&CanonicalIndex::new(6, 0, 1)),
            Err(Error::OutOfBounds {
                needed: 6,
                k_max: 4
            })
        ));
        assert!(t.insert(CanonicalIndex::new(4, 2, 1), 0.0).is_err());
        assert!(t.is_complete());
    }

    #[test]
    fn json_round_trip() {
        let mut t = CoefficientTable::<Rational>::new(Sign::Minus, 4);
        t.insert(CanonicalIndex::new(2, 0, 1), rat(1, 3)).unwrap();
        t.insert(CanonicalIndex::new(4, 1, 1), rat(-1, 2)).unwrap();
        let v = t.to_json();
        assert_eq!(v["entries"][1]["value"], "-1/2");
        assert_eq!(CoefficientTable::<Rational>::from_json(&v).unwrap(), t);
        assert!(CoefficientTable::<f64>::from_json(&v).is_err());
    }
}
