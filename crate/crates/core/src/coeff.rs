//! Exact rational linear combinations of source-form coefficient symbols.
//!
//! The symbol `C(M)` stands for the coefficient `c(-M)` of the level-2 source
//! form. Everything here is exact; floating point only appears in [`eval`].
//!
//! [`eval`]: FormalCoefficient::eval

use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::de::{self, Deserializer, MapAccess, Visitor};
use serde::ser::{SerializeMap, Serializer};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type Rational = BigRational;

pub fn rat(num: i64, den: i64) -> Rational {
    Rational::new(BigInt::from(num), BigInt::from(den))
}

pub fn rational_to_string(r: &Rational) -> String {
    if r.denom().is_one() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

pub fn parse_rational(s: &str) -> Result<Rational> {
    let bad = || Error::Parse(format!("bad rational '{s}'"));
    match s.split_once('/') {
        Some((n, d)) => {
            let n: BigInt = n.trim().parse().map_err(|_| bad())?;
            let d: BigInt = d.trim().parse().map_err(|_| bad())?;
            if d.is_zero() {
                return Err(bad());
            }
            Ok(Rational::new(n, d))
        }
        None => Ok(Rational::from_integer(s.trim().parse().map_err(|_| bad())?)),
    }
}

pub fn rational_to_f64(r: &Rational) -> f64 {
    // Ratio::to_f64 handles big numerators and denominators without overflow.
    r.to_f64().unwrap_or(f64::NAN)
}

/// The Atkin-Lehner sign `epsilon`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Sign {
    Plus,
    Minus,
}

impl Sign {
    pub fn as_i64(self) -> i64 {
        match self {
            Sign::Plus => 1,
            Sign::Minus => -1,
        }
    }

    pub fn as_f64(self) -> f64 {
        self.as_i64() as f64
    }

    pub fn from_i64(v: i64) -> Result<Self> {
        match v {
            1 => Ok(Sign::Plus),
            -1 => Ok(Sign::Minus),
            other => Err(Error::Parse(format!(
                "epsilon must be +1 or -1, got {other}"
            ))),
        }
    }

    pub fn both() -> [Sign; 2] {
        [Sign::Plus, Sign::Minus]
    }
}

impl fmt::Display for Sign {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.as_i64())
    }
}

impl Serialize for Sign {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_i64(self.as_i64())
    }
}

impl<'de> Deserialize<'de> for Sign {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let v = i64::deserialize(d)?;
        Sign::from_i64(v).map_err(de::Error::custom)
    }
}

/// A finite sum `sum_M q_M * C(M)` with exact rational `q_M`, never storing zeros.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct FormalCoefficient {
    terms: BTreeMap<u64, Rational>,
}

/// Numeric values for the symbols `C(M)` together with the sign `epsilon`.
#[derive(Clone, Debug, PartialEq)]
pub struct Assignment {
    pub values: BTreeMap<u64, f64>,
    pub epsilon: Sign,
}

impl Assignment {
    pub fn new(epsilon: Sign) -> Self {
        Self {
            values: BTreeMap::new(),
            epsilon,
        }
    }

    pub fn get(&self, m: u64) -> Result<f64> {
        self.values
            .get(&m)
            .copied()
            .ok_or(Error::UnassignedSymbol(m))
    }
}

impl FormalCoefficient {
    pub fn zero() -> Self {
        Self::default()
    }

    /// The single symbol `C(m)`.
    pub fn symbol(m: u64) -> Self {
        assert!(m >= 1, "coefficient symbols start at C(1)");
        let mut terms = BTreeMap::new();
        terms.insert(m, Rational::one());
        Self { terms }
    }

    pub fn from_terms<I: IntoIterator<Item = (u64, Rational)>>(terms: I) -> Self {
        let mut out = Self::zero();
        for (m, q) in terms {
            out.add_term(m, q);
        }
        out
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (u64, &Rational)> {
        self.terms.iter().map(|(m, q)| (*m, q))
    }

    pub fn coefficient(&self, m: u64) -> Rational {
        self.terms.get(&m).cloned().unwrap_or_else(Rational::zero)
    }

    pub fn add_term(&mut self, m: u64, q: Rational) {
        if q.is_zero() {
            return;
        }
        let slot = self.terms.entry(m).or_insert_with(Rational::zero);
        *slot += q;
        if slot.is_zero() {
            self.terms.remove(&m);
        }
    }

    pub fn scale(&self, s: &Rational) -> Self {
        if s.is_zero() {
            return Self::zero();
        }
        Self {
            terms: self.terms.iter().map(|(m, q)| (*m, q * s)).collect(),
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for (m, q) in &other.terms {
            out.add_term(*m, q.clone());
        }
        out
    }

    /// `s * a + t * b`.
    pub fn combine(a: &Self, b: &Self, s: &Rational, t: &Rational) -> Self {
        a.scale(s).add(&b.scale(t))
    }

    pub fn eval(&self, assignment: &Assignment) -> Result<f64> {
        let mut acc = 0.0;
        for (m, q) in &self.terms {
            acc += rational_to_f64(q) * assignment.get(*m)?;
        }
        Ok(acc)
    }

    /// Rewrites every `C(2M)` as `(-epsilon/2) C(M)` until only odd symbols remain.
    pub fn reduce_eigen2(&self, epsilon: Sign) -> Self {
        let factor = rat(-epsilon.as_i64(), 2);
        let mut out = Self::zero();
        for (m, q) in &self.terms {
            let shift = m.trailing_zeros();
            let mut c = q.clone();
            for _ in 0..shift {
                c *= &factor;
            }
            out.add_term(m >> shift, c);
        }
        out
    }

    pub fn max_symbol(&self) -> Option<u64> {
        self.terms.keys().next_back().copied()
    }
}

impl fmt::Display for FormalCoefficient {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (i, (m, q)) in self.terms.iter().enumerate() {
            let neg = q.is_negative();
            let mag = q.abs();
            match (i, neg) {
                (0, true) => write!(f, "-")?,
                (0, false) => {}
                (_, true) => write!(f, " - ")?,
                (_, false) => write!(f, " + ")?,
            }
            if !mag.is_one() {
                write!(f, "{}*", rational_to_string(&mag))?;
            }
            write!(f, "C({m})")?;
        }
        Ok(())
    }
}

impl Serialize for FormalCoefficient {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let mut map = s.serialize_map(Some(self.terms.len()))?;
        for (m, q) in &self.terms {
            map.serialize_entry(&m.to_string(), &rational_to_string(q))?;
        }
        map.end()
    }
}

impl<'de> Deserialize<'de> for FormalCoefficient {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        struct V;
        impl<'de> Visitor<'de> for V {
            type Value = FormalCoefficient;
            fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
                write!(f, "an object mapping symbol indices to rational strings")
            }
            fn visit_map<A: MapAccess<'de>>(
                self,
                mut access: A,
            ) -> std::result::Result<Self::Value, A::Error> {
                let mut out = FormalCoefficient::zero();
                while let Some((k, v)) = access.next_entry::<String, String>()? {
                    let m: u64 = k
                        .parse()
                        .map_err(|_| de::Error::custom(format!("bad symbol index '{k}'")))?;
                    if m == 0 {
                        return Err(de::Error::custom("symbol index must be positive"));
                    }
                    let q = parse_rational(&v).map_err(de::Error::custom)?;
                    out.add_term(m, q);
                }
                Ok(out)
            }
        }
        d.deserialize_map(V)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(m: u64) -> FormalCoefficient {
        FormalCoefficient::symbol(m)
    }

    #[test]
    fn combine_examples() {
        let one = Rational::one();
        assert_eq!(
            FormalCoefficient::combine(&c(1), &c(1), &one, &one),
            c(1).scale(&rat(2, 1))
        );
        assert!(FormalCoefficient::combine(&c(2), &c(2), &one, &-one.clone()).is_zero());
        let half = rat(1, 2);
        let a = c(9).add(&c(1));
        let b = FormalCoefficient::combine(&c(9), &c(1), &one, &-one.clone());
        assert_eq!(FormalCoefficient::combine(&a, &b, &half, &half), c(9));
    }

    #[test]
    fn eval_examples() {
        let mut asg = Assignment::new(Sign::Plus);
        asg.values.insert(1, 0.5);
        assert_eq!(c(1).scale(&rat(2, 1)).eval(&asg).unwrap(), 1.0);
        asg.values.insert(1, 1.0);
        asg.values.insert(2, -0.5);
        let x = FormalCoefficient::combine(&c(2), &c(1), &Rational::one(), &rat(-1, 1));
        assert_eq!(x.eval(&asg).unwrap(), -1.5);
        assert_eq!(FormalCoefficient::zero().eval(&asg).unwrap(), 0.0);
        assert_eq!(c(7).eval(&asg), Err(Error::UnassignedSymbol(7)));
    }

    #[test]
    fn reduce_examples() {
        assert_eq!(
            c(2).reduce_eigen2(Sign::Plus),
            FormalCoefficient::from_terms([(1, rat(-1, 2))])
        );
        assert_eq!(
            c(4).reduce_eigen2(Sign::Plus),
            FormalCoefficient::from_terms([(1, rat(1, 4))])
        );
        assert_eq!(
            c(4).reduce_eigen2(Sign::Minus),
            FormalCoefficient::from_terms([(1, rat(1, 4))])
        );
        assert_eq!(
            c(2).reduce_eigen2(Sign::Minus),
            FormalCoefficient::from_terms([(1, rat(1, 2))])
        );
        for s in Sign::both() {
            assert_eq!(c(3).reduce_eigen2(s), c(3));
        }
        // C(2) + (1/2) C(1) vanishes for epsilon = +1
        let x = c(2).add(&c(1).scale(&rat(1, 2)));
        assert!(x.reduce_eigen2(Sign::Plus).is_zero());
    }

    #[test]
    fn json_is_sorted_numerically() {
        let x = FormalCoefficient::from_terms([(10, rat(3, 2)), (2, rat(-1, 1)), (1, rat(1, 3))]);
        let s = serde_json::to_string(&x).unwrap();
        assert_eq!(s, r#"{"1":"1/3","2":"-1","10":"3/2"}"#);
        let back: FormalCoefficient = serde_json::from_str(&s).unwrap();
        assert_eq!(back, x);
        assert!(serde_json::from_str::<FormalCoefficient>(r#"{"0":"1"}"#).is_err());
    }

    #[test]
    fn display() {
        let x = FormalCoefficient::from_terms([(2, rat(1, 1)), (1, rat(-3, 2))]);
        assert_eq!(x.to_string(), "-3/2*C(1) + C(2)");
    }
}
