//! Hecke operators acting on coefficient tables.
//!
//! All operators work in the unnormalized space `A(beta) = sqrt(K) a(K,u,n)`
//! in double precision. `A` vanishes off the lattice `S`.

use std::fmt;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::coeff::Sign;
use crate::error::{Error, Result};
use crate::maass::{check_maass, MaassReport};
use crate::quaternion::CanonicalIndex;
use crate::quaternion::{
    canonical_decompose, enumerate_cp, find_representative, is_in_s, is_odd_prime,
    HurwitzQuaternion, LatticeElement, Side,
};
use crate::table::CoefficientTable;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum HeckeKind {
    T2,
    H2,
    H3,
    H4,
}

impl fmt::Display for HeckeKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            HeckeKind::T2 => "T2",
            HeckeKind::H2 => "H2",
            HeckeKind::H3 => "H3",
            HeckeKind::H4 => "H4",
        };
        f.write_str(s)
    }
}

impl std::str::FromStr for HeckeKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_uppercase().as_str() {
            "T2" => Ok(HeckeKind::T2),
            "H2" => Ok(HeckeKind::H2),
            "H3" => Ok(HeckeKind::H3),
            "H4" => Ok(HeckeKind::H4),
            _ => Err(Error::InvalidOperator(format!(
                "unknown operator kind '{s}'"
            ))),
        }
    }
}

/// A double-coset operator together with the classes `C_p` it sums over.
#[derive(Clone, Debug)]
pub struct HeckeOperator {
    prime: u64,
    kind: HeckeKind,
    classes: Vec<HurwitzQuaternion>,
}

impl HeckeOperator {
    pub fn new(kind: HeckeKind, prime: u64) -> Result<Self> {
        match kind {
            HeckeKind::T2 if prime != 2 => Err(Error::InvalidOperator(format!(
                "T2 acts at p = 2, not p = {prime}"
            ))),
            HeckeKind::T2 => Ok(Self {
                prime,
                kind,
                classes: Vec::new(),
            }),
            _ if !is_odd_prime(prime) => Err(Error::InvalidOperator(format!(
                "{kind} needs an odd prime, got {prime}"
            ))),
            _ => Ok(Self {
                prime,
                kind,
                classes: enumerate_cp(prime)?,
            }),
        }
    }

    pub fn t2() -> Self {
        Self::new(HeckeKind::T2, 2).expect("T2 at 2 is valid")
    }

    pub fn prime(&self) -> u64 {
        self.prime
    }

    pub fn kind(&self) -> HeckeKind {
        self.kind
    }

    /// Largest factor by which the operator raises `K` in a lookup.
    pub fn growth(&self) -> u64 {
        match self.kind {
            HeckeKind::T2 => 2,
            HeckeKind::H2 | HeckeKind::H4 => self.prime,
            HeckeKind::H3 => self.prime * self.prime,
        }
    }

    fn check_bounds(&self, table: &CoefficientTable<f64>, k: u64) -> Result<()> {
        let needed = k * self.growth();
        if needed > table.k_max {
            return Err(Error::OutOfBounds {
                needed,
                k_max: table.k_max,
            });
        }
        Ok(())
    }

    /// The operator's value at the index of `beta`, computed from `beta` itself.
    pub fn apply_at(&self, table: &CoefficientTable<f64>, beta: &LatticeElement) -> Result<f64> {
        self.check_bounds(table, beta.norm())?;
        let b = beta.quaternion();
        let p = self.prime as i64;
        let pf = self.prime as f64;
        let a = |q: Option<HurwitzQuaternion>| match q {
            Some(q) => a_value(table, &q),
            None => Ok(0.0),
        };
        match self.kind {
            HeckeKind::T2 => {
                let w = HurwitzQuaternion::VARPI;
                Ok(2.0 * (a(b.div_exact(&w, Side::Right))? + a(Some(b * w))?))
            }
            HeckeKind::H2 => {
                // beta conj(alpha)^-1 = beta alpha / p
                let mut sum = 0.0;
                for alpha in &self.classes {
                    sum += a((b * *alpha).div_scalar(p))?;
                    sum += a(Some(alpha.conjugate() * b))?;
                }
                Ok(pf * sum)
            }
            HeckeKind::H4 => {
                // alpha^-1 beta = conj(alpha) beta / p
                let mut sum = 0.0;
                for alpha in &self.classes {
                    sum += a((alpha.conjugate() * b).div_scalar(p))?;
                    sum += a(Some(b * *alpha))?;
                }
                Ok(pf * sum)
            }
            HeckeKind::H3 => {
                let mut sum = 0.0;
                for a1 in &self.classes {
                    let left = a1.conjugate() * b;
                    for a2 in &self.classes {
                        sum += a((left * *a2).div_scalar(p))?;
                    }
                }
                Ok(pf * pf * (a(b.div_scalar(p))? + a(Some(b.scale(p)))?) + pf * sum)
            }
        }
    }

    /// The operator's value at an index, evaluated at its standard representative.
    pub fn apply(&self, table: &CoefficientTable<f64>, index: &CanonicalIndex) -> Result<f64> {
        self.check_bounds(table, index.k)?;
        self.apply_at(table, &find_representative(index)?)
    }

    /// The normalized image table on every index the input table can support.
    pub fn image(&self, table: &CoefficientTable<f64>) -> Result<CoefficientTable<f64>> {
        let k_max = table.k_max / self.growth();
        let indices: Vec<CanonicalIndex> =
            table.indices().copied().filter(|i| i.k <= k_max).collect();
        let values: Vec<f64> = indices
            .par_iter()
            .map(|idx| Ok(self.apply(table, idx)? / (idx.k as f64).sqrt()))
            .collect::<Result<_>>()?;
        let mut out = CoefficientTable::new(table.epsilon, k_max);
        for (idx, v) in indices.into_iter().zip(values) {
            out.insert(idx, v)?;
        }
        Ok(out)
    }
}

/// `A(q)`: zero off `S`, otherwise `sqrt(K) a(K,u,n)` at the index of `q`.
pub fn a_value(table: &CoefficientTable<f64>, q: &HurwitzQuaternion) -> Result<f64> {
    if q.is_zero() || !is_in_s(q) {
        return Ok(0.0);
    }
    let (idx, _) = canonical_decompose(&LatticeElement::new(*q)?)?;
    table.unnormalized(&idx)
}

/// Expected eigenvalue of an operator on the lift of an eigenform.
pub fn expected_eigenvalue(kind: HeckeKind, prime: u64, lambda: f64, epsilon: Sign) -> f64 {
    let p = prime as f64;
    match kind {
        HeckeKind::T2 => -3.0 * std::f64::consts::SQRT_2 * epsilon.as_f64(),
        HeckeKind::H2 | HeckeKind::H4 => p * (p + 1.0) * lambda,
        HeckeKind::H3 => p * p * lambda * lambda + p * p * p + p,
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LambdaEstimate {
    pub prime: u64,
    pub lambda: f64,
    /// `(p^n K0, estimate)` for each base used, best-conditioned first.
    pub bases: Vec<(u64, f64)>,
    pub spread: f64,
}

/// Recovers `lambda_p = (A(p^(n+1)K0) + A(p^(n-1)K0)) / A(p^n K0)` at `u = 0`, `n = 1`
/// from every base `K0 = 2 (mod 4)` coprime to `p` that fits in the table.
pub fn extract_lambda(
    table: &CoefficientTable<f64>,
    p: u64,
    tolerance: f64,
) -> Result<LambdaEstimate> {
    if !is_odd_prime(p) {
        return Err(Error::NotOddPrime(p));
    }
    let a = |k: u64| table.unnormalized(&CanonicalIndex::new(k, 0, 1));
    let scale = table
        .iter()
        .filter(|(i, _)| i.u == 0 && i.n == 1)
        .map(|(i, v)| (v * (i.k as f64).sqrt()).abs())
        .fold(0.0, f64::max);
    let mut candidates = Vec::new();
    let mut k0 = 2;
    while k0 * p <= table.k_max {
        if k0 % p != 0 {
            let mut below = 0.0;
            let mut k = k0;
            while k * p <= table.k_max {
                let den = a(k)?;
                if den.abs() > 1e-9 * scale {
                    let est = (a(k * p)? + below) / den;
                    candidates.push((den.abs(), k, est));
                }
                below = den;
                k *= p;
            }
        }
        k0 += 4;
    }
    if candidates.is_empty() {
        return Err(Error::NoUsableIndex(p));
    }
    candidates.sort_by(|x, y| y.0.total_cmp(&x.0).then(x.1.cmp(&y.1)));
    candidates.truncate(8);
    let bases: Vec<(u64, f64)> = candidates.iter().map(|c| (c.1, c.2)).collect();
    let lo = bases.iter().map(|b| b.1).fold(f64::INFINITY, f64::min);
    let hi = bases.iter().map(|b| b.1).fold(f64::NEG_INFINITY, f64::max);
    let spread = hi - lo;
    if spread > tolerance * hi.abs().max(lo.abs()).max(1.0) {
        return Err(Error::Inconsistent {
            prime: p,
            spread,
            tolerance,
        });
    }
    Ok(LambdaEstimate {
        prime: p,
        lambda: bases[0].1,
        bases,
        spread,
    })
}

/// Eigenvalue test of one operator across many indices.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct OperatorCheck {
    pub prime: u64,
    pub kind: HeckeKind,
    pub indices_checked: usize,
    pub expected_mu: Option<f64>,
    pub mu_min: f64,
    pub mu_max: f64,
    pub max_rel_err: f64,
    pub pass: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EigenReport {
    pub prime: u64,
    pub lambda_p: Option<f64>,
    pub checks: Vec<OperatorCheck>,
    pub pass: bool,
}

/// Minimum number of nonzero indices an eigenvalue check must cover.
pub const MIN_EIGEN_INDICES: usize = 10;

/// Applies `op` at every index it can reach and compares `A'` with `mu A`.
/// With `expected = None` the check only measures how constant `A'/A` is.
pub fn check_operator(
    table: &CoefficientTable<f64>,
    op: &HeckeOperator,
    expected: Option<f64>,
    tolerance: f64,
) -> Result<OperatorCheck> {
    let k_lim = table.k_max / op.growth();
    let rows: Vec<(CanonicalIndex, f64)> = table
        .iter()
        .filter(|(i, _)| i.k <= k_lim)
        .map(|(i, v)| (*i, v * (i.k as f64).sqrt()))
        .collect();
    let scale = rows.iter().map(|r| r.1.abs()).fold(0.0, f64::max);
    let rows: Vec<_> = rows
        .into_iter()
        .filter(|r| r.1.abs() > 1e-9 * scale)
        .collect();
    let images: Vec<f64> = rows
        .par_iter()
        .map(|(idx, _)| op.apply(table, idx))
        .collect::<Result<_>>()?;
    let ratios: Vec<f64> = rows.iter().zip(&images).map(|(r, img)| img / r.1).collect();
    let mu_min = ratios.iter().copied().fold(f64::INFINITY, f64::min);
    let mu_max = ratios.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let max_rel_err = match expected {
        Some(mu) => rows
            .iter()
            .zip(&images)
            .map(|(r, img)| {
                let target = mu * r.1;
                let denom = img.abs().max(target.abs());
                if denom == 0.0 {
                    0.0
                } else {
                    (img - target).abs() / denom
                }
            })
            .fold(0.0, f64::max),
        None if ratios.is_empty() => 0.0,
        None => (mu_max - mu_min) / mu_max.abs().max(mu_min.abs()).max(f64::MIN_POSITIVE),
    };
    let pass = expected.is_some() && rows.len() >= MIN_EIGEN_INDICES && max_rel_err <= tolerance;
    Ok(OperatorCheck {
        prime: op.prime(),
        kind: op.kind(),
        indices_checked: rows.len(),
        expected_mu: expected,
        mu_min,
        mu_max,
        max_rel_err,
        pass,
    })
}

/// Eigenvalue relations at each requested prime. At odd `p` the eigenvalue
/// `lambda_p` is extracted from the table; if that fails the report carries
/// the spread of the observed ratios and fails.
pub fn verify_eigen_relations(
    table: &CoefficientTable<f64>,
    primes: &[u64],
    tolerance: f64,
) -> Result<Vec<EigenReport>> {
    let mut out = Vec::new();
    for &p in primes {
        if p == 2 {
            let mu = expected_eigenvalue(HeckeKind::T2, 2, 0.0, table.epsilon);
            let check = check_operator(table, &HeckeOperator::t2(), Some(mu), tolerance)?;
            out.push(EigenReport {
                prime: 2,
                lambda_p: None,
                pass: check.pass,
                checks: vec![check],
            });
            continue;
        }
        let lambda = extract_lambda(table, p, tolerance).ok().map(|e| e.lambda);
        let mut checks = Vec::new();
        for kind in [HeckeKind::H2, HeckeKind::H3, HeckeKind::H4] {
            let op = HeckeOperator::new(kind, p)?;
            let mu = lambda.map(|l| expected_eigenvalue(kind, p, l, table.epsilon));
            checks.push(check_operator(table, &op, mu, tolerance)?);
        }
        out.push(EigenReport {
            prime: p,
            lambda_p: lambda,
            pass: checks.iter().all(|c| c.pass),
            checks,
        });
    }
    Ok(out)
}

/// One instance of the summation identity for the image of `H3`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SummationCheck {
    pub index: CanonicalIndex,
    pub m: u32,
    pub l: u32,
    pub lhs: f64,
    pub rhs: f64,
    pub rel_err: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct StabilityReport {
    pub prime: u64,
    pub kind: HeckeKind,
    pub image_k_max: u64,
    pub image_indices: usize,
    pub maass: MaassReport,
    /// For `T2`: distance of the image from `-3 sqrt(2) epsilon` times the input.
    pub scalar_rel_err: Option<f64>,
    pub summation: Vec<SummationCheck>,
    pub pass: bool,
}

fn valuation(mut x: u64, p: u64) -> u32 {
    let mut v = 0;
    while x % p == 0 {
        x /= p;
        v += 1;
    }
    v
}

/// Checks that the image of a Maass-space table under `op` is again in the
/// Maass space. For `H3` it also checks, in `A`-space,
/// `T(p^m K, u, p^l n) = sum_{i<=l} p^i T(p^(m-2i) K, u, n)` at every image
/// index with `l >= 1`.
pub fn stability_check(
    table: &CoefficientTable<f64>,
    op: &HeckeOperator,
    tolerance: f64,
) -> Result<StabilityReport> {
    let image = op.image(table)?;
    let maass = check_maass(&image, tolerance);
    // errors are measured against the largest image value as well, as in check_maass
    let floor = image.iter().map(|(_, v)| v.abs()).fold(0.0, f64::max);
    let rel = |a: f64, b: f64| {
        let d = a.abs().max(b.abs()).max(floor);
        if d == 0.0 {
            0.0
        } else {
            (a - b).abs() / d
        }
    };

    let scalar_rel_err = (op.kind() == HeckeKind::T2).then(|| {
        let mu = expected_eigenvalue(HeckeKind::T2, 2, 0.0, table.epsilon);
        image
            .iter()
            .map(|(i, v)| rel(*v, mu * table.get(i).unwrap_or(f64::NAN)))
            .fold(0.0, f64::max)
    });

    let mut summation = Vec::new();
    if op.kind() == HeckeKind::H3 {
        let p = op.prime();
        for (idx, v) in image.iter() {
            let l = valuation(idx.n, p);
            if l == 0 {
                continue;
            }
            let m = valuation(idx.k, p);
            let n0 = idx.n / p.pow(l);
            let root_k = (idx.k as f64).sqrt();
            let lhs = v * root_k;
            let mut rhs = 0.0;
            for i in 0..=l {
                let k = idx.k / p.pow(2 * i);
                rhs +=
                    (p.pow(i) as f64) * image.unnormalized(&CanonicalIndex::new(k, idx.u, n0))?;
            }
            summation.push(SummationCheck {
                index: *idx,
                m,
                l,
                lhs,
                rhs,
                rel_err: rel(lhs / root_k, rhs / root_k),
            });
        }
    }

    let pass = maass.pass
        && scalar_rel_err.is_none_or(|e| e <= tolerance)
        && summation.iter().all(|s| s.rel_err <= tolerance);
    Ok(StabilityReport {
        prime: op.prime(),
        kind: op.kind(),
        image_k_max: image.k_max,
        image_indices: image.len(),
        maass,
        scalar_rel_err,
        summation,
        pass,
    })
}
