//! Satake parameters, local component descriptors, synthetic eigenforms and
//! the temperedness bound.

use std::collections::BTreeMap;
use std::io::Write;

use num_complex::Complex64;
use serde::{Serialize, Serializer};

use crate::coeff::{rat, Sign};
use crate::error::{Error, Result};
use crate::lift::{invert_cn, SourceForm};
use crate::quaternion::is_odd_prime;
use crate::table::{CoeffValue, CoefficientTable};

/// The bound `1/2 - 1/17` that tempered-enough local components must satisfy.
pub const RAMANUJAN_BOUND: f64 = 0.5 - 1.0 / 17.0;

fn serialize_complex4<S: Serializer>(
    chi: &[Complex64; 4],
    s: S,
) -> std::result::Result<S::Ok, S::Error> {
    let pairs: Vec<[f64; 2]> = chi.iter().map(|c| [c.re, c.im]).collect();
    pairs.serialize(s)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SatakeParams {
    pub p: u64,
    pub lambda_p: f64,
    /// `chi_1(p) .. chi_4(p)` as `[re, im]` pairs when serialized.
    #[serde(serialize_with = "serialize_complex4")]
    pub chi: [Complex64; 4],
}

/// The roots `(lambda +- sqrt(lambda^2 - 4)) / 2`, with `branch` choosing the sign.
fn roots(lambda: f64, branch: Sign) -> (Complex64, Complex64) {
    let disc = Complex64::new(lambda * lambda - 4.0, 0.0).sqrt() * branch.as_f64();
    let l = Complex64::new(lambda, 0.0);
    ((l + disc) / 2.0, (l - disc) / 2.0)
}

pub fn satake_from_lambda(p: u64, lambda_p: f64) -> SatakeParams {
    satake_from_lambda_branch(p, lambda_p, Sign::Plus)
}

/// As [`satake_from_lambda`] with an explicit branch of the square root.
pub fn satake_from_lambda_branch(p: u64, lambda_p: f64, branch: Sign) -> SatakeParams {
    let (r_plus, r_minus) = roots(lambda_p, branch);
    let s = (p as f64).sqrt();
    SatakeParams {
        p,
        lambda_p,
        chi: [r_plus * s, r_minus * s, r_plus / s, r_minus / s],
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ViolationReport {
    pub p: u64,
    pub v: [f64; 4],
    pub max_abs_v: f64,
    pub bound: f64,
    pub violated: bool,
    /// `log_p |r+| + log_p |r-|` for the roots of `x^2 - lambda x + 1`; absent
    /// for tuples not coming from a `lambda_p`.
    pub alpha_sum: Option<f64>,
    pub modulus: &'static str,
}

const MODULUS_NOTE: &str = "complex absolute value, then log base p";

/// `v_i = log_p |chi_i(p)|`, violated when `max |v_i| > 1/2 - 1/17`.
pub fn violation_from_chi(p: u64, chi: &[Complex64; 4]) -> ViolationReport {
    let lp = (p as f64).ln();
    let v = chi.map(|c| c.norm().ln() / lp);
    let max_abs_v = v.iter().map(|x| x.abs()).fold(0.0, f64::max);
    ViolationReport {
        p,
        v,
        max_abs_v,
        bound: RAMANUJAN_BOUND,
        violated: max_abs_v > RAMANUJAN_BOUND,
        alpha_sum: None,
        modulus: MODULUS_NOTE,
    }
}

pub fn ramanujan_violation_check(params: &SatakeParams) -> ViolationReport {
    let mut report = violation_from_chi(params.p, &params.chi);
    let (r_plus, r_minus) = roots(params.lambda_p, Sign::Plus);
    let lp = (params.p as f64).ln();
    report.alpha_sum = Some(r_plus.norm().ln() / lp + r_minus.norm().ln() / lp);
    report
}

/// CSV with columns `p, lambda, re/im of each chi_i, violated`.
pub fn write_satake_csv<W: Write>(out: W, rows: &[SatakeParams]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let io = |e: csv::Error| Error::Parse(e.to_string());
    w.write_record([
        "p", "lambda", "re_chi1", "im_chi1", "re_chi2", "im_chi2", "re_chi3", "im_chi3", "re_chi4",
        "im_chi4", "violated",
    ])
    .map_err(io)?;
    for row in rows {
        let mut rec = vec![row.p.to_string(), row.lambda_p.to_string()];
        for c in &row.chi {
            rec.push(c.re.to_string());
            rec.push(c.im.to_string());
        }
        rec.push(ramanujan_violation_check(row).violated.to_string());
        w.write_record(&rec).map_err(io)?;
    }
    w.flush().map_err(|e| Error::Parse(e.to_string()))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Place {
    Finite(u64),
    Infinity,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub enum DescriptorInput {
    Lambda(f64),
    Epsilon(Sign),
    R(f64),
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub enum LocalShape {
    /// Unramified principal series with `chi_p(p)` as `[re, im]`.
    UnramifiedPrincipalSeries([f64; 2]),
    /// Steinberg twisted by the unramified character with `chi(2)`.
    TwistedSteinberg(f64),
    /// Archimedean principal series with parameter `s` as `[re, im]`.
    ArchimedeanPrincipalSeries([f64; 2]),
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct LocalDescriptor {
    pub place: Place,
    pub shape: LocalShape,
}

pub fn sigma_descriptor(place: Place, input: DescriptorInput) -> Result<LocalDescriptor> {
    let shape = match (place, input) {
        (Place::Finite(2), DescriptorInput::Epsilon(eps)) => {
            LocalShape::TwistedSteinberg(-eps.as_f64())
        }
        (Place::Finite(p), DescriptorInput::Lambda(l)) if is_odd_prime(p) => {
            let (r, _) = roots(l, Sign::Plus);
            LocalShape::UnramifiedPrincipalSeries([r.re, r.im])
        }
        (Place::Infinity, DescriptorInput::R(r)) => {
            LocalShape::ArchimedeanPrincipalSeries([0.0, r / 2.0])
        }
        (place, input) => {
            return Err(Error::MismatchedDescriptor(format!(
                "{input:?} at {place:?}"
            )));
        }
    };
    Ok(LocalDescriptor { place, shape })
}

/// Coefficients `c(-N)`, `1 <= N <= n_max`, of a Hecke eigenform built
/// from `c(-1) = 1`, `c(-2N) = -(epsilon/2) c(-N)` and
/// `c(-pN) = p^(-1/2) lambda_p c(-N) - p^(-1) c(-N/p)`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SyntheticEigenform {
    pub epsilon: Sign,
    pub lambdas: BTreeMap<u64, f64>,
    pub n_max: u64,
    /// `coefficients[N - 1] = c(-N)`.
    pub coefficients: Vec<f64>,
}

fn smallest_prime_factor(n: u64) -> u64 {
    if n % 2 == 0 {
        return 2;
    }
    let mut d = 3;
    while d * d <= n {
        if n % d == 0 {
            return d;
        }
        d += 2;
    }
    n
}

pub fn synth_eigenform(
    epsilon: Sign,
    lambdas: &BTreeMap<u64, f64>,
    n_max: u64,
) -> Result<SyntheticEigenform> {
    let mut c = vec![0.0f64; n_max as usize + 1];
    if n_max >= 1 {
        c[1] = 1.0;
    }
    for n in 2..=n_max {
        let p = smallest_prime_factor(n);
        let prev = c[(n / p) as usize];
        c[n as usize] = if p == 2 {
            -epsilon.as_f64() / 2.0 * prev
        } else {
            let lambda = *lambdas.get(&p).ok_or(Error::MissingLambda(p))?;
            let pf = p as f64;
            let back = if (n / p) % p == 0 {
                c[(n / (p * p)) as usize]
            } else {
                0.0
            };
            lambda / pf.sqrt() * prev - back / pf
        };
    }
    c.remove(0);
    Ok(SyntheticEigenform {
        epsilon,
        lambdas: lambdas.clone(),
        n_max,
        coefficients: c,
    })
}

impl SyntheticEigenform {
    pub fn c(&self, n: u64) -> Option<f64> {
        (n >= 1 && n <= self.n_max).then(|| self.coefficients[n as usize - 1])
    }
}

impl SourceForm for SyntheticEigenform {
    type Value = f64;
    fn epsilon(&self) -> Sign {
        self.epsilon
    }
    fn coefficient(&self, m: u64) -> Result<f64> {
        self.c(m).ok_or(Error::UnassignedSymbol(m))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct HeckeRelationCheck {
    pub prime: u64,
    pub lambda: f64,
    pub checked: usize,
    pub max_rel_err: f64,
    pub pass: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CnReport {
    pub n_max: u64,
    pub checked_dyadic: usize,
    pub max_err_dyadic: f64,
    pub dyadic_pass: bool,
    pub hecke: Vec<HeckeRelationCheck>,
    pub pass: bool,
}

/// Recovers `c(-N)` from the table and checks `c(-2N) = -(epsilon/2) c(-N)`
/// and, for each supplied `lambda_p`,
/// `p^(1/2) c(-pN) + p^(-1/2) c(-N/p) = lambda_p c(-N)`.
pub fn verify_cn_relations<V: CoeffValue>(
    table: &CoefficientTable<V>,
    lambdas: &BTreeMap<u64, f64>,
    tolerance: f64,
) -> Result<CnReport> {
    let n_max = table.k_max / 2;
    let mut c = Vec::with_capacity(n_max as usize);
    for n in 1..=n_max {
        c.push(invert_cn(table, n)?);
    }
    let get = |n: u64| &c[n as usize - 1];
    let eps = table.epsilon;
    let half = rat(-eps.as_i64(), 2);
    let mut checked_dyadic = 0;
    let mut max_err_dyadic: f64 = 0.0;
    for n in 1..=n_max / 2 {
        let lhs = get(2 * n).reduce_eigen2(eps);
        let rhs = get(n).scale(&half).reduce_eigen2(eps);
        let err = V::discrepancy(&lhs, &rhs, 0.5 * get(n).magnitude());
        max_err_dyadic = max_err_dyadic.max(err);
        checked_dyadic += 1;
    }
    let dyadic_pass = max_err_dyadic <= tolerance;

    let mut hecke = Vec::new();
    for (&p, &lambda) in lambdas {
        if !is_odd_prime(p) {
            return Err(Error::NotOddPrime(p));
        }
        let pf = p as f64;
        let mut checked = 0;
        let mut max_rel_err: f64 = 0.0;
        let mut numeric = true;
        for n in 1..=n_max / p {
            let (Some(cpn), Some(cn)) = (get(p * n).to_f64(), get(n).to_f64()) else {
                numeric = false;
                break;
            };
            let back = if n % p == 0 {
                get(n / p).to_f64().unwrap_or(f64::NAN)
            } else {
                0.0
            };
            let lhs = pf.sqrt() * cpn + back / pf.sqrt();
            let rhs = lambda * cn;
            let scale = (pf.sqrt() * cpn).abs() + (back / pf.sqrt()).abs();
            let scale = scale.max(rhs.abs());
            if scale > 0.0 {
                max_rel_err = max_rel_err.max((lhs - rhs).abs() / scale);
            }
            checked += 1;
        }
        if !numeric {
            return Err(Error::Parse(
                "Hecke relations need numeric coefficient values".into(),
            ));
        }
        hecke.push(HeckeRelationCheck {
            prime: p,
            lambda,
            checked,
            max_rel_err,
            pass: checked > 0 && max_rel_err <= tolerance,
        });
    }
    let pass = dyadic_pass && hecke.iter().all(|h| h.pass);
    Ok(CnReport {
        n_max,
        checked_dyadic,
        max_err_dyadic,
        dyadic_pass,
        hecke,
        pass,
    })
}
