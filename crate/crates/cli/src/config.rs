use std::collections::BTreeMap;
use std::path::Path;

use anyhow::{bail, Context, Result};
use serde::Deserialize;

use maass_lift::coeff::Sign;
use maass_lift::table::Backend;

/// Everything a run can be parameterized by. Every field is optional in the
/// file; command-line flags override file values.
#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default = "default_epsilon")]
    pub epsilon: Sign,
    /// `lambda_p` keyed by the prime, as a string (JSON object keys).
    #[serde(default)]
    pub lambdas: BTreeMap<String, f64>,
    /// Explicit source coefficients `c(-M)` keyed by `M`.
    #[serde(default)]
    pub coefficients: BTreeMap<String, f64>,
    #[serde(default = "default_k_max")]
    pub k_max: u64,
    pub n_max: Option<u64>,
    #[serde(default = "default_backend")]
    pub backend: Backend,
    #[serde(default = "default_tolerance")]
    pub tolerance: f64,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_primes")]
    pub primes: Vec<u64>,
    /// Number of random tables drawn by `stability`.
    #[serde(default = "default_tables")]
    pub tables: u64,
}

fn default_epsilon() -> Sign {
    Sign::Plus
}
fn default_k_max() -> u64 {
    256
}
fn default_backend() -> Backend {
    Backend::Formal
}
fn default_tolerance() -> f64 {
    1e-8
}
fn default_primes() -> Vec<u64> {
    vec![3, 5]
}
fn default_tables() -> u64 {
    1
}

impl Default for RunConfig {
    fn default() -> Self {
        serde_json::from_str("{}").expect("defaults deserialize")
    }
}

fn parse_keyed<T: Copy>(map: &BTreeMap<String, T>, what: &str) -> Result<BTreeMap<u64, T>> {
    map.iter()
        .map(|(k, v)| {
            let key: u64 = k
                .trim()
                .parse()
                .with_context(|| format!("{what} key '{k}' is not a positive integer"))?;
            if key == 0 {
                bail!("{what} key '{k}' must be positive");
            }
            Ok((key, *v))
        })
        .collect()
}

impl RunConfig {
    pub fn load(path: Option<&Path>) -> Result<Self> {
        let cfg = match path {
            None => Self::default(),
            Some(p) => {
                let text = std::fs::read_to_string(p)
                    .with_context(|| format!("reading config {}", p.display()))?;
                serde_json::from_str(&text)
                    .with_context(|| format!("config {} is malformed", p.display()))?
            }
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.tolerance > 0.0) {
            bail!("tolerance must be positive, got {}", self.tolerance);
        }
        if self.k_max < 2 {
            bail!("k_max must be at least 2, got {}", self.k_max);
        }
        parse_keyed(&self.lambdas, "lambdas")?;
        parse_keyed(&self.coefficients, "coefficients")?;
        Ok(())
    }

    pub fn lambdas(&self) -> Result<BTreeMap<u64, f64>> {
        parse_keyed(&self.lambdas, "lambdas")
    }

    pub fn coefficients(&self) -> Result<BTreeMap<u64, f64>> {
        parse_keyed(&self.coefficients, "coefficients")
    }

    pub fn n_max(&self) -> u64 {
        self.n_max.unwrap_or(self.k_max / 2)
    }
}
