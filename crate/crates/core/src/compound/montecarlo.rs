use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rayon::prelude::*;

use super::Severity;
use crate::error::{domain, Error, Result};
use crate::nbl::{nbl_pmf_recursive, NblParams};

/// Work is split into this many independent ChaCha streams, so results depend
/// on the seed only and not on the thread count.
const SHARDS: u64 = 64;

/// Tail mass of X left beyond the tabulated cdf.
const X_TAIL: f64 = 1e-13;
const X_TABLE_LIMIT: usize = 4096;

/// Empirical law of simulated aggregate claims.
#[derive(Debug, Clone, PartialEq)]
pub struct EmpiricalCdf {
    sorted: Vec<f64>,
}

impl EmpiricalCdf {
    pub fn draws(&self) -> usize {
        self.sorted.len()
    }

    pub fn samples(&self) -> &[f64] {
        &self.sorted
    }

    /// Fraction of draws ≤ y.
    pub fn cdf(&self, y: f64) -> f64 {
        self.sorted.partition_point(|&s| s <= y) as f64 / self.sorted.len() as f64
    }

    /// Binomial standard error of [`EmpiricalCdf::cdf`] at y.
    pub fn std_error(&self, y: f64) -> f64 {
        let p = self.cdf(y);
        (p * (1.0 - p) / self.sorted.len() as f64).sqrt()
    }

    pub fn mean(&self) -> f64 {
        self.sorted.iter().sum::<f64>() / self.sorted.len() as f64
    }
}

/// Simulates `draws` copies of S. X is drawn by inversion of the tabulated
/// count cdf, claim sizes by inversion (discrete) or the severity's sampler.
pub fn compound_monte_carlo(params: NblParams, severity: Severity<'_>, draws: u64, seed: u64) -> Result<EmpiricalCdf> {
    if draws == 0 {
        return Err(domain("draws must be positive"));
    }
    if let Severity::Continuous(c) = severity {
        if c.sampler().is_none() {
            return Err(Error::InvalidData(format!("severity {} has no sampler", c.label())));
        }
    }
    let count_cdf = count_cdf(params)?;
    let claim_cdf: Vec<f64> = match severity {
        Severity::Discrete(d) => running_sum(d.pmf()),
        Severity::Continuous(_) => Vec::new(),
    };
    let mut shards: Vec<Vec<f64>> = (0..SHARDS)
        .into_par_iter()
        .map(|shard| {
            let size = draws / SHARDS + u64::from(shard < draws % SHARDS);
            let mut rng = ChaCha20Rng::seed_from_u64(seed);
            rng.set_stream(shard);
            let mut out = Vec::with_capacity(size as usize);
            for _ in 0..size {
                let x = invert(&count_cdf, rng.random::<f64>());
                let mut total = 0.0;
                for _ in 0..x {
                    total += match severity {
                        Severity::Discrete(_) => invert(&claim_cdf, rng.random::<f64>()) as f64,
                        Severity::Continuous(c) => (c.sampler().expect("checked above"))(&mut rng),
                    };
                }
                out.push(total);
            }
            out
        })
        .collect();
    let mut sorted = Vec::with_capacity(draws as usize);
    for s in shards.iter_mut() {
        sorted.append(s);
    }
    sorted.sort_unstable_by(f64::total_cmp);
    Ok(EmpiricalCdf { sorted })
}

fn running_sum(p: &[f64]) -> Vec<f64> {
    p.iter()
        .scan(0.0, |acc, v| {
            *acc += v;
            Some(*acc)
        })
        .collect()
}

/// Smallest index whose cumulative probability exceeds u, capped at the table end.
fn invert(cdf: &[f64], u: f64) -> usize {
    cdf.partition_point(|&c| c <= u).min(cdf.len() - 1)
}

fn count_cdf(params: NblParams) -> Result<Vec<f64>> {
    let mut x_max = 64;
    loop {
        let cdf = running_sum(&nbl_pmf_recursive(params, x_max)?);
        let tail = 1.0 - cdf[x_max];
        if tail < X_TAIL || x_max >= X_TABLE_LIMIT {
            return Ok(cdf);
        }
        x_max *= 2;
    }
}
