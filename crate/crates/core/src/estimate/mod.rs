//! Parameter estimation for NBL(r, θ) from grouped count data: factorial
//! moments, maximum likelihood and EM.

mod em;
mod mle;
mod moments;

pub use em::{em_e_step, em_m_step, fit_em, fit_em_with, EmOptions, EmState, EmTrace, MStepRule};
pub use mle::{fit_mle, fit_mle_with, MleOptions};
pub use moments::fit_moments;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::nbl::{nbl_ln_pmf, NblParams};

/// Observed counts and how often each occurs.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CountData {
    entries: Vec<(u64, u64)>,
    n: u64,
}

impl CountData {
    /// Builds a dataset from (count, frequency) pairs in any order.
    ///
    /// Duplicate counts and zero frequencies are rejected, as are datasets
    /// with fewer than two observations.
    pub fn new(mut entries: Vec<(u64, u64)>) -> Result<Self> {
        entries.sort_by_key(|e| e.0);
        for w in entries.windows(2) {
            if w[0].0 == w[1].0 {
                return Err(Error::InvalidData(format!("count {} listed twice", w[0].0)));
            }
        }
        if let Some(&(c, _)) = entries.iter().find(|e| e.1 == 0) {
            return Err(Error::InvalidData(format!("count {c} has zero frequency")));
        }
        let n = entries
            .iter()
            .try_fold(0u64, |acc, e| acc.checked_add(e.1))
            .ok_or_else(|| Error::InvalidData("total frequency overflows".into()))?;
        if n < 2 {
            return Err(Error::InvalidData(format!("need at least 2 observations, got {n}")));
        }
        Ok(CountData { entries, n })
    }

    pub fn entries(&self) -> &[(u64, u64)] {
        &self.entries
    }

    pub fn n(&self) -> u64 {
        self.n
    }

    pub fn max_count(&self) -> u64 {
        self.entries.last().map(|e| e.0).unwrap_or(0)
    }

    pub fn mean(&self) -> f64 {
        self.factorial_moment(1)
    }

    /// Sample variance with the n − 1 divisor.
    pub fn variance(&self) -> f64 {
        let n = self.n as f64;
        let m = self.mean();
        let ss: f64 = self
            .entries
            .iter()
            .map(|&(x, f)| f as f64 * (x as f64 - m).powi(2))
            .sum();
        ss / (n - 1.0)
    }

    /// Σ x(x−1)···(x−k+1)·freq / n.
    pub fn factorial_moment(&self, k: u32) -> f64 {
        let total: f64 = self
            .entries
            .iter()
            .map(|&(x, f)| {
                let falling: f64 = (0..k as u64).map(|j| x as f64 - j as f64).product();
                falling * f as f64
            })
            .sum();
        total / self.n as f64
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FitMethod {
    Moments,
    Mle,
    Em,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StdErrors {
    pub r: f64,
    pub theta: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct FitResult {
    pub params: NblParams,
    pub std_errors: Option<StdErrors>,
    pub log_likelihood: f64,
    pub method: FitMethod,
    pub iterations: u64,
    pub converged: bool,
}

/// ℓ(r, θ) = Σ freq · ln p(x), one pmf evaluation per distinct count.
pub fn log_likelihood(data: &CountData, params: NblParams) -> Result<f64> {
    let mut total = 0.0;
    for &(x, f) in data.entries() {
        total += f as f64 * nbl_ln_pmf(params, x)?.ln_value;
    }
    Ok(total)
}
