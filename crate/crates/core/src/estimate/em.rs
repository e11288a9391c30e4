use rayon::prelude::*;

use super::{log_likelihood, CountData, FitMethod, FitResult};
use crate::error::{Error, Result};
use crate::nbl::{posterior_expectation, posterior_log_moments, NblParams};
use crate::specfun::{digamma, inv_digamma};

/// How the M-step updates r.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum MStepRule {
    /// Ψ(r') = mean[Ψ(r̂ + xᵢ) − E(log(1+λᵢ) | xᵢ)], the maximizer of the
    /// expected complete-data likelihood with the gamma rate, the NB success
    /// odds and λ all latent. Never decreases ℓ.
    #[default]
    Complete,
    /// Ψ(r') = mean[sᵢ − tᵢ + Ψ(r̂ + xᵢ)] with sᵢ = E(log λᵢ | xᵢ) and
    /// tᵢ = E(log(λᵢ + xᵢ) | xᵢ). Not an ascent step in general; kept for
    /// comparison.
    AsDisplayed,
}

/// Current estimates plus pseudo-values, one per distinct count of the data
/// (in the order of [`CountData::entries`]).
#[derive(Debug, Clone, PartialEq)]
pub struct EmState {
    pub r_hat: f64,
    pub theta_hat: f64,
    /// E(λ | x)
    pub pseudo_r: Vec<f64>,
    /// E(log λ | x)
    pub pseudo_s: Vec<f64>,
    /// E(log(λ + x) | x)
    pub pseudo_t: Vec<f64>,
    /// E(log(1 + λ) | x)
    pub pseudo_u: Vec<f64>,
}

impl EmState {
    pub fn new(params: NblParams) -> Self {
        EmState {
            r_hat: params.r(),
            theta_hat: params.theta(),
            pseudo_r: Vec::new(),
            pseudo_s: Vec::new(),
            pseudo_t: Vec::new(),
            pseudo_u: Vec::new(),
        }
    }

    pub fn params(&self) -> Result<NblParams> {
        NblParams::new(self.r_hat, self.theta_hat)
    }
}

pub fn em_e_step(data: &CountData, state: &EmState) -> Result<EmState> {
    let params = state.params()?;
    let rows: Vec<Result<[f64; 4]>> = data
        .entries()
        .par_iter()
        .map(|&(x, _)| {
            let r = posterior_expectation(params, x, 1.0)?;
            let logs = posterior_log_moments(params, x)?;
            Ok([r, logs.log_lambda, logs.log_lambda_plus_x, logs.log1p_lambda])
        })
        .collect();
    let mut next = EmState::new(params);
    for row in rows {
        let [r, s, t, u] = row?;
        next.pseudo_r.push(r);
        next.pseudo_s.push(s);
        next.pseudo_t.push(t);
        next.pseudo_u.push(u);
    }
    Ok(next)
}

pub fn em_m_step(data: &CountData, state: &EmState, rule: MStepRule) -> Result<EmState> {
    let k = data.entries().len();
    if [&state.pseudo_r, &state.pseudo_s, &state.pseudo_t, &state.pseudo_u]
        .iter()
        .any(|v| v.len() != k)
    {
        return Err(Error::InvalidData("pseudo-values missing: run the E-step first".into()));
    }
    let n = data.n() as f64;
    let mut sum_r = 0.0;
    let mut r_arg = 0.0;
    for (i, &(x, f)) in data.entries().iter().enumerate() {
        let f = f as f64;
        sum_r += f * state.pseudo_r[i];
        let psi = digamma(state.r_hat + x as f64)?;
        r_arg += f * match rule {
            MStepRule::Complete => psi - state.pseudo_u[i],
            MStepRule::AsDisplayed => state.pseudo_s[i] - state.pseudo_t[i] + psi,
        };
    }
    let theta = (n - sum_r + (sum_r * sum_r + 6.0 * n * sum_r + n * n).sqrt()) / (2.0 * sum_r);
    let r = inv_digamma(r_arg / n)?;
    let mut next = state.clone();
    next.r_hat = r;
    next.theta_hat = theta;
    next.params()?;
    Ok(next)
}

#[derive(Debug, Clone, Copy)]
pub struct EmOptions {
    /// Stop when |Δℓ / ℓ| falls below this.
    pub tol: f64,
    pub max_iter: u64,
    pub rule: MStepRule,
}

impl Default for EmOptions {
    fn default() -> Self {
        EmOptions {
            tol: 1e-10,
            max_iter: 2000,
            rule: MStepRule::Complete,
        }
    }
}

/// ℓ after each iteration, starting with ℓ at the start point.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct EmTrace {
    pub log_likelihood: Vec<f64>,
}

pub fn fit_em(data: &CountData, start: NblParams, tol: f64, max_iter: u64) -> Result<FitResult> {
    let opts = EmOptions {
        tol,
        max_iter,
        ..EmOptions::default()
    };
    Ok(fit_em_with(data, start, &opts)?.0)
}

/// Runs EM until the relative change of ℓ drops below `opts.tol`. Hitting
/// `max_iter` is not an error: the last iterate comes back with
/// `converged = false`.
pub fn fit_em_with(data: &CountData, start: NblParams, opts: &EmOptions) -> Result<(FitResult, EmTrace)> {
    let mut state = EmState::new(start);
    let mut ell = log_likelihood(data, start)?;
    let mut trace = EmTrace {
        log_likelihood: vec![ell],
    };
    let mut converged = opts.tol.is_infinite();
    let mut iterations = 0;
    while !converged && iterations < opts.max_iter {
        state = em_e_step(data, &state)?;
        state = em_m_step(data, &state, opts.rule)?;
        iterations += 1;
        let next = log_likelihood(data, state.params()?)?;
        trace.log_likelihood.push(next);
        converged = ((next - ell) / ell).abs() < opts.tol;
        ell = next;
    }
    let fit = FitResult {
        params: state.params()?,
        std_errors: None,
        log_likelihood: ell,
        method: FitMethod::Em,
        iterations,
        converged,
    };
    Ok((fit, trace))
}
