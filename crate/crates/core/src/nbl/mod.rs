//! The negative binomial–Lindley distribution and its building blocks.
//!
//! X | λ ~ NB(r, λ) with λ ~ Lindley(θ). The pmf is available from the
//! U-function integral ([`nbl_pmf_direct`]) and from the probability
//! recurrence in r ([`nbl_pmf_recursive`]).

mod mixing;
mod pmf;
mod posterior;

pub use mixing::mixing_pdf;
pub(crate) use pmf::{clamp_small_negatives, family_bits, seed_bits, zero_prob_family};
pub use pmf::{nbl_ln_pmf, nbl_pmf_direct, nbl_pmf_recursive};
pub use posterior::{ln_posterior_moment, posterior_expectation, posterior_log_moments, PosteriorLogs};

use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::specfun::{log_gamma, log_pochhammer};

fn check_positive(name: &str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(domain(format!("{name} must be finite and > 0, got {v}")))
    }
}

/// NBL(r, θ) parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawNbl")]
pub struct NblParams {
    r: f64,
    theta: f64,
}

#[derive(Deserialize)]
struct RawNbl {
    r: f64,
    theta: f64,
}

impl TryFrom<RawNbl> for NblParams {
    type Error = Error;
    fn try_from(raw: RawNbl) -> Result<Self> {
        NblParams::new(raw.r, raw.theta)
    }
}

impl NblParams {
    pub fn new(r: f64, theta: f64) -> Result<Self> {
        check_positive("r", r)?;
        check_positive("theta", theta)?;
        Ok(NblParams { r, theta })
    }

    pub fn r(&self) -> f64 {
        self.r
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }
}

/// NB(r, λ) parameters: p(x) = C(r+x−1, x) (1+λ)^{−r} (λ/(1+λ))^x.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct NbParams {
    r: f64,
    lambda: f64,
}

impl NbParams {
    pub fn new(r: f64, lambda: f64) -> Result<Self> {
        check_positive("r", r)?;
        check_positive("lambda", lambda)?;
        Ok(NbParams { r, lambda })
    }

    pub fn r(&self) -> f64 {
        self.r
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LindleyParams {
    theta: f64,
}

impl LindleyParams {
    pub fn new(theta: f64) -> Result<Self> {
        check_positive("theta", theta)?;
        Ok(LindleyParams { theta })
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }
}

/// Parameters of the gamma–Lindley density of the Poisson rate Z.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MixingDensityParams {
    r: f64,
    theta: f64,
}

impl MixingDensityParams {
    pub fn new(r: f64, theta: f64) -> Result<Self> {
        check_positive("r", r)?;
        check_positive("theta", theta)?;
        Ok(MixingDensityParams { r, theta })
    }

    pub fn r(&self) -> f64 {
        self.r
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }
}

impl From<NblParams> for MixingDensityParams {
    fn from(p: NblParams) -> Self {
        MixingDensityParams { r: p.r, theta: p.theta }
    }
}

pub(crate) fn ln_factorial(x: u64) -> f64 {
    log_gamma(x as f64 + 1.0).expect("x + 1 > 0")
}

/// Negative binomial pmf, evaluated in log space.
pub fn nb_pmf(params: NbParams, x: u64) -> f64 {
    let NbParams { r, lambda } = params;
    let ln_binom = log_pochhammer(r, x).expect("r > 0") - ln_factorial(x);
    let ln_p = ln_binom - r * lambda.ln_1p() + x as f64 * (lambda.ln() - lambda.ln_1p());
    ln_p.exp()
}

/// Lindley density θ²/(1+θ) (1+λ) e^{−θλ}.
pub fn lindley_pdf(params: LindleyParams, lam: f64) -> Result<f64> {
    if !(lam > 0.0) {
        return Err(domain(format!("lindley_pdf needs lambda > 0, got {lam}")));
    }
    let t = params.theta;
    Ok(t * t / (1.0 + t) * (1.0 + lam) * (-t * lam).exp())
}

/// μ_[k] = (r)_k k! (k+θ+1) / ((1+θ) θ^k).
pub fn nbl_factorial_moment(params: NblParams, k: u32) -> Result<f64> {
    if k == 0 {
        return Err(domain("factorial moment order must be >= 1"));
    }
    let NblParams { r, theta } = params;
    let kf = k as f64;
    let ln = log_pochhammer(r, k as u64)? + ln_factorial(k as u64) + (kf + theta + 1.0).ln()
        - theta.ln_1p()
        - kf * theta.ln();
    let v = ln.exp();
    if v.is_finite() {
        Ok(v)
    } else {
        Err(Error::Overflow(format!("factorial moment of order {k}")))
    }
}

pub fn nbl_mean(params: NblParams) -> f64 {
    let NblParams { r, theta } = params;
    (2.0 + theta) / (1.0 + theta) * r / theta
}

pub fn nbl_variance(params: NblParams) -> f64 {
    let NblParams { r, theta } = params;
    let t1 = 1.0 + theta;
    r * (6.0 * t1 + (4.0 + theta) * (t1 * theta + r * theta) + 2.0 * r) / (theta * theta * t1 * t1)
}
