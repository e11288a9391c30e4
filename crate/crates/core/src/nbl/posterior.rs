use super::NblParams;
use crate::error::{domain, Result};
use crate::specfun::{laplace_integral, ln_hyp_u, log_gamma, LnEval};

/// ln E(λ^s | X = x).
///
/// The posterior of λ given x is proportional to λ^x (1+λ)^{1−r−x} e^{−θλ}, so
/// E(λ^s | x) = Γ(x+1+s) U(x+1+s, 3−r+s, θ) / (Γ(x+1) U(x+1, 3−r, θ)),
/// which is finite whenever x + 1 + s > 0.
pub fn ln_posterior_moment(params: NblParams, x: u64, s: f64) -> Result<LnEval> {
    let a = x as f64 + 1.0;
    if !(a + s > 0.0) || !s.is_finite() {
        return Err(domain(format!(
            "posterior moment of order {s} at x={x} needs x + 1 + s > 0"
        )));
    }
    if s == 0.0 {
        return Ok(LnEval {
            ln_value: 0.0,
            abs_error_estimate: 0.0,
        });
    }
    let b = 3.0 - params.r();
    let theta = params.theta();
    let num = ln_hyp_u(a + s, b + s, theta)?;
    let den = ln_hyp_u(a, b, theta)?;
    let lg_num = log_gamma(a + s)?;
    let lg_den = log_gamma(a)?;
    Ok(LnEval {
        ln_value: lg_num - lg_den + num.ln_value - den.ln_value,
        abs_error_estimate: num.abs_error_estimate
            + den.abs_error_estimate
            + f64::EPSILON * (lg_num.abs() + lg_den.abs()),
    })
}

/// E(λ^s | X = x) for the NBL mixing variable λ.
pub fn posterior_expectation(params: NblParams, x: u64, s: f64) -> Result<f64> {
    Ok(ln_posterior_moment(params, x, s)?.ln_value.exp())
}

/// Posterior means of log-transforms of λ given X = x.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PosteriorLogs {
    /// E(log λ | x)
    pub log_lambda: f64,
    /// E(log(λ + x) | x)
    pub log_lambda_plus_x: f64,
    /// E(log(1 + λ) | x)
    pub log1p_lambda: f64,
}

pub fn posterior_log_moments(params: NblParams, x: u64) -> Result<PosteriorLogs> {
    let xf = x as f64;
    let log_l = |t: f64| t.ln();
    let log_lx = |t: f64| (t + xf).ln();
    let log_1p = |t: f64| t.ln_1p();
    let li = laplace_integral(
        xf + 1.0,
        1.0 - params.r() - xf,
        params.theta(),
        &[&log_l, &log_lx, &log_1p],
    )?;
    Ok(PosteriorLogs {
        log_lambda: li.averages[0],
        log_lambda_plus_x: li.averages[1],
        log1p_lambda: li.averages[2],
    })
}
