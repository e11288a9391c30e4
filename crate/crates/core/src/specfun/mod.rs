//! Real-valued special functions: log-gamma, Pochhammer symbols, digamma and
//! its inverse, the upper incomplete gamma function, Tricomi's confluent
//! hypergeometric function and the modified Bessel function of the second kind.

mod bessel;
mod gamma;
mod hyperu;

pub use bessel::{bessel_k, bessel_k_scaled};
pub use gamma::{digamma, inv_digamma, log_gamma, log_pochhammer, trigamma, upper_inc_gamma, EULER_MASCHERONI};
pub(crate) use hyperu::laplace_integral;
pub use hyperu::{hyp_u, ln_hyp_u, LnEval};

use crate::error::{Error, Result};

/// A function value together with an absolute error estimate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EvalResult {
    pub value: f64,
    pub abs_error_estimate: f64,
}

impl EvalResult {
    /// Builds a result, turning non-finite values into errors so that callers
    /// never see NaN or infinity inside an `EvalResult`.
    pub fn new(value: f64, abs_error_estimate: f64) -> Result<Self> {
        if value.is_nan() {
            return Err(Error::Domain("special function evaluated to NaN".into()));
        }
        if value.is_infinite() {
            return Err(Error::Overflow("special function overflowed".into()));
        }
        Ok(EvalResult {
            value,
            abs_error_estimate: abs_error_estimate.abs(),
        })
    }

    pub fn relative_error(&self) -> f64 {
        if self.value == 0.0 {
            self.abs_error_estimate
        } else {
            self.abs_error_estimate / self.value.abs()
        }
    }
}
