use super::MixingDensityParams;
use crate::error::{domain, Result};
use crate::specfun::{bessel_k_scaled, log_gamma};

/// Density of the Poisson rate Z = λ·G with G ~ Gamma(r, 1), λ ~ Lindley(θ):
///
/// f(z) = 2θ^{r/2+1} z^{r/2−1} / ((1+θ)Γ(r)) · [z K_{r−2}(2√(θz)) + √(θz) K_{r−1}(2√(θz))].
pub fn mixing_pdf(params: MixingDensityParams, z: f64) -> Result<f64> {
    if !(z > 0.0) || !z.is_finite() {
        return Err(domain(format!("mixing_pdf needs finite z > 0, got {z}")));
    }
    let (r, theta) = (params.r(), params.theta());
    let root = (theta * z).sqrt();
    let w = 2.0 * root;
    // scaled Bessel values carry e^{w}; it is removed in log space below
    let k2 = bessel_k_scaled(r - 2.0, w)?.value;
    let k1 = bessel_k_scaled(r - 1.0, w)?.value;
    let ln_front = std::f64::consts::LN_2 + (0.5 * r + 1.0) * theta.ln() + (0.5 * r - 1.0) * z.ln()
        - theta.ln_1p()
        - log_gamma(r)?;
    Ok((ln_front - w + (z * k2 + root * k1).ln()).exp())
}
