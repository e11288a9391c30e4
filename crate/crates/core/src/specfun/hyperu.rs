//! Tricomi's function from its Laplace-type integral
//! U(a, b, z) = Γ(a)⁻¹ ∫₀^∞ τ^{a−1} (1+τ)^{b−a−1} e^{−zτ} dτ,  a > 0, z > 0.
//!
//! The half line is cut at the stationary points of the integrand and then at
//! doubling abscissae until the integrand is negligible, so every piece is
//! monotone. Each piece is integrated after scaling by its own maximum and the
//! pieces are combined in log space.

use crate::error::{domain, Result};
use crate::quad::{integrate, Tolerance};

use super::{log_gamma, EvalResult};

/// A positive quantity carried as its natural logarithm.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LnEval {
    pub ln_value: f64,
    /// Absolute error of `ln_value`, i.e. roughly the relative error of the value.
    pub abs_error_estimate: f64,
}

const REL_TOL: f64 = 1e-13;
const TAIL_DROP: f64 = 60.0;

struct Integrand {
    a: f64,
    c: f64,
    z: f64,
}

impl Integrand {
    fn log_phi(&self, t: f64) -> f64 {
        let pow = if self.a == 1.0 { 0.0 } else { (self.a - 1.0) * t.ln() };
        pow + self.c * t.ln_1p() - self.z * t
    }

    /// Log of (1+τ)^c e^{−zτ}, the part that stays bounded at τ = 0.
    fn log_smooth(&self, t: f64) -> f64 {
        self.c * t.ln_1p() - self.z * t
    }
}

struct Piece {
    log_scale: f64,
    value: f64,
    abs_error: f64,
    weighted: Vec<f64>,
}

pub(crate) type Weight<'a> = &'a dyn Fn(f64) -> f64;

fn quad_tol() -> Tolerance {
    Tolerance::new(0.0, REL_TOL).with_max_intervals(2000)
}

fn weighted_tol(base: f64, h_mid: f64) -> Tolerance {
    Tolerance::new(1e-12 * base * (1.0 + h_mid.abs()), 1e-12).with_max_intervals(2000)
}

/// ∫₀^p τ^{a−1} g(τ) dτ with τ = p w^{1/a}, which turns it into
/// (p^a / a) ∫₀¹ g(p w^{1/a}) dw and removes the algebraic endpoint behaviour.
fn head_piece(f: &Integrand, p: f64, weights: &[Weight]) -> Result<Piece> {
    let a = f.a;
    let mut log_max = f.log_smooth(0.0).max(f.log_smooth(p));
    // interior maximum of the smooth factor: c/(1+τ) = z
    let t_g = f.c / f.z - 1.0;
    if t_g > 0.0 && t_g < p {
        log_max = log_max.max(f.log_smooth(t_g));
    }
    let prefactor = a * p.ln() - a.ln();
    let tau = |w: f64| p * w.powf(1.0 / a);
    let base = |w: f64| (f.log_smooth(tau(w)) - log_max).exp();
    let q = integrate(base, 0.0, 1.0, quad_tol())?;
    let mut weighted = Vec::with_capacity(weights.len());
    for h in weights {
        let tol = weighted_tol(q.value, h(tau(0.5)));
        weighted.push(integrate(|w| base(w) * h(tau(w)), 0.0, 1.0, tol)?.value);
    }
    Ok(Piece {
        log_scale: log_max + prefactor,
        value: q.value,
        abs_error: q.abs_error,
        weighted,
    })
}

fn plain_piece(f: &Integrand, lo: f64, hi: f64, weights: &[Weight]) -> Result<Piece> {
    let log_max = f.log_phi(lo).max(f.log_phi(hi));
    let base = |t: f64| (f.log_phi(t) - log_max).exp();
    let q = integrate(base, lo, hi, quad_tol())?;
    let mut weighted = Vec::with_capacity(weights.len());
    for h in weights {
        let tol = weighted_tol(q.value, h(0.5 * (lo + hi)));
        weighted.push(integrate(|t| base(t) * h(t), lo, hi, tol)?.value);
    }
    Ok(Piece {
        log_scale: log_max,
        value: q.value,
        abs_error: q.abs_error,
        weighted,
    })
}

/// ln ∫ φ, its error, and the φ-weighted averages of each weight function,
/// where φ(τ) = τ^{a−1}(1+τ)^{c}e^{−zτ} on (0, ∞).
pub(crate) struct LaplaceIntegral {
    pub ln_value: f64,
    pub rel_error: f64,
    pub averages: Vec<f64>,
}

pub(crate) fn laplace_integral(a: f64, c: f64, z: f64, weights: &[Weight]) -> Result<LaplaceIntegral> {
    let f = Integrand { a, c, z };
    // stationary points: z τ² − (b − 2 − z) τ − (a − 1) = 0, with b − 2 = a + c − 1
    let beta = a + c - 1.0 - z;
    let disc = beta * beta + 4.0 * z * (a - 1.0);
    let mut stationary: Vec<f64> = Vec::new();
    if disc >= 0.0 {
        let s = disc.sqrt();
        // numerically stable pair of roots
        let q = -0.5 * (-beta - beta.signum() * s);
        for root in [q / z, if q != 0.0 { -(a - 1.0) / q } else { f64::NAN }] {
            if root.is_finite() && root > 0.0 {
                stationary.push(root);
            }
        }
    }
    stationary.sort_by(|x, y| x.total_cmp(y));
    stationary.dedup();

    let scale = 1.0 / z;
    let head_end = if a < 2.0 { Some(scale.min(1.0)) } else { None };

    let mut pieces = Vec::new();
    let mut cuts: Vec<f64> = vec![head_end.unwrap_or(0.0)];
    if let Some(p) = head_end {
        pieces.push(head_piece(&f, p, weights)?);
    }
    for &s in &stationary {
        if s > *cuts.last().unwrap() * (1.0 + 1e-12) {
            cuts.push(s);
        }
    }
    let mut reference = pieces.first().map(|p: &Piece| p.log_scale).unwrap_or(f64::NEG_INFINITY);
    for &s in &stationary {
        reference = reference.max(f.log_phi(s));
    }
    let last_stationary = stationary.last().copied().unwrap_or(0.0);
    let mut t = cuts.last().unwrap().max(scale).max(last_stationary) * 2.0;
    if t <= *cuts.last().unwrap() {
        t = *cuts.last().unwrap() * 2.0 + 1.0;
    }
    reference = reference.max(f.log_phi(t));
    loop {
        cuts.push(t);
        let lp = f.log_phi(t);
        let slope = (a - 1.0) / t + c / (1.0 + t) - z;
        if lp < reference - TAIL_DROP && slope < 0.0 {
            break;
        }
        if cuts.len() > 4000 {
            return Err(crate::error::Error::NonConvergence(format!(
                "U integrand does not decay (a={a}, b={}, z={z})",
                c + a + 1.0
            )));
        }
        t *= 2.0;
    }
    for w in cuts.windows(2) {
        if w[1] > w[0] {
            pieces.push(plain_piece(&f, w[0], w[1], weights)?);
        }
    }
    let top = pieces.iter().map(|p| p.log_scale).fold(f64::NEG_INFINITY, f64::max);
    let mut total = 0.0;
    let mut err = 0.0;
    let mut sums = vec![0.0; weights.len()];
    for p in &pieces {
        let w = (p.log_scale - top).exp();
        total += w * p.value;
        err += w * p.abs_error;
        for (acc, v) in sums.iter_mut().zip(&p.weighted) {
            *acc += w * v;
        }
    }
    if !(total > 0.0) {
        return Err(domain(format!(
            "U integral vanished numerically (a={a}, b={}, z={z})",
            c + a + 1.0
        )));
    }
    Ok(LaplaceIntegral {
        ln_value: top + total.ln(),
        rel_error: err / total + f64::EPSILON * (4.0 + top.abs()),
        averages: sums.into_iter().map(|v| v / total).collect(),
    })
}

/// ln U(a, b, z) for `a > 0`, `z > 0` and any real `b`.
pub fn ln_hyp_u(a: f64, b: f64, z: f64) -> Result<LnEval> {
    if !(a > 0.0) || !a.is_finite() {
        return Err(domain(format!("U(a, b, z) needs a > 0, got a={a}")));
    }
    if !(z > 0.0) || !z.is_finite() {
        return Err(domain(format!("U(a, b, z) needs z > 0, got z={z}")));
    }
    if !b.is_finite() {
        return Err(domain(format!("U(a, b, z) needs finite b, got b={b}")));
    }
    let li = laplace_integral(a, b - a - 1.0, z, &[])?;
    let lg = log_gamma(a)?;
    Ok(LnEval {
        ln_value: li.ln_value - lg,
        abs_error_estimate: li.rel_error + f64::EPSILON * lg.abs(),
    })
}

/// Tricomi's confluent hypergeometric function U(a, b, z).
pub fn hyp_u(a: f64, b: f64, z: f64) -> Result<EvalResult> {
    let l = ln_hyp_u(a, b, z)?;
    let value = l.ln_value.exp();
    EvalResult::new(value, value * l.abs_error_estimate.exp_m1())
}
