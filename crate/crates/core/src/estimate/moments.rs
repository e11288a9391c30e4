use super::{log_likelihood, CountData, FitMethod, FitResult};
use crate::error::{Error, Result};
use crate::nbl::NblParams;

const BRACKET: (f64, f64) = (1e-8, 1e6);
const MAX_ITER: u64 = 500;

/// Matching the first two factorial moments leaves a single equation in θ,
/// θ(2+θ)² f₂ − 2 f₁ (3+θ) [θ(1 + f₁(1+θ)) + 2] = 0, after which
/// r = f₁ θ(1+θ)/(2+θ).
pub fn fit_moments(data: &CountData) -> Result<FitResult> {
    let f1 = data.factorial_moment(1);
    let f2 = data.factorial_moment(2);
    if f1 == 0.0 || f2 == 0.0 {
        return Err(Error::DegenerateData(format!(
            "factorial moments f1={f1}, f2={f2}: all counts are 0 or 1"
        )));
    }
    let h = |t: f64| t * (2.0 + t).powi(2) * f2 - 2.0 * f1 * (3.0 + t) * (t * (1.0 + f1 * (1.0 + t)) + 2.0);
    let (theta, iterations) = find_root(h, BRACKET.0, BRACKET.1)?;
    let r = f1 * theta * (1.0 + theta) / (2.0 + theta);
    let params = NblParams::new(r, theta)?;
    Ok(FitResult {
        params,
        std_errors: None,
        log_likelihood: log_likelihood(data, params)?,
        method: FitMethod::Moments,
        iterations,
        converged: true,
    })
}

/// Secant steps in log θ, falling back to geometric bisection whenever the
/// secant point leaves the bracket or fails to halve it.
fn find_root<F: Fn(f64) -> f64>(h: F, lo: f64, hi: f64) -> Result<(f64, u64)> {
    let (mut a, mut b) = (lo, hi);
    let (mut fa, mut fb) = (h(a), h(b));
    if fa == 0.0 {
        return Ok((a, 0));
    }
    if fb == 0.0 {
        return Ok((b, 0));
    }
    if fa.signum() == fb.signum() {
        return Err(Error::NoRoot(format!(
            "moment equation has no sign change on [{lo:e}, {hi:e}] (h={fa:e}, {fb:e})"
        )));
    }
    for it in 1..=MAX_ITER {
        let (la, lb) = (a.ln(), b.ln());
        let width = lb - la;
        let mut lc = lb - fb * (lb - la) / (fb - fa);
        if !(lc > la && lc < lb) || !lc.is_finite() {
            lc = 0.5 * (la + lb);
        }
        let c = lc.exp();
        let fc = h(c);
        if fc == 0.0 {
            return Ok((c, it));
        }
        if fc.signum() == fa.signum() {
            a = c;
            fa = fc;
        } else {
            b = c;
            fb = fc;
        }
        if b.ln() - a.ln() > 0.5 * width {
            // slow secant progress: force a bisection
            let m = (0.5 * (a.ln() + b.ln())).exp();
            let fm = h(m);
            if fm.signum() == fa.signum() {
                a = m;
                fa = fm;
            } else {
                b = m;
                fb = fm;
            }
        }
        if (b - a) <= 1e-10 * b {
            let root = if fa.abs() < fb.abs() { a } else { b };
            return Ok((root, it));
        }
    }
    Err(Error::NonConvergence("moment equation root search".into()))
}
