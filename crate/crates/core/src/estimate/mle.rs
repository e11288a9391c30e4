use super::{log_likelihood, CountData, FitMethod, FitResult, StdErrors};
use crate::error::{Error, Result};
use crate::nbl::NblParams;

#[derive(Debug, Clone, Copy)]
pub struct MleOptions {
    /// Stop when max − min of ℓ over the simplex falls below this.
    pub spread_tol: f64,
    pub max_evals: usize,
    /// Initial simplex edge in (log r, log θ).
    pub initial_step: f64,
}

impl Default for MleOptions {
    fn default() -> Self {
        MleOptions {
            spread_tol: 1e-10,
            max_evals: 10_000,
            initial_step: 0.1,
        }
    }
}

pub fn fit_mle(data: &CountData, start: NblParams) -> Result<FitResult> {
    fit_mle_with(data, start, &MleOptions::default())
}

/// Maximizes ℓ with a Nelder–Mead simplex over (log r, log θ), restarting
/// once from the best vertex, then attaches Hessian standard errors.
pub fn fit_mle_with(data: &CountData, start: NblParams, opts: &MleOptions) -> Result<FitResult> {
    let mut evals = 0usize;
    let mut objective = |y: [f64; 2]| -> Result<f64> {
        evals += 1;
        if evals > opts.max_evals {
            return Err(Error::NonConvergence(format!(
                "likelihood maximization exceeded {} evaluations",
                opts.max_evals
            )));
        }
        let p = match NblParams::new(y[0].exp(), y[1].exp()) {
            Ok(p) => p,
            Err(_) => return Ok(f64::INFINITY),
        };
        Ok(match log_likelihood(data, p) {
            Ok(l) if l.is_finite() => -l,
            // points where the pmf cannot be evaluated are treated as infeasible
            Ok(_) | Err(Error::NonConvergence(_)) | Err(Error::Domain(_)) | Err(Error::Overflow(_)) => f64::INFINITY,
            Err(e) => return Err(e),
        })
    };
    let y0 = [start.r().ln(), start.theta().ln()];
    let (mut best, mut fbest, mut iterations) = nelder_mead(&mut objective, y0, opts)?;
    let (again, fagain, more) = nelder_mead(&mut objective, best, opts)?;
    iterations += more;
    if fagain <= fbest {
        best = again;
        fbest = fagain;
    }
    if !fbest.is_finite() {
        return Err(Error::NonConvergence("likelihood is not finite near the start".into()));
    }
    // the ridge along which ℓ is flat leaves the simplex short of the
    // stationary point; a few Newton steps finish the job
    (best, fbest) = newton_polish(&mut objective, best, fbest)?;
    let params = NblParams::new(best[0].exp(), best[1].exp())?;
    let std_errors = hessian_std_errors(data, params)?;
    Ok(FitResult {
        params,
        std_errors,
        log_likelihood: -fbest,
        method: FitMethod::Mle,
        iterations,
        converged: true,
    })
}

type Point = [f64; 2];

fn lerp(a: Point, b: Point, t: f64) -> Point {
    [a[0] + t * (b[0] - a[0]), a[1] + t * (b[1] - a[1])]
}

/// Minimizes `f`; returns (argmin, min, iterations).
fn nelder_mead<F>(f: &mut F, start: Point, opts: &MleOptions) -> Result<(Point, f64, u64)>
where
    F: FnMut(Point) -> Result<f64>,
{
    let h = opts.initial_step;
    let mut simplex = [start, [start[0] + h, start[1]], [start[0], start[1] + h]];
    let mut values = [f(simplex[0])?, f(simplex[1])?, f(simplex[2])?];
    let mut iterations = 0u64;
    loop {
        let mut order = [0usize, 1, 2];
        order.sort_by(|&i, &j| values[i].total_cmp(&values[j]));
        simplex = [simplex[order[0]], simplex[order[1]], simplex[order[2]]];
        values = [values[order[0]], values[order[1]], values[order[2]]];
        if values[0].is_finite() && values[2] - values[0] < opts.spread_tol {
            return Ok((simplex[0], values[0], iterations));
        }
        iterations += 1;
        let centroid = lerp(simplex[0], simplex[1], 0.5);
        let reflected = lerp(centroid, simplex[2], -1.0);
        let fr = f(reflected)?;
        if fr < values[0] {
            let expanded = lerp(centroid, simplex[2], -2.0);
            let fe = f(expanded)?;
            if fe < fr {
                simplex[2] = expanded;
                values[2] = fe;
            } else {
                simplex[2] = reflected;
                values[2] = fr;
            }
            continue;
        }
        if fr < values[1] {
            simplex[2] = reflected;
            values[2] = fr;
            continue;
        }
        let (contracted, limit) = if fr < values[2] {
            (lerp(centroid, reflected, 0.5), fr)
        } else {
            (lerp(centroid, simplex[2], 0.5), values[2])
        };
        let fc = f(contracted)?;
        if fc < limit {
            simplex[2] = contracted;
            values[2] = fc;
            continue;
        }
        for i in 1..3 {
            simplex[i] = lerp(simplex[0], simplex[i], 0.5);
            values[i] = f(simplex[i])?;
        }
    }
}

/// Damped Newton steps on `f` from a point near its minimum, with
/// central-difference derivatives. Stops when a step no longer lowers `f`.
fn newton_polish<F>(f: &mut F, mut x: Point, mut fx: f64) -> Result<(Point, f64)>
where
    F: FnMut(Point) -> Result<f64>,
{
    const H: f64 = 1e-4;
    const HH: f64 = 1e-3;
    for _ in 0..8 {
        let at = |f: &mut F, d0: f64, d1: f64| f([x[0] + d0, x[1] + d1]);
        let g = [
            (at(f, H, 0.0)? - at(f, -H, 0.0)?) / (2.0 * H),
            (at(f, 0.0, H)? - at(f, 0.0, -H)?) / (2.0 * H),
        ];
        if !(g[0].is_finite() && g[1].is_finite()) || g[0].hypot(g[1]) < 1e-8 {
            break;
        }
        let a = (at(f, HH, 0.0)? - 2.0 * fx + at(f, -HH, 0.0)?) / (HH * HH);
        let d = (at(f, 0.0, HH)? - 2.0 * fx + at(f, 0.0, -HH)?) / (HH * HH);
        let b = (at(f, HH, HH)? - at(f, HH, -HH)? - at(f, -HH, HH)? + at(f, -HH, -HH)?) / (4.0 * HH * HH);
        let det = a * d - b * b;
        if !(a > 0.0 && det > 0.0) {
            break;
        }
        let step = [-(d * g[0] - b * g[1]) / det, -(a * g[1] - b * g[0]) / det];
        let mut t = 1.0;
        let mut moved = false;
        for _ in 0..10 {
            let cand = [x[0] + t * step[0], x[1] + t * step[1]];
            let fc = f(cand)?;
            if fc <= fx {
                x = cand;
                fx = fc;
                moved = true;
                break;
            }
            t *= 0.5;
        }
        if !moved {
            break;
        }
    }
    Ok((x, fx))
}

/// Central-difference Hessian of ℓ in (r, θ), with steps 1e-4·max(1, |p|).
pub(crate) fn log_likelihood_hessian(data: &CountData, p: NblParams) -> Result<[[f64; 2]; 2]> {
    let x = [p.r(), p.theta()];
    let h = [1e-4 * x[0].abs().max(1.0), 1e-4 * x[1].abs().max(1.0)];
    let ell = |dr: f64, dt: f64| -> Result<f64> { log_likelihood(data, NblParams::new(x[0] + dr, x[1] + dt)?) };
    let f0 = ell(0.0, 0.0)?;
    let hrr = (ell(h[0], 0.0)? - 2.0 * f0 + ell(-h[0], 0.0)?) / (h[0] * h[0]);
    let htt = (ell(0.0, h[1])? - 2.0 * f0 + ell(0.0, -h[1])?) / (h[1] * h[1]);
    let hrt = (ell(h[0], h[1])? - ell(h[0], -h[1])? - ell(-h[0], h[1])? + ell(-h[0], -h[1])?) / (4.0 * h[0] * h[1]);
    Ok([[hrr, hrt], [hrt, htt]])
}

/// Square roots of the diagonal of (−H)⁻¹, or `None` when −H is not positive definite.
fn hessian_std_errors(data: &CountData, p: NblParams) -> Result<Option<StdErrors>> {
    let hess = match log_likelihood_hessian(data, p) {
        Ok(h) => h,
        Err(Error::Domain(_)) => return Ok(None),
        Err(e) => return Err(e),
    };
    let (a, b, d) = (-hess[0][0], -hess[0][1], -hess[1][1]);
    let det = a * d - b * b;
    if !(a > 0.0 && det > 0.0) {
        return Ok(None);
    }
    Ok(Some(StdErrors {
        r: (d / det).sqrt(),
        theta: (a / det).sqrt(),
    }))
}
