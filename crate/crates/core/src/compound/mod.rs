//! Aggregate claims S = Y₁ + … + Y_X with X ~ NBL(r, θ).
//!
//! Both solvers use the recurrence in r shared with the pmf: the law of S
//! under r needs the law under r+1 one step back, so the family
//! g(·; r+k) is built as a triangle. Writing the law of S as the atom
//! p_r(0) at zero plus the rest, the atom enters the recursion only at y = 0
//! (lattice case) or as the forcing term r(p_r(0) − p_{r+1}(0)) f(y)
//! (continuous case).

mod continuous;
mod discrete;
mod montecarlo;

pub use continuous::{
    compound_continuous, compound_continuous_fixed_mesh, compound_continuous_with, ContinuousOptions,
};
pub use discrete::compound_discrete;
pub use montecarlo::{compound_monte_carlo, EmpiricalCdf};

use std::fmt;
use std::sync::Arc;

use rand::RngCore;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::quad::{integrate_breakpoints, Tolerance};

/// Claim sizes on the positive integers.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DiscreteSeverity {
    /// pmf[s] = P(Y = s); pmf[0] is always 0.
    pmf: Vec<f64>,
}

impl DiscreteSeverity {
    /// Builds a severity from (size, probability) pairs.
    pub fn new(points: &[(u64, f64)]) -> Result<Self> {
        let max = points.iter().map(|p| p.0).max().unwrap_or(0) as usize;
        let mut pmf = vec![0.0; max + 1];
        for &(s, p) in points {
            if !(p >= 0.0) || !p.is_finite() {
                return Err(Error::InvalidData(format!("severity probability {p} at {s}")));
            }
            if s == 0 && p > 0.0 {
                return Err(Error::SeverityMassAtZero(p));
            }
            pmf[s as usize] += p;
        }
        let total: f64 = pmf.iter().sum();
        if (total - 1.0).abs() > 1e-12 {
            return Err(Error::UnnormalizedSeverity(total));
        }
        Ok(DiscreteSeverity { pmf })
    }

    pub fn degenerate(size: u64) -> Result<Self> {
        DiscreteSeverity::new(&[(size, 1.0)])
    }

    /// Uniform on {lo, …, hi}.
    pub fn uniform(lo: u64, hi: u64) -> Result<Self> {
        if lo > hi {
            return Err(Error::InvalidData(format!("empty range {lo}..={hi}")));
        }
        let p = 1.0 / (hi - lo + 1) as f64;
        let pts: Vec<_> = (lo..=hi).map(|s| (s, p)).collect();
        DiscreteSeverity::new(&pts)
    }

    /// Geometric P(Y = s) ∝ (1−q) q^{s−1} on {1, …, max}, renormalized.
    pub fn geometric_truncated(q: f64, max: u64) -> Result<Self> {
        if !(q > 0.0 && q < 1.0) || max == 0 {
            return Err(Error::InvalidData(format!("geometric severity q={q}, max={max}")));
        }
        let raw: Vec<f64> = (1..=max).map(|s| (1.0 - q) * q.powi(s as i32 - 1)).collect();
        let total: f64 = raw.iter().sum();
        let pts: Vec<_> = raw.iter().enumerate().map(|(i, p)| (i as u64 + 1, p / total)).collect();
        DiscreteSeverity::new(&pts)
    }

    pub fn prob(&self, s: u64) -> f64 {
        self.pmf.get(s as usize).copied().unwrap_or(0.0)
    }

    pub fn max_size(&self) -> u64 {
        (self.pmf.len() - 1) as u64
    }

    pub fn mean(&self) -> f64 {
        self.pmf.iter().enumerate().map(|(s, p)| s as f64 * p).sum()
    }

    pub(crate) fn pmf(&self) -> &[f64] {
        &self.pmf
    }
}

pub type Density = Arc<dyn Fn(f64) -> f64 + Send + Sync>;
pub type Sampler = Arc<dyn Fn(&mut dyn RngCore) -> f64 + Send + Sync>;

/// An absolutely continuous claim-size law on (0, ∞).
#[derive(Clone)]
pub struct ContinuousSeverity {
    density: Density,
    mean: f64,
    sampler: Option<Sampler>,
    label: String,
}

impl fmt::Debug for ContinuousSeverity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ContinuousSeverity")
            .field("label", &self.label)
            .field("mean", &self.mean)
            .finish()
    }
}

impl ContinuousSeverity {
    /// Wraps a density, checking by quadrature that it integrates to 1 (±1e-8).
    pub fn new(density: Density, mean: f64, label: impl Into<String>) -> Result<Self> {
        if !(mean > 0.0) || !mean.is_finite() {
            return Err(Error::InvalidData(format!("severity mean must be > 0, got {mean}")));
        }
        let mut points = vec![0.0];
        let mut edge = mean / 8.0;
        while edge < 4096.0 * mean {
            points.push(edge);
            edge *= 2.0;
        }
        let d = density.clone();
        let mass = integrate_breakpoints(
            |y| {
                let v = d(y);
                if v < 0.0 {
                    f64::NAN
                } else {
                    v
                }
            },
            &points,
            Tolerance::new(1e-12, 1e-10),
        )
        .map_err(|e| Error::InvalidData(format!("severity density: {e}")))?
        .value;
        if (mass - 1.0).abs() > 1e-8 {
            return Err(Error::UnnormalizedSeverity(mass));
        }
        Ok(ContinuousSeverity {
            density,
            mean,
            sampler: None,
            label: label.into(),
        })
    }

    pub fn with_sampler(mut self, sampler: Sampler) -> Self {
        self.sampler = Some(sampler);
        self
    }

    /// Exponential claim sizes with the given mean, with an inversion sampler.
    pub fn exponential(mean: f64) -> Result<Self> {
        let rate = 1.0 / mean;
        let sev = ContinuousSeverity::new(
            Arc::new(move |y: f64| if y < 0.0 { 0.0 } else { rate * (-rate * y).exp() }),
            mean,
            format!("exponential(mean={mean})"),
        )?;
        Ok(sev.with_sampler(Arc::new(move |rng: &mut dyn RngCore| {
            // 53 random bits in (0, 1]
            let u = ((rng.next_u64() >> 11) as f64 + 1.0) / (1u64 << 53) as f64;
            -mean * u.ln()
        })))
    }

    pub fn density(&self, y: f64) -> f64 {
        (self.density)(y)
    }

    pub fn mean(&self) -> f64 {
        self.mean
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub(crate) fn sampler(&self) -> Option<&Sampler> {
        self.sampler.as_ref()
    }
}

/// Either kind of claim-size law, for routines that accept both.
#[derive(Debug, Clone, Copy)]
pub enum Severity<'a> {
    Discrete(&'a DiscreteSeverity),
    Continuous(&'a ContinuousSeverity),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum CompoundKind {
    Discrete,
    Continuous,
}

/// Law of S on a grid.
///
/// Lattice case: `values[i] = P(S = grid[i])` for grid = 0, 1, …, and
/// `values[0]` equals `atom_at_zero`. Continuous case: `values[i]` is the
/// density of the absolutely continuous part at `grid[i] = i·step`; the atom
/// is held only in `atom_at_zero`.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct CompoundDistribution {
    pub kind: CompoundKind,
    pub atom_at_zero: f64,
    pub step: f64,
    pub grid: Vec<f64>,
    pub values: Vec<f64>,
}

impl CompoundDistribution {
    pub fn y_max(&self) -> f64 {
        *self.grid.last().unwrap_or(&0.0)
    }

    /// Total probability captured on the grid.
    pub fn total_mass(&self) -> f64 {
        match self.kind {
            CompoundKind::Discrete => self.values.iter().sum(),
            CompoundKind::Continuous => compound_cdf(self, self.y_max()).unwrap_or(f64::NAN),
        }
    }

    /// E(S) restricted to the grid.
    pub fn mean(&self) -> f64 {
        match self.kind {
            CompoundKind::Discrete => self.grid.iter().zip(&self.values).map(|(y, p)| y * p).sum(),
            CompoundKind::Continuous => {
                let f: Vec<f64> = self.grid.iter().zip(&self.values).map(|(y, g)| y * g).collect();
                trapezoid(&f, self.step)
            }
        }
    }
}

fn trapezoid(f: &[f64], h: f64) -> f64 {
    match f.len() {
        0 | 1 => 0.0,
        n => h * (0.5 * (f[0] + f[n - 1]) + f[1..n - 1].iter().sum::<f64>()),
    }
}

/// P(S ≤ y).
pub fn compound_cdf(dist: &CompoundDistribution, y: f64) -> Result<f64> {
    let end = dist.y_max();
    if !(y >= 0.0) || y > end * (1.0 + 1e-12) {
        return Err(Error::OutOfRange(format!("y={y} outside [0, {end}]")));
    }
    let y = y.min(end);
    match dist.kind {
        CompoundKind::Discrete => {
            let last = (y + 1e-9).floor() as usize;
            Ok(dist.values[..=last].iter().sum())
        }
        CompoundKind::Continuous => {
            let h = dist.step;
            let g = &dist.values;
            let cells = ((y / h).floor() as usize).min(g.len().saturating_sub(1));
            let mut acc = dist.atom_at_zero + trapezoid(&g[..=cells], h);
            let rest = y - cells as f64 * h;
            if rest > 0.0 && cells + 1 < g.len() {
                // integral of the linear interpolant over the partial cell
                let slope = (g[cells + 1] - g[cells]) / h;
                acc += rest * (g[cells] + 0.5 * slope * rest);
            }
            Ok(acc)
        }
    }
}

/// Smallest y with P(S ≤ y) ≥ level. Levels at or below the atom give 0.
pub fn compound_quantile(dist: &CompoundDistribution, level: f64) -> Result<f64> {
    if !(level > 0.0 && level < 1.0) {
        return Err(Error::Domain(format!("quantile level must be in (0, 1), got {level}")));
    }
    let end = dist.y_max();
    if compound_cdf(dist, end)? < level {
        return Err(Error::OutOfRange(format!(
            "level {level} lies beyond the grid end {end}"
        )));
    }
    match dist.kind {
        CompoundKind::Discrete => {
            let mut acc = 0.0;
            for (y, p) in dist.grid.iter().zip(&dist.values) {
                acc += p;
                if acc >= level {
                    return Ok(*y);
                }
            }
            Ok(end)
        }
        CompoundKind::Continuous => {
            if level <= dist.atom_at_zero {
                return Ok(0.0);
            }
            let (mut lo, mut hi) = (0.0, end);
            for _ in 0..200 {
                let mid = 0.5 * (lo + hi);
                if mid <= lo || mid >= hi {
                    break;
                }
                if compound_cdf(dist, mid)? < level {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            Ok(hi)
        }
    }
}
