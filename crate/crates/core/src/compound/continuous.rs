use std::ops::{Add, Div, Mul, Sub};

use rayon::prelude::*;
use rug::Float;
use twofloat::TwoFloat;

use super::{CompoundDistribution, CompoundKind, ContinuousSeverity};
use crate::error::{domain, Error, Result};
use crate::mp;
use crate::nbl::{family_bits, zero_prob_family, NblParams};

#[derive(Debug, Clone, Copy)]
pub struct ContinuousOptions {
    /// Largest mesh tried before giving up with `MeshTooCoarse`.
    pub max_mesh: usize,
    /// Accept when doubling the mesh moves no reported value by more than this.
    pub rel_tol: f64,
}

impl Default for ContinuousOptions {
    fn default() -> Self {
        ContinuousOptions {
            max_mesh: 4096,
            rel_tol: 1e-3,
        }
    }
}

/// Density of the continuous part of S on [0, y_max], refining the mesh by
/// doubling until two successive solutions agree.
pub fn compound_continuous(
    params: NblParams,
    severity: &ContinuousSeverity,
    y_max: f64,
    mesh: usize,
) -> Result<CompoundDistribution> {
    compound_continuous_with(params, severity, y_max, mesh, &ContinuousOptions::default())
}

pub fn compound_continuous_with(
    params: NblParams,
    severity: &ContinuousSeverity,
    y_max: f64,
    mesh: usize,
    opts: &ContinuousOptions,
) -> Result<CompoundDistribution> {
    let mut coarse = compound_continuous_fixed_mesh(params, severity, y_max, mesh)?;
    let mut n = mesh;
    loop {
        if 2 * n > opts.max_mesh {
            return Err(Error::MeshTooCoarse(format!(
                "successive meshes still differ by more than {} at mesh {n} (limit {})",
                opts.rel_tol, opts.max_mesh
            )));
        }
        let fine = compound_continuous_fixed_mesh(params, severity, y_max, 2 * n)?;
        let peak = fine.values.iter().cloned().fold(0.0, f64::max);
        let worst = coarse
            .values
            .iter()
            .enumerate()
            .filter(|(i, _)| fine.values[2 * i] > 1e-8 * peak)
            .map(|(i, a)| ((a - fine.values[2 * i]) / fine.values[2 * i]).abs())
            .fold(0.0, f64::max);
        if worst <= opts.rel_tol {
            return Ok(fine);
        }
        coarse = fine;
        n *= 2;
    }
}

/// One trapezoidal Volterra solve with `mesh` cells on [0, y_max].
///
/// With h_r the continuous part of the law of S under r,
/// h_r(y) = r(p_r(0) − p_{r+1}(0)) f(y)
///        + ∫₀^y ((rs + y − s)/y) h_r(y−s) f(s) ds − ∫₀^y (rs/y) h_{r+1}(y−s) f(s) ds,
/// starting from h_r(0) = r(p_r(0) − p_{r+1}(0)) f(0). Each node needs the
/// r+1 member one node back, so member r+k is carried to node mesh − k.
///
/// The members differ by little, and rounding grows roughly geometrically in
/// y along the triangle. The solve runs in `f64` when a perturbed rerun shows
/// that is accurate enough, else in double-double.
pub fn compound_continuous_fixed_mesh(
    params: NblParams,
    severity: &ContinuousSeverity,
    y_max: f64,
    mesh: usize,
) -> Result<CompoundDistribution> {
    if mesh < 16 {
        return Err(domain(format!("mesh must be >= 16, got {mesh}")));
    }
    if !(y_max > 0.0) || !y_max.is_finite() {
        return Err(domain(format!("y_max must be finite and > 0, got {y_max}")));
    }
    let n = mesh;
    let h = y_max / n as f64;
    let f: Vec<f64> = (0..=n).map(|j| severity.density(j as f64 * h)).collect();
    if f.iter().any(|v| !v.is_finite() || *v < 0.0) {
        return Err(domain("severity density must be finite and nonnegative on the mesh"));
    }
    if 0.5 * h * f[0] > 0.95 {
        return Err(Error::MeshTooCoarse(format!(
            "step {h} too large for severity density {} at 0",
            f[0]
        )));
    }
    let gaps = zero_prob_gaps(params, n + 1)?;
    let values = match checked_solve::<f64>(params.r(), &gaps, &f, h) {
        Some(v) => v,
        None => checked_solve::<TwoFloat>(params.r(), &gaps, &f, h).ok_or_else(|| {
            Error::NumericalInstability(format!(
                "rounding swamps the density before y = {y_max} even in double-double; use a smaller y_max"
            ))
        })?,
    };
    Ok(CompoundDistribution {
        kind: CompoundKind::Continuous,
        atom_at_zero: zero_prob_atom(params)?,
        step: h,
        grid: (0..=n).map(|i| i as f64 * h).collect(),
        values,
    })
}

trait Real:
    Copy
    + Send
    + Sync
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Mul<f64, Output = Self>
    + Div<Output = Self>
{
    const UNIT_ROUNDOFF: f64;
    fn from_parts(hi: f64, lo: f64) -> Self;
    fn approx(self) -> f64;
}

impl Real for f64 {
    const UNIT_ROUNDOFF: f64 = f64::EPSILON / 2.0;
    fn from_parts(hi: f64, lo: f64) -> Self {
        hi + lo
    }
    fn approx(self) -> f64 {
        self
    }
}

impl Real for TwoFloat {
    const UNIT_ROUNDOFF: f64 = f64::EPSILON * f64::EPSILON / 4.0;
    fn from_parts(hi: f64, lo: f64) -> Self {
        TwoFloat::new_add(hi, lo)
    }
    fn approx(self) -> f64 {
        f64::from(self)
    }
}

/// Solves twice, the second time with the seeds nudged by a relative
/// ±2¹⁶·u in alternating signs (the pattern the k-differences amplify most).
/// The spread scaled back to u bounds the rounding error; `None` when that
/// bound is not small against each value or against the peak.
fn checked_solve<T: Real>(r: f64, gaps: &[(f64, f64)], f: &[f64], h: f64) -> Option<Vec<f64>> {
    const NUDGE: f64 = 65536.0;
    const SAFETY: f64 = 4.0;
    let base = triangle::<T>(r, gaps, f, h, 0.0);
    let nudged = triangle::<T>(r, gaps, f, h, NUDGE * T::UNIT_ROUNDOFF);
    let peak = base.iter().cloned().fold(0.0, f64::max);
    let mut out = base;
    for (v, w) in out.iter_mut().zip(&nudged) {
        let err = SAFETY * (*v - w).abs() / NUDGE;
        if !v.is_finite() || err > 1e-4 * v.abs() + 1e-10 * peak {
            return None;
        }
        if *v < 0.0 {
            if *v < -(err + 1e-10 * peak) {
                return None;
            }
            *v = 0.0;
        }
    }
    Some(out)
}

fn triangle<T: Real>(r: f64, gaps: &[(f64, f64)], f: &[f64], h: f64, nudge: f64) -> Vec<f64> {
    let n = f.len() - 1;
    let one = T::from_parts(1.0, 0.0);
    let half_f: Vec<f64> = f.iter().map(|v| 0.5 * v).collect();
    let jf: Vec<f64> = f.iter().enumerate().map(|(j, v)| j as f64 * v).collect();
    let denom = one - T::from_parts(0.5 * h * f[0], 0.0);
    let rk: Vec<T> = (0..=n).map(|k| T::from_parts(r, k as f64)).collect();
    // r_k (p_{r+k}(0) − p_{r+k+1}(0)), nudged
    let forcing: Vec<T> = gaps
        .iter()
        .enumerate()
        .map(|(k, &(hi, lo))| {
            let sign = if k % 2 == 0 { nudge } else { -nudge };
            rk[k] * T::from_parts(hi, lo) * T::from_parts(1.0, sign)
        })
        .collect();
    let mut rows: Vec<Vec<T>> = (0..=n)
        .map(|k| {
            let mut row = Vec::with_capacity(n - k + 1);
            row.push(forcing[k] * f[0]);
            row
        })
        .collect();
    let zero = T::from_parts(0.0, 0.0);
    for i in 1..=n {
        let rows_ref = &rows;
        let inv_i = one / T::from_parts(i as f64, 0.0);
        let fresh: Vec<T> = (0..=(n - i))
            .into_par_iter()
            .map(|k| {
                let same = &rows_ref[k];
                let next = &rows_ref[k + 1];
                // a = Σ h_k f, b = Σ h_k j f, c = Σ h_{k+1} j f over interior nodes
                let (mut a, mut b, mut c) = (zero, zero, zero);
                for j in 1..i {
                    a = a + same[i - j] * f[j];
                    b = b + same[i - j] * jf[j];
                    c = c + next[i - j] * jf[j];
                }
                let ends = (same[0] - next[0]) * rk[k] * half_f[i];
                let inner = a + (rk[k] - one) * inv_i * b - rk[k] * inv_i * c + ends;
                (forcing[k] * f[i] + inner * h) / denom
            })
            .collect();
        for (k, v) in fresh.into_iter().enumerate() {
            rows[k].push(v);
        }
    }
    rows.swap_remove(0).into_iter().map(T::approx).collect()
}

/// (hi, lo) parts of p_{r+k}(0) − p_{r+k+1}(0) for k = 0..count.
fn zero_prob_gaps(params: NblParams, count: usize) -> Result<Vec<(f64, f64)>> {
    let start = 128 + family_bits(params.theta(), count + 1);
    let mut low = Vec::new();
    // the accepted run is the last one, so `low` ends up matching it
    let high = mp::adaptive(start, |bits| {
        let fam = zero_prob_family(params.r(), params.theta(), count + 1, bits);
        let (hi, lo): (Vec<f64>, Vec<f64>) = fam
            .windows(2)
            .map(|w| {
                let gap = Float::with_val(bits, &w[0] - &w[1]);
                let hi = gap.to_f64();
                (hi, (gap - hi).to_f64())
            })
            .unzip();
        low = lo;
        Ok(hi)
    })?;
    Ok(high.into_iter().zip(low).collect())
}

fn zero_prob_atom(params: NblParams) -> Result<f64> {
    let start = 64 + family_bits(params.theta(), 1);
    Ok(mp::adaptive(start, |bits| {
        Ok(vec![zero_prob_family(params.r(), params.theta(), 1, bits)[0].to_f64()])
    })?[0])
}
