use rug::ops::Pow;
use rug::Float;

use super::NblParams;
use crate::error::{Error, Result};
use crate::mp;
use crate::specfun::{ln_hyp_u, log_pochhammer, LnEval};

/// ln p(x) from the U-function representation.
///
/// Two equivalent forms are available,
/// p(x) = θ²(r)_x/(1+θ) · U(x+1, 3−r, θ) and, after Kummer's transformation,
/// p(x) = θ^r(r)_x/(1+θ) · U(x+r−1, r−1, θ) (only when x+r−1 > 0).
/// The one with the smaller quadrature error estimate is returned.
pub fn nbl_ln_pmf(params: NblParams, x: u64) -> Result<LnEval> {
    let (r, theta) = (params.r(), params.theta());
    let xf = x as f64;
    let base = log_pochhammer(r, x)? - theta.ln_1p();
    let first = ln_hyp_u(xf + 1.0, 3.0 - r, theta)?;
    let mut best = LnEval {
        ln_value: base + 2.0 * theta.ln() + first.ln_value,
        abs_error_estimate: first.abs_error_estimate,
    };
    if xf + r - 1.0 > 0.0 {
        if let Ok(second) = ln_hyp_u(xf + r - 1.0, r - 1.0, theta) {
            if second.abs_error_estimate < best.abs_error_estimate {
                best = LnEval {
                    ln_value: base + r * theta.ln() + second.ln_value,
                    abs_error_estimate: second.abs_error_estimate,
                };
            }
        }
    }
    Ok(best)
}

pub fn nbl_pmf_direct(params: NblParams, x: u64) -> Result<f64> {
    Ok(nbl_ln_pmf(params, x)?.ln_value.exp())
}

/// p_{r+k}(0) = θ^{r+k} e^θ Γ(2−r−k, θ)/(1+θ) for k = 0..count, at `bits` precision.
///
/// Γ(2−r, θ) is evaluated once; lower orders follow from
/// Γ(a−1, θ) = (Γ(a, θ) − θ^{a−1} e^{−θ}) / (a−1), except at a−1 = 0.
pub(crate) fn zero_prob_family(r: f64, theta: f64, count: usize, bits: u32) -> Vec<Float> {
    let th = Float::with_val(bits, theta);
    let e_neg = Float::with_val(bits, -&th).exp();
    let scale = Float::with_val(bits, th.exp_ref()) / Float::with_val(bits, 1.0 + &th);
    let rr = Float::with_val(bits, r);
    let mut order = Float::with_val(bits, 2 - &rr);
    let mut upper = upper_gamma(&order, &th);
    // θ^{order} and θ^{r}; their product is θ² for every k
    let mut th_order = Float::with_val(bits, (&th).pow(&order));
    let mut th_shape = Float::with_val(bits, (&th).pow(&rr));
    let mut out = Vec::with_capacity(count);
    for k in 0..count {
        out.push(Float::with_val(bits, &upper * &th_shape) * &scale);
        if k + 1 == count {
            break;
        }
        order -= 1u32;
        th_order /= &th;
        th_shape *= &th;
        upper = if order.is_zero() {
            upper_gamma(&order, &th)
        } else {
            (upper - Float::with_val(bits, &th_order * &e_neg)) / &order
        };
    }
    out
}

/// Γ(a, z) at the precision of `a`. MPFR's own routine slows down badly as z
/// grows, so large z goes through the Legendre continued fraction
/// Γ(a, z) = e^{−z} z^a / (z+1−a − 1(1−a)/(z+3−a − 2(2−a)/(z+5−a − …))).
fn upper_gamma(a: &Float, z: &Float) -> Float {
    if *z < 40 {
        return a.clone().gamma_inc(z);
    }
    let bits = a.prec();
    let tiny = Float::with_val(bits, Float::i_exp(1, -(bits as i32) * 4));
    let eps = Float::with_val(bits, Float::i_exp(1, -(bits as i32) - 2));
    // modified Lentz on b0 + a1/(b1 + a2/(b2 + …))
    let mut b = Float::with_val(bits, z + 1u32) - a;
    let mut c = Float::with_val(bits, 1) / &tiny;
    let mut d = Float::with_val(bits, 1) / &b;
    let mut h = d.clone();
    for i in 1u32..1_000_000 {
        let an = Float::with_val(bits, a - i) * i;
        b += 2u32;
        d = Float::with_val(bits, &an * &d) + &b;
        if d.clone().abs() < tiny {
            d = tiny.clone();
        }
        c = Float::with_val(bits, &an / &c) + &b;
        if c.clone().abs() < tiny {
            c = tiny.clone();
        }
        d.recip_mut();
        let delta = Float::with_val(bits, &c * &d);
        h *= &delta;
        if Float::with_val(bits, &delta - 1u32).abs() < eps {
            break;
        }
    }
    let ln_front = Float::with_val(bits, a * Float::with_val(bits, z.ln_ref())) - z;
    h * ln_front.exp()
}

/// Bits lost generating `count` orders in [`zero_prob_family`]: each downward
/// gamma step cancels about log₂(θ/|order|) bits, so at most e^θ overall and
/// never much more than log₂(1+θ) per step.
pub(crate) fn family_bits(theta: f64, count: usize) -> u32 {
    (1.5 * theta).min((count + 1) as f64 * (1.0 + theta).log2()).ceil() as u32
}

/// Working precision for a table of depth `depth` seeded by [`zero_prob_family`].
pub(crate) fn seed_bits(theta: f64, depth: usize) -> u32 {
    64 + 3 * depth as u32 + family_bits(theta, depth + 1)
}

fn recursion_table(params: NblParams, x_max: usize, bits: u32) -> Result<Vec<f64>> {
    let r = Float::with_val(bits, params.r());
    let mut cur = zero_prob_family(params.r(), params.theta(), x_max + 1, bits);
    let mut out = Vec::with_capacity(x_max + 1);
    out.push(cur[0].to_f64());
    for x in 1..=x_max {
        // cur[k] holds p_{r+k}(x−1); overwrite in increasing k
        for k in 0..=(x_max - x) {
            let rk = Float::with_val(bits, &r + k as u32);
            let lead = Float::with_val(bits, &rk + (x as u32 - 1)) * &cur[k];
            let next = rk * &cur[k + 1];
            cur[k] = (lead - next) / x as u32;
        }
        out.push(cur[0].to_f64());
    }
    Ok(out)
}

pub(crate) fn clamp_small_negatives(values: &mut [f64], what: &str) -> Result<()> {
    for (i, v) in values.iter_mut().enumerate() {
        if *v < -1e-12 {
            return Err(Error::NumericalInstability(format!(
                "{what} produced {v:e} at index {i}"
            )));
        }
        if *v < 0.0 {
            *v = 0.0;
        }
    }
    Ok(())
}

/// p(0..=x_max) from the recurrence in r,
/// p_r(x) = ((r+x−1) p_r(x−1) − r p_{r+1}(x−1)) / x.
///
/// The recurrence is an alternating finite difference and loses roughly
/// x·log₂ of the conditioning in every step, so the triangular table over
/// (r+k, x) is carried in multiprecision with enough bits for `f64` output.
pub fn nbl_pmf_recursive(params: NblParams, x_max: usize) -> Result<Vec<f64>> {
    let start = seed_bits(params.theta(), x_max);
    let mut out = mp::adaptive(start, |bits| recursion_table(params, x_max, bits))?;
    clamp_small_negatives(&mut out, "pmf recursion")?;
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_probability_closed_form() {
        // p(0) = θ/(1+θ) when r = 1
        let p = NblParams::new(1.0, 1.0).unwrap();
        assert!((nbl_pmf_direct(p, 0).unwrap() - 0.5).abs() < 1e-12);
        assert_eq!(nbl_pmf_recursive(p, 0).unwrap().len(), 1);
        assert!((nbl_pmf_recursive(p, 0).unwrap()[0] - 0.5).abs() < 1e-15);
    }

    #[test]
    fn fitted_values_reference() {
        // 40-digit reference at (0.486, 6.381)
        let want = [
            0.929_765_154_294_485_29,
            0.058_197_872_774_589_273,
            0.009_137_371_393_037_963_9,
            0.002_050_143_969_465_209_2,
            0.000_565_652_299_285_366_98,
            0.000_179_413_891_282_972_38,
        ];
        let p = NblParams::new(0.486, 6.381).unwrap();
        let rec = nbl_pmf_recursive(p, 5).unwrap();
        for (x, w) in want.iter().enumerate() {
            assert!(((rec[x] - w) / w).abs() < 1e-14, "x={x}");
            let d = nbl_pmf_direct(p, x as u64).unwrap();
            assert!(((d - w) / w).abs() < 1e-11, "x={x}");
        }
    }

    #[test]
    fn recursion_matches_direct_far_out() {
        let p = NblParams::new(0.25, 20.0).unwrap();
        let rec = nbl_pmf_recursive(p, 100).unwrap();
        for x in [0usize, 1, 10, 57, 100] {
            let d = nbl_pmf_direct(p, x as u64).unwrap();
            assert!(((rec[x] - d) / d).abs() < 1e-10, "x={x}: {} vs {d}", rec[x]);
        }
    }

    #[test]
    fn continued_fraction_matches_mpfr_gamma() {
        for &a in &[1.514, 0.0, -0.486, -7.25, 3.0] {
            for &z in &[40.0, 57.5, 150.0] {
                let a = Float::with_val(256, a);
                let z = Float::with_val(256, z);
                let cf = upper_gamma(&a, &z);
                let want = a.clone().gamma_inc(&z);
                let rel = Float::with_val(256, (cf - &want) / &want).abs().to_f64();
                assert!(rel < 1e-70, "a={a} z={z}: {rel:e}");
            }
        }
    }

    #[test]
    fn large_theta_seeds_are_cheap() {
        let fam = zero_prob_family(1.0, 1e6, 3, 128);
        // p_1(0) = θ/(1+θ)
        assert!((fam[0].to_f64() - 1e6 / (1e6 + 1.0)).abs() < 1e-15);
    }

    #[test]
    fn zero_probability_family_matches_direct_gamma() {
        for &(r, theta) in &[(1.0, 1.0), (2.0, 0.5), (0.3, 40.0)] {
            let fam = zero_prob_family(r, theta, 12, 256);
            for (k, v) in fam.iter().enumerate() {
                let p = NblParams::new(r + k as f64, theta).unwrap();
                let d = nbl_pmf_direct(p, 0).unwrap();
                assert!(((v.to_f64() - d) / d).abs() < 1e-11, "r={r} k={k}");
            }
        }
    }

    #[test]
    fn clamps_only_tiny_negatives() {
        let mut v = vec![0.5, -1e-14];
        clamp_small_negatives(&mut v, "t").unwrap();
        assert_eq!(v, vec![0.5, 0.0]);
        assert!(clamp_small_negatives(&mut [-1e-6], "t").is_err());
    }
}
