//! Modified Bessel function of the second kind K_ν(x) for real order.
//!
//! Temme's method: K_μ and K_{μ+1} with |μ| ≤ 1/2 come from a series for
//! x < 2 and from Steed's continued fraction otherwise, then forward
//! recurrence (stable for K) raises the order.

use std::f64::consts::PI;

use crate::error::{domain, Error, Result};

use super::EvalResult;

// Taylor coefficients of 1/Γ(z) about 0: 1/Γ(z) = Σ_{k≥1} c_k z^k, c_1 first.
const RGAMMA: [f64; 27] = [
    1.0,
    0.577_215_664_901_532_860_61,
    -0.655_878_071_520_253_881_08,
    -0.042_002_635_034_095_235_529,
    0.166_538_611_382_291_489_5,
    -0.042_197_734_555_544_336_748,
    -0.009_621_971_527_876_973_562_1,
    0.007_218_943_246_663_099_542_4,
    -0.001_165_167_591_859_065_112_1,
    -0.000_215_241_674_114_950_972_82,
    0.000_128_050_282_388_116_186_15,
    -0.000_020_134_854_780_788_238_656,
    -1.250_493_482_142_670_657_3e-6,
    1.133_027_231_981_695_882_4e-6,
    -2.056_338_416_977_607_103_5e-7,
    6.116_095_104_481_415_817_9e-9,
    5.002_007_644_469_222_930_1e-9,
    -1.181_274_570_487_020_144_6e-9,
    1.043_426_711_691_100_510_5e-10,
    7.782_263_439_905_071_254e-12,
    -3.696_805_618_642_205_708_2e-12,
    5.100_370_287_454_475_979e-13,
    -2.058_326_053_566_506_783_2e-14,
    -5.348_122_539_423_017_982_4e-15,
    1.226_778_628_238_260_790_2e-15,
    -1.181_259_301_697_458_769_5e-16,
    1.186_692_254_751_600_332_6e-18,
];

/// (gam1, gam2, 1/Γ(1+μ), 1/Γ(1−μ)) for |μ| ≤ 1/2, where
/// gam1 = (1/Γ(1−μ) − 1/Γ(1+μ)) / (2μ) and gam2 = (1/Γ(1−μ) + 1/Γ(1+μ)) / 2.
fn temme_gammas(mu: f64) -> (f64, f64, f64, f64) {
    let mu2 = mu * mu;
    let mut even = 0.0; // c_2 + c_4 μ² + ...
    let mut odd = 0.0; // c_1 + c_3 μ² + ...
    for k in (0..RGAMMA.len()).rev() {
        if k % 2 == 1 {
            even = even * mu2 + RGAMMA[k];
        } else {
            odd = odd * mu2 + RGAMMA[k];
        }
    }
    let gam1 = -even;
    let gam2 = odd;
    (gam1, gam2, gam2 - mu * gam1, gam2 + mu * gam1)
}

const SERIES_MAX: usize = 10_000;

/// Returns (K_ν(x), K_{ν+1}(x)) times e^x when `scaled`.
fn bessel_k_pair(nu: f64, x: f64, scaled: bool) -> Result<(f64, f64, usize)> {
    let nl = (nu + 0.5).floor() as usize;
    let mu = nu - nl as f64;
    let mu2 = mu * mu;
    let xi = 1.0 / x;
    let xi2 = 2.0 * xi;
    let (mut k_mu, mut k_mu1);
    if x < 2.0 {
        let x2 = 0.5 * x;
        let pimu = PI * mu;
        let fact = if pimu.abs() < f64::EPSILON {
            1.0
        } else {
            pimu / pimu.sin()
        };
        let d = -x2.ln();
        let e = mu * d;
        let fact2 = if e.abs() < f64::EPSILON { 1.0 } else { e.sinh() / e };
        let (gam1, gam2, gampl, gammi) = temme_gammas(mu);
        let mut ff = fact * (gam1 * e.cosh() + gam2 * fact2 * d);
        let mut sum = ff;
        let ee = e.exp();
        let mut p = 0.5 * ee / gampl;
        let mut q = 0.5 / (ee * gammi);
        let mut c = 1.0;
        let dd = x2 * x2;
        let mut sum1 = p;
        let mut converged = false;
        for i in 1..SERIES_MAX {
            let fi = i as f64;
            ff = (fi * ff + p + q) / (fi * fi - mu2);
            c *= dd / fi;
            p /= fi - mu;
            q /= fi + mu;
            let del = c * ff;
            sum += del;
            sum1 += c * (p - fi * ff);
            if del.abs() < sum.abs() * f64::EPSILON {
                converged = true;
                break;
            }
        }
        if !converged {
            return Err(Error::NonConvergence(format!("K series at nu={nu}, x={x}")));
        }
        k_mu = sum;
        k_mu1 = sum1 * xi2;
        if scaled {
            let ex = x.exp();
            k_mu *= ex;
            k_mu1 *= ex;
        }
    } else {
        let mut b = 2.0 * (1.0 + x);
        let mut d = 1.0 / b;
        let mut delh = d;
        let mut h = d;
        let mut q1 = 0.0;
        let mut q2 = 1.0;
        let a1 = 0.25 - mu2;
        let mut q = a1;
        let mut c = a1;
        let mut a = -a1;
        let mut s = 1.0 + q * delh;
        let mut converged = false;
        for i in 2..SERIES_MAX {
            let fi = i as f64;
            a -= 2.0 * (fi - 1.0);
            c = -a * c / fi;
            let qnew = (q1 - b * q2) / a;
            q1 = q2;
            q2 = qnew;
            q += c * qnew;
            b += 2.0;
            d = 1.0 / (b + a * d);
            delh *= b * d - 1.0;
            h += delh;
            let dels = q * delh;
            s += dels;
            if (dels / s).abs() < f64::EPSILON {
                converged = true;
                break;
            }
        }
        if !converged {
            return Err(Error::NonConvergence(format!("K continued fraction at nu={nu}, x={x}")));
        }
        h *= a1;
        k_mu = (PI / (2.0 * x)).sqrt() / s;
        if !scaled {
            k_mu *= (-x).exp();
        }
        k_mu1 = k_mu * (mu + x + 0.5 - h) * xi;
    }
    for i in 1..=nl {
        let next = (mu + i as f64) * xi2 * k_mu1 + k_mu;
        k_mu = k_mu1;
        k_mu1 = next;
    }
    Ok((k_mu, k_mu1, nl))
}

fn check(nu: f64, x: f64) -> Result<()> {
    if !nu.is_finite() {
        return Err(domain(format!("bessel_k needs a finite order, got {nu}")));
    }
    if !(x > 0.0) || !x.is_finite() {
        return Err(domain(format!("bessel_k needs finite x > 0, got {x}")));
    }
    Ok(())
}

/// K_ν(x) for real ν and x > 0 (K_{−ν} = K_ν).
pub fn bessel_k(nu: f64, x: f64) -> Result<EvalResult> {
    check(nu, x)?;
    let (k, _, nl) = bessel_k_pair(nu.abs(), x, false)?;
    EvalResult::new(k, k * f64::EPSILON * (16.0 + 2.0 * nl as f64))
}

/// e^x K_ν(x), which stays representable for large x.
pub fn bessel_k_scaled(nu: f64, x: f64) -> Result<EvalResult> {
    check(nu, x)?;
    let (k, _, nl) = bessel_k_pair(nu.abs(), x, true)?;
    EvalResult::new(k, k * f64::EPSILON * (16.0 + 2.0 * nl as f64 + x.min(2.0)))
}
