#![allow(dead_code)]

use std::f64::consts::PI;

/// Gauss–Legendre nodes and weights on [−1, 1], by Newton on P_n.
pub fn gauss_legendre(n: usize) -> Vec<(f64, f64)> {
    let mut out = Vec::with_capacity(n);
    for i in 0..n {
        let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=n {
                let k = k as f64;
                let p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
                p0 = p1;
                p1 = p2;
            }
            dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        out.push((x, 2.0 / ((1.0 - x * x) * dp * dp)));
    }
    out
}

/// Composite 30-point Gauss–Legendre over consecutive breakpoints.
pub fn integrate(f: impl Fn(f64) -> f64, points: &[f64]) -> f64 {
    let rule = gauss_legendre(30);
    let mut total = 0.0;
    for w in points.windows(2) {
        let (a, b) = (w[0], w[1]);
        let (mid, half) = (0.5 * (a + b), 0.5 * (b - a));
        total += half * rule.iter().map(|&(x, wt)| wt * f(mid + half * x)).sum::<f64>();
    }
    total
}

/// Breakpoints 0, lo, 2·lo, 4·lo, … up to hi, each octave cut in `per` pieces.
pub fn graded(lo: f64, hi: f64, per: usize) -> Vec<f64> {
    let mut pts = vec![0.0];
    let mut a = lo;
    while a < hi {
        for k in 0..per {
            pts.push(a * (1.0 + k as f64 / per as f64));
        }
        a *= 2.0;
    }
    pts.push(a);
    pts
}

/// ∫₀^∞ f, for integrands that are negligible beyond `hi`.
pub fn integrate_half_line(f: impl Fn(f64) -> f64, hi: f64) -> f64 {
    integrate(f, &graded(1e-12, hi, 4))
}

pub fn rel_diff(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(f64::MIN_POSITIVE)
}

/// Lindley density, written out independently of the library.
pub fn lindley(theta: f64, lam: f64) -> f64 {
    theta * theta / (1.0 + theta) * (1.0 + lam) * (-theta * lam).exp()
}

pub fn ln_factorial(n: u64) -> f64 {
    (1..=n).map(|k| (k as f64).ln()).sum()
}
