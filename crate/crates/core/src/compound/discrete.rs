use rug::Float;

use super::{CompoundDistribution, CompoundKind, DiscreteSeverity};
use crate::error::Result;
use crate::mp;
use crate::nbl::{clamp_small_negatives, seed_bits, zero_prob_family, NblParams};

/// P(S = y) for y = 0..=y_max with integer claim sizes.
///
/// g(0; r) = p_r(0) and, for y ≥ 1,
/// g(y; r) = Σ_{s=1}^{y} [((rs + y − s)/y) g(y−s; r) − (rs/y) g(y−s; r+1)] f(s).
/// Like the pmf recurrence this cancels heavily, so the triangle over
/// (r+k, y) runs in multiprecision.
pub fn compound_discrete(params: NblParams, severity: &DiscreteSeverity, y_max: usize) -> Result<CompoundDistribution> {
    let f = severity.pmf();
    let start = seed_bits(params.theta(), y_max);
    let mut values = mp::adaptive(start, |bits| table(params, f, y_max, bits))?;
    clamp_small_negatives(&mut values, "compound recursion")?;
    Ok(CompoundDistribution {
        kind: CompoundKind::Discrete,
        atom_at_zero: values[0],
        step: 1.0,
        grid: (0..=y_max).map(|y| y as f64).collect(),
        values,
    })
}

fn table(params: NblParams, f: &[f64], y_max: usize, bits: u32) -> Result<Vec<f64>> {
    let r = Float::with_val(bits, params.r());
    let support: Vec<(usize, Float)> = f
        .iter()
        .enumerate()
        .skip(1)
        .filter(|(s, p)| **p > 0.0 && *s <= y_max)
        .map(|(s, &p)| (s, Float::with_val(bits, p)))
        .collect();
    // rows[k][y] = g(y; r+k)
    let mut rows: Vec<Vec<Float>> = zero_prob_family(params.r(), params.theta(), y_max + 1, bits)
        .into_iter()
        .map(|p0| vec![p0])
        .collect();
    for y in 1..=y_max {
        for k in 0..=(y_max - y) {
            let rk = Float::with_val(bits, &r + k as u32);
            let mut acc = Float::with_val(bits, 0);
            for (s, fs) in support.iter().take_while(|(s, _)| *s <= y) {
                let rks = Float::with_val(bits, &rk * *s as u32);
                let same = Float::with_val(bits, &rks + (y - s) as u32) * &rows[k][y - s];
                let shifted = rks * &rows[k + 1][y - s];
                acc += (same - shifted) * fs;
            }
            rows[k].push(acc / y as u32);
        }
    }
    Ok(rows[0].iter().map(Float::to_f64).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nbl::nbl_pmf_recursive;

    #[test]
    fn unit_claims_reproduce_the_count_pmf() {
        let p = NblParams::new(0.486, 6.381).unwrap();
        let d = compound_discrete(p, &DiscreteSeverity::degenerate(1).unwrap(), 12).unwrap();
        let pmf = nbl_pmf_recursive(p, 12).unwrap();
        for (y, (v, q)) in d.values.iter().zip(&pmf).enumerate() {
            assert!((v - q).abs() <= 1e-15 * q.max(1e-300), "y={y}");
        }
    }

    #[test]
    fn claims_of_size_two_skip_odd_totals() {
        let p = NblParams::new(1.0, 1.0).unwrap();
        let d = compound_discrete(p, &DiscreteSeverity::degenerate(2).unwrap(), 6).unwrap();
        let pmf = nbl_pmf_recursive(p, 3).unwrap();
        for y in 0..=6 {
            let want = if y % 2 == 0 { pmf[y / 2] } else { 0.0 };
            assert!((d.values[y] - want).abs() < 1e-15, "y={y}");
        }
    }
}
