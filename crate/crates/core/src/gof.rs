//! Pearson chi-square goodness of fit for fitted count tables.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::estimate::{log_likelihood, CountData};
use crate::nbl::{nbl_pmf_recursive, NblParams};
use crate::specfun::{log_gamma, upper_inc_gamma};

/// Rule of five.
pub const MIN_EXPECTED: f64 = 5.0;

/// n·p(x) for x = 0..=max observed count, and the remaining mass.
#[derive(Debug, Clone, PartialEq)]
pub struct ExpectedCounts {
    pub cells: Vec<(u64, f64)>,
    /// n·(1 − Σ p(x)) over the listed counts.
    pub tail: f64,
}

pub fn expected_counts(data: &CountData, params: NblParams) -> Result<ExpectedCounts> {
    let n = data.n() as f64;
    let pmf = nbl_pmf_recursive(params, data.max_count() as usize)?;
    let cells: Vec<(u64, f64)> = pmf.iter().enumerate().map(|(x, p)| (x as u64, n * p)).collect();
    let listed: f64 = pmf.iter().sum();
    Ok(ExpectedCounts {
        cells,
        tail: (n * (1.0 - listed)).max(0.0),
    })
}

/// What happens to the open tail n·(1 − Σ p) when pooling.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TailCell {
    /// Added to the last pooled cell, so Σ expected = n.
    Pooled,
    /// Left out; the table covers the observed range only.
    #[default]
    Omitted,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GofCell {
    pub label: String,
    pub observed: u64,
    pub expected: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct GofReport {
    pub cells: Vec<GofCell>,
    /// Index of the first count merged into the last cell.
    pub pooled_from: usize,
    pub chi_square: f64,
    pub dof: u32,
    pub p_value: f64,
    /// None when the expected column was supplied directly.
    pub log_likelihood: Option<f64>,
}

/// Upper tail of the chi-square law with `dof` degrees of freedom.
pub fn chi_square_p_value(stat: f64, dof: u32) -> Result<f64> {
    if dof == 0 || !(stat >= 0.0) {
        return Err(Error::Domain(format!(
            "chi-square tail needs dof >= 1 and stat >= 0, got {dof}, {stat}"
        )));
    }
    if stat == 0.0 {
        return Ok(1.0);
    }
    let a = 0.5 * dof as f64;
    let upper = upper_inc_gamma(a, 0.5 * stat)?.value;
    Ok((upper / log_gamma(a)?.exp()).clamp(0.0, 1.0))
}

fn pearson(observed: &[u64], expected: &[f64]) -> f64 {
    observed
        .iter()
        .zip(expected)
        .map(|(&o, &e)| (o as f64 - e).powi(2) / e)
        .sum()
}

/// Chi-square test of the fitted law against `data`, pooling from the top
/// count downward until the merged cell reaches an expected count of 5.
/// dof = cells − 1 − `dof_penalty`.
pub fn chi_square_test(data: &CountData, params: NblParams, dof_penalty: u32) -> Result<GofReport> {
    chi_square_test_with(data, params, dof_penalty, TailCell::default())
}

pub fn chi_square_test_with(
    data: &CountData,
    params: NblParams,
    dof_penalty: u32,
    tail: TailCell,
) -> Result<GofReport> {
    let exp = expected_counts(data, params)?;
    let mut observed = vec![0u64; exp.cells.len()];
    for &(x, f) in data.entries() {
        observed[x as usize] = f;
    }
    let mut expected: Vec<f64> = exp.cells.iter().map(|c| c.1).collect();
    let last = expected.len() - 1;
    if tail == TailCell::Pooled {
        expected[last] += exp.tail;
    }

    let mut pooled_from = last;
    let mut acc = expected[last];
    while acc < MIN_EXPECTED && pooled_from > 0 {
        pooled_from -= 1;
        acc += expected[pooled_from];
    }
    let cells_left = pooled_from + 1;
    if acc < MIN_EXPECTED || cells_left <= dof_penalty as usize + 1 {
        return Err(Error::InsufficientCells(format!(
            "{cells_left} cell(s) after pooling, {dof_penalty} estimated parameter(s)"
        )));
    }

    let mut cells: Vec<GofCell> = (0..pooled_from)
        .map(|x| GofCell {
            label: x.to_string(),
            observed: observed[x],
            expected: expected[x],
        })
        .collect();
    let label = match (tail, pooled_from == last) {
        (TailCell::Pooled, _) => format!("{pooled_from}+"),
        (TailCell::Omitted, true) => pooled_from.to_string(),
        (TailCell::Omitted, false) => format!("{pooled_from}-{last}"),
    };
    cells.push(GofCell {
        label,
        observed: observed[pooled_from..].iter().sum(),
        expected: acc,
    });

    let obs: Vec<u64> = cells.iter().map(|c| c.observed).collect();
    let expd: Vec<f64> = cells.iter().map(|c| c.expected).collect();
    let chi_square = pearson(&obs, &expd);
    let dof = (cells.len() - 1 - dof_penalty as usize) as u32;
    Ok(GofReport {
        cells,
        pooled_from,
        chi_square,
        dof,
        p_value: chi_square_p_value(chi_square, dof)?,
        log_likelihood: Some(log_likelihood(data, params)?),
    })
}

/// Pearson statistic for an already pooled table with a known expected column.
pub fn chi_square_from_expected(observed: &[u64], expected: &[f64], dof: u32) -> Result<GofReport> {
    if observed.len() != expected.len() || observed.is_empty() {
        return Err(Error::InvalidData(format!(
            "{} observed vs {} expected cells",
            observed.len(),
            expected.len()
        )));
    }
    if expected.iter().any(|&e| !(e > 0.0) || !e.is_finite()) {
        return Err(Error::InvalidData("expected counts must be positive".into()));
    }
    if dof == 0 || dof as usize >= observed.len() {
        return Err(Error::InsufficientCells(format!(
            "{} cells cannot carry {dof} degrees of freedom",
            observed.len()
        )));
    }
    let chi_square = pearson(observed, expected);
    Ok(GofReport {
        cells: observed
            .iter()
            .zip(expected)
            .enumerate()
            .map(|(i, (&o, &e))| GofCell {
                label: i.to_string(),
                observed: o,
                expected: e,
            })
            .collect(),
        pooled_from: observed.len() - 1,
        chi_square,
        dof,
        p_value: chi_square_p_value(chi_square, dof)?,
        log_likelihood: None,
    })
}

impl GofReport {
    /// Plain-text table, one cell per line, then the summary lines.
    pub fn to_table(&self) -> String {
        let mut out = format!("{:>8} {:>10} {:>12}\n", "count", "observed", "expected");
        for c in &self.cells {
            out += &format!("{:>8} {:>10} {:>12.2}\n", c.label, c.observed, c.expected);
        }
        out += &format!(
            "chi-square {:.4}  dof {}  p-value {:.4}\n",
            self.chi_square, self.dof, self.p_value
        );
        if let Some(ll) = self.log_likelihood {
            out += &format!("log-likelihood {ll:.4}\n");
        }
        out
    }
}
