//! The `nbl` command line tool.
//!
//! Exit codes: 0 success, 2 parse or usage error, 3 non-convergence,
//! 4 data the model cannot represent (no moment root), 1 anything else.

use std::ffi::OsString;
use std::fs;
use std::path::PathBuf;

use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::compound::{
    compound_cdf, compound_continuous, compound_discrete, compound_monte_carlo, compound_quantile,
    CompoundDistribution, ContinuousSeverity, DiscreteSeverity, EmpiricalCdf, Severity,
};
use crate::data::{zaire_dataset, zaire_text};
use crate::error::{Error, Result};
use crate::estimate::{fit_em_with, fit_mle, fit_moments, CountData, EmOptions, FitResult, MStepRule};
use crate::gof::{chi_square_test_with, TailCell};
use crate::nbl::{nbl_pmf_direct, nbl_pmf_recursive, NblParams};

#[derive(Debug, Parser)]
#[command(name = "nbl", version, about = "Negative binomial-Lindley claim count models")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Table,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Method {
    Moments,
    Mle,
    Em,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Rule {
    Complete,
    AsDisplayed,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Tail {
    Omitted,
    Pooled,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Estimate (r, θ) from count data.
    #[command(allow_negative_numbers = true)]
    Fit {
        /// `zaire` or a path to a two-column count file.
        #[arg(long)]
        data: String,
        #[arg(long, value_enum, default_value = "mle")]
        method: Method,
        /// EM stopping rule on the relative change of the log-likelihood.
        #[arg(long, default_value_t = 1e-10)]
        tol: f64,
        #[arg(long, default_value_t = 2000)]
        max_iter: u64,
        #[arg(long, value_enum, default_value = "complete")]
        rule: Rule,
        /// Start EM here instead of at the maximum likelihood estimate.
        #[arg(long, requires = "start_theta")]
        start_r: Option<f64>,
        #[arg(long, requires = "start_r")]
        start_theta: Option<f64>,
        #[arg(long, value_enum, default_value = "table")]
        format: Format,
    },
    /// Tabulate the pmf by both evaluation routes.
    #[command(allow_negative_numbers = true)]
    Pmf {
        #[arg(long)]
        r: f64,
        #[arg(long)]
        theta: f64,
        #[arg(long)]
        xmax: u64,
        /// Also print scale·p(x), e.g. the sample size for expected counts.
        #[arg(long)]
        scale: Option<f64>,
        #[arg(long, value_enum, default_value = "table")]
        format: Format,
    },
    /// Chi-square goodness of fit at given parameters.
    #[command(allow_negative_numbers = true)]
    Gof {
        #[arg(long)]
        data: String,
        #[arg(long)]
        r: f64,
        #[arg(long)]
        theta: f64,
        /// Number of estimated parameters subtracted from the degrees of freedom.
        #[arg(long, default_value_t = 2)]
        dof_penalty: u32,
        #[arg(long, value_enum, default_value = "omitted")]
        tail: Tail,
        #[arg(long, value_enum, default_value = "table")]
        format: Format,
    },
    /// Aggregate claims distribution.
    #[command(allow_negative_numbers = true)]
    Compound {
        #[arg(long)]
        r: f64,
        #[arg(long)]
        theta: f64,
        /// `size:prob,...` for integer claim sizes or `exponential:MEAN`.
        #[arg(long)]
        severity: String,
        #[arg(long)]
        ymax: f64,
        /// Starting mesh for continuous severities.
        #[arg(long, default_value_t = 200)]
        mesh: usize,
        /// Compare against this many simulated draws at the deciles.
        #[arg(long)]
        check_mc: Option<u64>,
        #[arg(long, default_value_t = 42)]
        seed: u64,
        #[arg(long, value_enum, default_value = "table")]
        format: Format,
    },
    /// Print a built-in dataset in the count file format.
    Dataset {
        #[arg(long, default_value = "zaire")]
        name: String,
        #[arg(long)]
        output: Option<PathBuf>,
    },
}

pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Parse { .. } | Error::InvalidArgument(_) => 2,
        Error::NonConvergence(_) => 3,
        Error::NoRoot(_) => 4,
        _ => 1,
    }
}

/// Parses arguments, runs the command and prints to stdout/stderr.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    match run(&cli.command) {
        Ok((text, code)) => {
            print!("{text}");
            code
        }
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

/// Output text and exit code for a parsed command.
pub fn run(cmd: &Command) -> Result<(String, i32)> {
    match cmd {
        Command::Fit {
            data,
            method,
            tol,
            max_iter,
            rule,
            start_r,
            start_theta,
            format,
        } => {
            if !(*tol > 0.0) {
                return Err(Error::InvalidArgument(format!("--tol must be > 0, got {tol}")));
            }
            let data = load_dataset(data)?;
            let start = match (start_r, start_theta) {
                (Some(r), Some(t)) => Some(NblParams::new(*r, *t).map_err(|e| Error::InvalidArgument(e.to_string()))?),
                _ => None,
            };
            let fit = cmd_fit(&data, *method, *tol, *max_iter, *rule, start)?;
            let code = if fit.converged { 0 } else { 3 };
            Ok((render(&fit, *format, fit_table)?, code))
        }
        Command::Pmf {
            r,
            theta,
            xmax,
            scale,
            format,
        } => {
            let rows = cmd_pmf(params_arg(*r, *theta)?, *xmax, *scale)?;
            Ok((render(&rows, *format, pmf_table)?, 0))
        }
        Command::Gof {
            data,
            r,
            theta,
            dof_penalty,
            tail,
            format,
        } => {
            let data = load_dataset(data)?;
            let tail = match tail {
                Tail::Omitted => TailCell::Omitted,
                Tail::Pooled => TailCell::Pooled,
            };
            let report = chi_square_test_with(&data, params_arg(*r, *theta)?, *dof_penalty, tail)?;
            Ok((render(&report, *format, |g| g.to_table())?, 0))
        }
        Command::Compound {
            r,
            theta,
            severity,
            ymax,
            mesh,
            check_mc,
            seed,
            format,
        } => {
            let report = cmd_compound(params_arg(*r, *theta)?, severity, *ymax, *mesh, *check_mc, *seed)?;
            Ok((render(&report, *format, compound_table)?, 0))
        }
        Command::Dataset { name, output } => {
            if name != "zaire" {
                return Err(Error::InvalidArgument(format!("unknown dataset `{name}`")));
            }
            match output {
                Some(path) => {
                    fs::write(path, zaire_text())?;
                    Ok((String::new(), 0))
                }
                None => Ok((zaire_text(), 0)),
            }
        }
    }
}

fn params_arg(r: f64, theta: f64) -> Result<NblParams> {
    NblParams::new(r, theta).map_err(|e| Error::InvalidArgument(e.to_string()))
}

fn render<T: Serialize>(value: &T, format: Format, table: impl Fn(&T) -> String) -> Result<String> {
    Ok(match format {
        Format::Table => table(value),
        Format::Json => serde_json::to_string_pretty(value).map_err(|e| Error::Io(e.to_string()))? + "\n",
    })
}

/// `zaire` or a file path.
pub fn load_dataset(spec: &str) -> Result<CountData> {
    if spec == "zaire" {
        return Ok(zaire_dataset());
    }
    parse_dataset(&fs::read_to_string(spec)?)
}

/// Two columns (count, frequency) separated by whitespace or a comma; `#`
/// starts a comment.
pub fn parse_dataset(text: &str) -> Result<CountData> {
    let mut rows: Vec<(u64, u64)> = Vec::new();
    let mut seen_at = std::collections::HashMap::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let body = raw.split('#').next().unwrap_or("").trim();
        if body.is_empty() {
            continue;
        }
        let fields: Vec<&str> = body
            .split(|c: char| c == ',' || c.is_whitespace())
            .filter(|f| !f.is_empty())
            .collect();
        if fields.len() != 2 {
            return Err(Error::Parse {
                line,
                message: format!("expected 2 columns, found {}", fields.len()),
            });
        }
        let num = |f: &str, what: &str| {
            f.parse::<u64>().map_err(|_| Error::Parse {
                line,
                message: format!("{what} `{f}` is not a nonnegative integer"),
            })
        };
        let (x, freq) = (num(fields[0], "count")?, num(fields[1], "frequency")?);
        if let Some(first) = seen_at.insert(x, line) {
            return Err(Error::Parse {
                line,
                message: format!("count {x} already given on line {first}"),
            });
        }
        if freq > 0 {
            rows.push((x, freq));
        }
    }
    if seen_at.is_empty() {
        return Err(Error::Parse {
            line: text.lines().count().max(1),
            message: "no data rows".into(),
        });
    }
    CountData::new(rows)
}

pub enum SeveritySpec {
    Discrete(DiscreteSeverity),
    Continuous(ContinuousSeverity),
}

/// `1:0.5,2:0.5` or `exponential:MEAN` (`exp:MEAN`).
pub fn parse_severity(spec: &str) -> Result<SeveritySpec> {
    let bad = |m: String| Error::InvalidArgument(format!("severity `{spec}`: {m}"));
    let spec_t = spec.trim();
    if let Some(rest) = spec_t
        .strip_prefix("exponential:")
        .or_else(|| spec_t.strip_prefix("exp:"))
    {
        let mean: f64 = rest.trim().parse().map_err(|_| bad(format!("bad mean `{rest}`")))?;
        return Ok(SeveritySpec::Continuous(ContinuousSeverity::exponential(mean)?));
    }
    let mut points = Vec::new();
    for item in spec_t.split(',') {
        let (s, p) = item
            .split_once(':')
            .ok_or_else(|| bad(format!("`{item}` is not size:prob")))?;
        let s: u64 = s.trim().parse().map_err(|_| bad(format!("bad size `{s}`")))?;
        let p: f64 = p.trim().parse().map_err(|_| bad(format!("bad probability `{p}`")))?;
        points.push((s, p));
    }
    Ok(SeveritySpec::Discrete(DiscreteSeverity::new(&points)?))
}

pub fn cmd_fit(
    data: &CountData,
    method: Method,
    tol: f64,
    max_iter: u64,
    rule: Rule,
    start: Option<NblParams>,
) -> Result<FitResult> {
    let moments = fit_moments(data)?;
    if method == Method::Moments {
        return Ok(moments);
    }
    let mle = match (method, start) {
        (Method::Em, Some(_)) => None,
        _ => Some(fit_mle(data, moments.params)?),
    };
    if method == Method::Mle {
        return Ok(mle.expect("computed above"));
    }
    let opts = EmOptions {
        tol,
        max_iter,
        rule: match rule {
            Rule::Complete => MStepRule::Complete,
            Rule::AsDisplayed => MStepRule::AsDisplayed,
        },
    };
    let from = start.unwrap_or_else(|| mle.expect("computed above").params);
    Ok(fit_em_with(data, from, &opts)?.0)
}

fn fit_table(f: &FitResult) -> String {
    let se = |v: Option<f64>| v.map(|s| format!("  (se {s:.6})")).unwrap_or_default();
    format!(
        "method          {}\nr               {:.6}{}\ntheta           {:.6}{}\nlog-likelihood  {:.6}\niterations      {}\nconverged       {}\n",
        serde_json::to_value(f.method).ok().and_then(|v| v.as_str().map(String::from)).unwrap_or_default(),
        f.params.r(),
        se(f.std_errors.map(|s| s.r)),
        f.params.theta(),
        se(f.std_errors.map(|s| s.theta)),
        f.log_likelihood,
        f.iterations,
        f.converged
    )
}

#[derive(Debug, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct PmfRow {
    pub x: u64,
    pub direct: f64,
    pub recursive: f64,
    pub cumulative: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub scaled: Option<f64>,
}

#[derive(Debug, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct PmfTable {
    pub rows: Vec<PmfRow>,
    pub max_relative_discrepancy: f64,
}

pub fn cmd_pmf(params: NblParams, x_max: u64, scale: Option<f64>) -> Result<PmfTable> {
    let rec = nbl_pmf_recursive(params, x_max as usize)?;
    let mut rows = Vec::with_capacity(rec.len());
    let mut cumulative = 0.0;
    let mut worst: f64 = 0.0;
    for (x, &p) in rec.iter().enumerate() {
        let direct = nbl_pmf_direct(params, x as u64)?;
        cumulative += p;
        if p > 0.0 {
            worst = worst.max(((direct - p) / p).abs());
        }
        rows.push(PmfRow {
            x: x as u64,
            direct,
            recursive: p,
            cumulative,
            scaled: scale.map(|s| s * p),
        });
    }
    Ok(PmfTable {
        rows,
        max_relative_discrepancy: worst,
    })
}

fn pmf_table(t: &PmfTable) -> String {
    let scaled = t.rows.first().is_some_and(|r| r.scaled.is_some());
    let mut out = format!("{:>6} {:>24} {:>24} {:>20}", "x", "direct", "recursive", "cumulative");
    if scaled {
        out += &format!(" {:>14}", "scaled");
    }
    out.push('\n');
    for r in &t.rows {
        out += &format!(
            "{:>6} {:>24.16e} {:>24.16e} {:>20.16}",
            r.x, r.direct, r.recursive, r.cumulative
        );
        if let Some(s) = r.scaled {
            out += &format!(" {s:>14.2}");
        }
        out.push('\n');
    }
    out += &format!("max relative discrepancy {:.3e}\n", t.max_relative_discrepancy);
    out
}

#[derive(Debug, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct DecileCheck {
    pub level: f64,
    pub y: f64,
    pub solver: f64,
    pub monte_carlo: f64,
    pub std_error: f64,
}

#[derive(Debug, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct MonteCarloCheck {
    pub draws: u64,
    pub seed: u64,
    pub max_deviation: f64,
    /// max |solver − MC| / standard error over the deciles
    pub max_std_errors: f64,
    pub deciles: Vec<DecileCheck>,
}

#[derive(Debug, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct CompoundReport {
    #[serde(flatten)]
    pub distribution: CompoundDistribution,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub monte_carlo: Option<MonteCarloCheck>,
}

pub fn cmd_compound(
    params: NblParams,
    severity: &str,
    y_max: f64,
    mesh: usize,
    check_mc: Option<u64>,
    seed: u64,
) -> Result<CompoundReport> {
    let sev = parse_severity(severity)?;
    let distribution = match &sev {
        SeveritySpec::Discrete(d) => {
            if y_max < 0.0 || y_max.fract() != 0.0 {
                return Err(Error::InvalidArgument(format!(
                    "--ymax must be a nonnegative integer for integer claim sizes, got {y_max}"
                )));
            }
            compound_discrete(params, d, y_max as usize)?
        }
        SeveritySpec::Continuous(c) => compound_continuous(params, c, y_max, mesh)?,
    };
    let monte_carlo = match check_mc {
        None => None,
        Some(draws) => {
            let which = match &sev {
                SeveritySpec::Discrete(d) => Severity::Discrete(d),
                SeveritySpec::Continuous(c) => Severity::Continuous(c),
            };
            let mc = compound_monte_carlo(params, which, draws, seed)?;
            Some(decile_check(&distribution, &mc, draws, seed)?)
        }
    };
    Ok(CompoundReport {
        distribution,
        monte_carlo,
    })
}

/// Compares solver and simulated cdfs at the solver's deciles that fall on the grid.
pub fn decile_check(dist: &CompoundDistribution, mc: &EmpiricalCdf, draws: u64, seed: u64) -> Result<MonteCarloCheck> {
    let mut deciles = Vec::new();
    for q in 1..10 {
        let level = q as f64 / 10.0;
        let y = match compound_quantile(dist, level) {
            Ok(y) => y,
            Err(Error::OutOfRange(_)) => continue,
            Err(e) => return Err(e),
        };
        deciles.push(DecileCheck {
            level,
            y,
            solver: compound_cdf(dist, y)?,
            monte_carlo: mc.cdf(y),
            std_error: mc.std_error(y),
        });
    }
    let max_deviation = deciles
        .iter()
        .map(|d| (d.solver - d.monte_carlo).abs())
        .fold(0.0, f64::max);
    let max_std_errors = deciles
        .iter()
        .map(|d| (d.solver - d.monte_carlo).abs() / d.std_error.max(f64::MIN_POSITIVE))
        .fold(0.0, f64::max);
    Ok(MonteCarloCheck {
        draws,
        seed,
        max_deviation,
        max_std_errors,
        deciles,
    })
}

fn compound_table(rep: &CompoundReport) -> String {
    let d = &rep.distribution;
    let head = match d.kind {
        crate::compound::CompoundKind::Discrete => "probability",
        crate::compound::CompoundKind::Continuous => "density",
    };
    let mut out = format!(
        "atom at zero {:.12}\n{:>12} {:>22} {:>16}\n",
        d.atom_at_zero, "y", head, "cdf"
    );
    for (y, v) in d.grid.iter().zip(&d.values) {
        let cdf = compound_cdf(d, *y).unwrap_or(f64::NAN);
        out += &format!("{y:>12.6} {v:>22.14e} {cdf:>16.12}\n");
    }
    if let Some(mc) = &rep.monte_carlo {
        out += &format!(
            "monte carlo ({} draws, seed {}): max decile deviation {:.3e} ({:.2} standard errors)\n",
            mc.draws, mc.seed, mc.max_deviation, mc.max_std_errors
        );
    }
    out
}
