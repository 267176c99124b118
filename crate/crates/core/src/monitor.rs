//! Repeated shift detection and batch runs over many series.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::io::{ser_sig, ser_sig_opt};
use crate::lts::{nlts, FitResult, LtsOptions};
use crate::model::{ModelSpec, Theta, TimeSeries};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ModelInfo {
    #[serde(rename = "A")]
    pub trend_degree: usize,
    #[serde(rename = "B")]
    pub harmonics: usize,
    #[serde(rename = "G")]
    pub amplitude_degree: usize,
    pub period: usize,
}

impl From<&ModelSpec> for ModelInfo {
    fn from(s: &ModelSpec) -> Self {
        Self {
            trend_degree: s.trend_degree,
            harmonics: s.harmonics,
            amplitude_degree: s.amplitude_degree,
            period: s.period,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ShiftReport {
    pub position: usize,
    #[serde(serialize_with = "ser_sig")]
    pub height: f64,
    #[serde(serialize_with = "ser_sig_opt")]
    pub t_stat: Option<f64>,
    #[serde(serialize_with = "ser_sig_opt")]
    pub p_value: Option<f64>,
    /// Undo iteration that found the shift, from 1.
    #[serde(rename = "pass")]
    pub pass_index: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoefficientReport {
    pub name: String,
    #[serde(serialize_with = "ser_sig")]
    pub value: f64,
    #[serde(serialize_with = "ser_sig_opt")]
    pub se: Option<f64>,
    #[serde(serialize_with = "ser_sig_opt")]
    pub t: Option<f64>,
    #[serde(serialize_with = "ser_sig_opt")]
    pub p: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeriesReport {
    pub series_id: String,
    pub model: ModelInfo,
    pub h: usize,
    pub seed: u64,
    pub shifts: Vec<ShiftReport>,
    pub outliers: Vec<usize>,
    pub coefficients: Vec<CoefficientReport>,
    #[serde(serialize_with = "ser_sig")]
    pub sigma: f64,
    pub warnings: Vec<String>,
    /// Coefficients of the final pass (not serialized).
    #[serde(skip)]
    pub final_theta: Theta,
}

fn finite(v: f64) -> Option<f64> {
    v.is_finite().then_some(v)
}

/// Passes of [`detect_shifts`] with the fits behind them.
#[derive(Debug)]
pub struct ShiftDetection {
    pub report: SeriesReport,
    pub passes: Vec<FitResult>,
    /// Series after undoing every reported shift.
    pub adjusted: Vec<f64>,
    /// Failure of a pass after the first; earlier passes are kept.
    pub error: Option<Error>,
}

/// Fits, and while the shift is significant, subtracts `delta1` from
/// `y_t` for `t >= delta2` and fits again, up to `max_shifts` shifts.
/// Outliers, coefficients and scale come from the last pass.
pub fn detect_shifts(y: &[f64], spec: &ModelSpec, opts: &LtsOptions, max_shifts: usize) -> Result<SeriesReport> {
    let d = detect_shifts_detailed("", y, spec, opts, max_shifts)?;
    Ok(d.report)
}

pub fn detect_shifts_detailed(
    series_id: &str,
    y: &[f64],
    spec: &ModelSpec,
    opts: &LtsOptions,
    max_shifts: usize,
) -> Result<ShiftDetection> {
    if max_shifts == 0 {
        return Err(Error::InvalidOptions("max_shifts must be >= 1".into()));
    }
    let mut work = y.to_vec();
    let mut shifts = Vec::new();
    let mut passes: Vec<FitResult> = Vec::new();
    let mut error = None;
    for pass in 1..=max_shifts {
        let fit = match nlts(&work, spec, opts) {
            Ok(f) => f,
            Err(e) if passes.is_empty() => return Err(e),
            Err(e) => {
                error = Some(e);
                break;
            }
        };
        let significant = fit.shift_significant;
        if significant {
            let (pos, height) = (fit.theta.delta2, fit.theta.delta1);
            let d = fit.coefficients[fit.coefficients.len() - 1];
            shifts.push(ShiftReport {
                position: pos,
                height,
                t_stat: finite(d.t),
                p_value: finite(d.p),
                pass_index: pass,
            });
            for v in &mut work[pos - 1..] {
                *v -= height;
            }
        }
        passes.push(fit);
        if !significant || !spec.shift {
            break;
        }
    }

    let last = passes.last().expect("at least one pass");
    let mut warnings = last.warnings.clone();
    if let Some(e) = &error {
        warnings.push(format!("pass {} failed: {e}", passes.len() + 1));
    }
    let coefficients = spec
        .coefficient_names()
        .into_iter()
        .zip(&last.coefficients)
        .map(|(name, c)| CoefficientReport {
            name,
            value: c.estimate,
            se: finite(c.se),
            t: finite(c.t),
            p: finite(c.p),
        })
        .collect();
    let report = SeriesReport {
        series_id: series_id.to_string(),
        model: spec.into(),
        h: last.h,
        seed: opts.seed,
        shifts,
        outliers: last.outliers(),
        coefficients,
        sigma: last.sigma,
        warnings,
        final_theta: last.theta.clone(),
    };
    Ok(ShiftDetection {
        report,
        passes,
        adjusted: work,
        error,
    })
}

/// 64-bit FNV-1a.
pub fn fnv1a(s: &str) -> u64 {
    s.bytes().fold(0xcbf2_9ce4_8422_2325, |h, b| {
        (h ^ b as u64).wrapping_mul(0x0000_0100_0000_01b3)
    })
}

/// Seed of the series `id` in a batch seeded with `seed`.
pub fn series_seed(seed: u64, id: &str) -> u64 {
    seed.wrapping_add(fnv1a(id))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FailureNote {
    pub series_id: String,
    pub error: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct BatchSummary {
    pub series: usize,
    pub succeeded: usize,
    pub with_shifts: usize,
    pub total_shifts: usize,
    pub total_outliers: usize,
    pub failures: usize,
    pub failed: Vec<FailureNote>,
}

#[derive(Debug, Clone, Default)]
pub struct BatchOutput {
    /// Successful reports, in input order.
    pub reports: Vec<SeriesReport>,
    pub summary: BatchSummary,
}

/// Runs [`detect_shifts`] on each series with its own seed, on `jobs`
/// threads. Inputs that could not be read are reported as failures.
pub fn batch_run(
    inputs: Vec<(String, Result<TimeSeries>)>,
    spec: &ModelSpec,
    opts: &LtsOptions,
    max_shifts: usize,
    jobs: usize,
) -> Result<BatchOutput> {
    spec.validate()?;
    opts.validate()?;
    let run = |(id, series): (String, Result<TimeSeries>)| -> (String, Result<SeriesReport>) {
        let res = series.and_then(|s| {
            let o = LtsOptions {
                seed: series_seed(opts.seed, &id),
                ..opts.clone()
            };
            detect_shifts_detailed(&id, s.values(), spec, &o, max_shifts).map(|d| d.report)
        });
        (id, res)
    };
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.max(1))
        .build()
        .map_err(|e| Error::InvalidOptions(format!("cannot start {jobs} worker threads: {e}")))?;
    let results: Vec<(String, Result<SeriesReport>)> =
        pool.install(|| inputs.into_par_iter().map(run).collect());

    let mut out = BatchOutput::default();
    out.summary.series = results.len();
    for (id, r) in results {
        match r {
            Ok(rep) => {
                out.summary.succeeded += 1;
                out.summary.with_shifts += usize::from(!rep.shifts.is_empty());
                out.summary.total_shifts += rep.shifts.len();
                out.summary.total_outliers += rep.outliers.len();
                out.reports.push(rep);
            }
            Err(e) => {
                out.summary.failures += 1;
                out.summary.failed.push(FailureNote {
                    series_id: id,
                    error: e.to_string(),
                });
            }
        }
    }
    Ok(out)
}
