//! Nonlinear least trimmed squares with an unknown level-shift position.
//!
//! For every candidate shift position the search draws elemental subsets,
//! fits them by ALS and concentrates the best ones. The overall optimum is
//! scaled, its shift position refined locally, outliers are flagged, and a
//! final ALS fit on the unflagged points supplies the inference.

mod concentration;
pub mod inference;
pub mod outliers;
pub mod refine;
pub mod scale;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use concentration::{
    sample_elemental, scaled_residuals, trimmed_objective, CandidateFit, PositionSearch, Search,
};
pub use inference::{t_critical, two_sided_p, CoefficientInference};
pub use outliers::{flag_outliers, flag_outliers_with, outlier_cutoff, OutlierRule};
pub use refine::{huber_rho, shift_window, Refinement};
pub use scale::{consistency_factor, estimate_scale, small_sample_factor, ScaleEstimate};

use crate::als::AlsOptions;
use crate::error::{Error, Result};
use crate::model::{Basis, ModelSpec, Theta};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LtsOptions {
    /// Subset size; `None` uses `floor(h_frac * T)` clamped to `[ceil(T/2), T-1]`.
    pub h: Option<usize>,
    pub h_frac: f64,
    /// Elemental trials per candidate position.
    pub trials: usize,
    pub nbest: usize,
    /// Candidate positions are `u+1..=T-u`; `None` uses `max(3, floor(T/20))`.
    pub margin: Option<usize>,
    /// Explicit candidate positions, overriding `margin`.
    pub positions: Option<Vec<usize>>,
    pub huber_b: f64,
    pub window_width: usize,
    pub conf_level: f64,
    pub outlier_rule: OutlierRule,
    pub seed: u64,
    pub als: AlsOptions,
    pub max_cstep_iter: usize,
    /// ALS iteration cap for the elemental fit and its two C-steps, which
    /// then also skip the Gauss-Newton step; `None` fits trials like every
    /// other subset. Candidates kept for concentration are first refit with
    /// the full `als` settings.
    pub trial_als_iter: Option<usize>,
    /// Contiguous position chunks searched concurrently; warm starts chain
    /// only within a chunk. 1 is the sequential scan.
    pub parallel_chunks: usize,
}

impl Default for LtsOptions {
    fn default() -> Self {
        Self {
            h: None,
            h_frac: 0.75,
            trials: 250,
            nbest: 10,
            margin: None,
            positions: None,
            huber_b: 2.0,
            window_width: 15,
            conf_level: 0.99,
            outlier_rule: OutlierRule::FixedQuantile,
            seed: 0,
            als: AlsOptions::default(),
            max_cstep_iter: 100,
            trial_als_iter: Some(5),
            parallel_chunks: 1,
        }
    }
}

impl LtsOptions {
    /// Checks the settings that do not depend on the series.
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidOptions(m));
        if !(self.h_frac > 0.0 && self.h_frac <= 1.0) {
            return bad(format!("h fraction must be in (0, 1], got {}", self.h_frac));
        }
        if self.trials == 0 {
            return bad("number of trials must be >= 1".into());
        }
        if self.nbest == 0 {
            return bad("nbest must be >= 1".into());
        }
        if !(self.huber_b > 0.0) {
            return bad(format!("Huber b must be > 0, got {}", self.huber_b));
        }
        if self.window_width < 3 {
            return bad(format!("window width must be >= 3, got {}", self.window_width));
        }
        if !(self.conf_level > 0.0 && self.conf_level < 1.0) {
            return bad(format!("confidence level must be in (0, 1), got {}", self.conf_level));
        }
        if self.max_cstep_iter == 0 {
            return bad("max_cstep_iter must be >= 1".into());
        }
        if self.trial_als_iter == Some(0) {
            return bad("trial_als_iter must be >= 1".into());
        }
        if self.parallel_chunks == 0 {
            return bad("parallel_chunks must be >= 1".into());
        }
        if self.margin == Some(0) {
            return bad("margin must be >= 1".into());
        }
        self.als.validate()
    }

    pub fn resolve_h(&self, len: usize) -> usize {
        match self.h {
            Some(h) => h,
            None => {
                let h = (self.h_frac * len as f64).floor() as usize;
                h.clamp(len.div_ceil(2), len.saturating_sub(1).max(len.div_ceil(2)))
            }
        }
    }

    pub fn resolve_margin(&self, len: usize) -> usize {
        self.margin.unwrap_or_else(|| (len / 20).max(3))
    }

    /// Candidate shift positions for a series of length `len`, ascending.
    pub fn candidate_positions(&self, len: usize) -> Result<Vec<usize>> {
        if let Some(ps) = &self.positions {
            let mut ps = ps.clone();
            ps.sort_unstable();
            ps.dedup();
            if ps.is_empty() || ps[0] < 2 || *ps.last().unwrap() > len {
                return Err(Error::InvalidOptions(format!(
                    "candidate positions must lie in 2..={len}"
                )));
            }
            return Ok(ps);
        }
        let u = self.resolve_margin(len);
        if 2 * u >= len {
            return Err(Error::InvalidOptions(format!(
                "margin {u} leaves no candidate positions for T = {len}"
            )));
        }
        Ok((u + 1..=len - u).collect())
    }

    fn check_h(&self, h: usize, len: usize, p: usize) -> Result<()> {
        if 2 * h < len || h >= len || h < p {
            return Err(Error::InvalidOptions(format!(
                "h = {h} violates T/2 <= h < T and h >= p (T = {len}, p = {p})"
            )));
        }
        Ok(())
    }
}

/// Best fit at one candidate position.
#[derive(Debug, Clone, PartialEq)]
pub struct PositionFit {
    pub position: usize,
    /// Trimmed objective of the best candidate.
    pub objective: f64,
    /// Residuals of the best candidate, `t = 1..=T`.
    pub residuals: Vec<f64>,
    /// Objectives of all concentrated candidates, ascending.
    pub pool_objectives: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FitResult {
    pub spec: ModelSpec,
    pub h: usize,
    pub nbest: usize,
    /// Final fit on the unflagged observations.
    pub theta: Theta,
    /// Robust optimum with the refined shift position.
    pub theta_opt: Theta,
    /// Position of the robust optimum before refinement.
    pub coarse_position: Option<usize>,
    /// Trimmed objective of the robust optimum before refinement.
    pub objective: f64,
    pub sigma: f64,
    pub perfect_fit: bool,
    /// `(y - f(theta_opt)) / sigma`.
    pub scaled_res: Vec<f64>,
    pub outlier_flags: Vec<bool>,
    /// Reporting order of [`ModelSpec::coefficient_names`].
    pub coefficients: Vec<CoefficientInference>,
    pub shift_significant: bool,
    pub positions: Vec<PositionFit>,
    /// Positions where every trial was singular.
    pub skipped_positions: Vec<usize>,
    pub refinement_profile: Vec<(usize, f64)>,
    pub final_iterations: usize,
    pub final_converged: bool,
    pub warnings: Vec<String>,
}

impl FitResult {
    pub fn coef_se(&self) -> Vec<f64> {
        self.coefficients.iter().map(|c| c.se).collect()
    }

    pub fn t_stats(&self) -> Vec<f64> {
        self.coefficients.iter().map(|c| c.t).collect()
    }

    pub fn p_values(&self) -> Vec<f64> {
        self.coefficients.iter().map(|c| c.p).collect()
    }

    /// Flagged times, 1-based.
    pub fn outliers(&self) -> Vec<usize> {
        self.outlier_flags
            .iter()
            .enumerate()
            .filter(|(_, f)| **f)
            .map(|(i, _)| i + 1)
            .collect()
    }

    /// Shift position of the final fit, if the model has a shift.
    pub fn shift_position(&self) -> Option<usize> {
        self.spec.shift.then_some(self.theta.delta2)
    }

    /// `(position, nbest objectives)` for every searched position.
    pub fn objective_profile(&self) -> Vec<(usize, Vec<f64>)> {
        self.positions
            .iter()
            .map(|p| (p.position, p.pool_objectives.iter().take(self.nbest).copied().collect()))
            .collect()
    }
}

/// One concentration step on `cand` (see [`Search::cstep`]).
pub fn cstep(y: &[f64], spec: &ModelSpec, cand: &CandidateFit, opts: &LtsOptions) -> Result<CandidateFit> {
    let basis = Basis::new(spec, y.len())?;
    let h = opts.resolve_h(y.len());
    Search::new(y, &basis, h, opts).cstep(cand)
}

/// Search at one position with the given warm starts (see
/// [`Search::fits_for_shift`]). `position` is ignored for shift-free specs.
pub fn fits_for_shift(
    y: &[f64],
    spec: &ModelSpec,
    position: usize,
    warm_starts: &[CandidateFit],
    opts: &LtsOptions,
) -> Result<PositionSearch> {
    let basis = Basis::new(spec, y.len())?;
    let h = opts.resolve_h(y.len());
    Search::new(y, &basis, h, opts).fits_for_shift(spec.shift.then_some(position), warm_starts)
}

/// Huber refinement of `theta_opt.delta2` over the window clipped to the
/// candidate range.
pub fn refine_shift(
    y: &[f64],
    spec: &ModelSpec,
    theta_opt: &Theta,
    sigma: f64,
    opts: &LtsOptions,
) -> Result<Refinement> {
    let basis = Basis::new(spec, y.len())?;
    let positions = opts.candidate_positions(y.len())?;
    Ok(refine_with(&basis, y, theta_opt, sigma, opts, &positions))
}

fn refine_with(
    basis: &Basis,
    y: &[f64],
    theta: &Theta,
    sigma: f64,
    opts: &LtsOptions,
    positions: &[usize],
) -> Refinement {
    let mut no_shift = theta.clone();
    no_shift.delta1 = 0.0;
    let base = basis.residuals(&no_shift, y);
    let (lo, hi) = (positions[0], *positions.last().unwrap());
    let window = shift_window(theta.delta2, opts.window_width, lo, hi);
    refine::refine_from_residuals(&base, theta.delta1, theta.delta2, window, sigma, opts.huber_b)
}

type ScanItem = (usize, Result<PositionSearch>);

fn scan_chunk(search: &Search<'_>, positions: &[usize]) -> Vec<ScanItem> {
    let mut warm: Vec<CandidateFit> = Vec::new();
    let mut out = Vec::with_capacity(positions.len());
    for &ts in positions {
        let r = search.fits_for_shift(Some(ts), &warm);
        if let Ok(ps) = &r {
            warm = ps.retained.clone();
        }
        out.push((ts, r));
    }
    out
}

/// Robust fit of `spec` to `y`.
pub fn nlts(y: &[f64], spec: &ModelSpec, opts: &LtsOptions) -> Result<FitResult> {
    spec.validate()?;
    opts.validate()?;
    if let Some(i) = y.iter().position(|v| !v.is_finite()) {
        return Err(Error::InvalidInput(format!("non-finite value at t = {}", i + 1)));
    }
    let len = y.len();
    let p = spec.param_count();
    if len < p {
        return Err(Error::InvalidInput(format!(
            "series length {len} is smaller than the parameter count {p}"
        )));
    }
    let h = opts.resolve_h(len);
    opts.check_h(h, len, p)?;
    let mut warnings = Vec::new();
    if len as f64 / p as f64 <= 5.0 {
        warnings.push(format!("T/p = {len}/{p} <= 5: few observations per parameter"));
    }

    let basis = Basis::new(spec, len)?;
    let search = Search::new(y, &basis, h, opts);

    let mut positions = Vec::new();
    let mut skipped = Vec::new();
    let mut best: Option<CandidateFit> = None;
    let candidate_positions = if spec.shift {
        opts.candidate_positions(len)?
    } else {
        Vec::new()
    };

    if spec.shift {
        let chunks = opts.parallel_chunks.min(candidate_positions.len()).max(1);
        let scanned: Vec<ScanItem> = if chunks == 1 {
            scan_chunk(&search, &candidate_positions)
        } else {
            let size = candidate_positions.len().div_ceil(chunks);
            candidate_positions
                .par_chunks(size)
                .map(|c| scan_chunk(&search, c))
                .collect::<Vec<_>>()
                .into_iter()
                .flatten()
                .collect()
        };
        for (ts, r) in scanned {
            match r {
                Ok(ps) => {
                    let top = ps.retained.into_iter().next().expect("non-empty pool");
                    positions.push(PositionFit {
                        position: ts,
                        objective: top.objective,
                        residuals: top.residuals.clone(),
                        pool_objectives: ps.pool_objectives,
                    });
                    if best.as_ref().is_none_or(|b| top.objective < b.objective) {
                        best = Some(top);
                    }
                }
                Err(Error::DegenerateSeries { .. }) => skipped.push(ts),
                Err(e) => return Err(e),
            }
        }
        if !skipped.is_empty() {
            warnings.push(format!("{} candidate positions skipped as degenerate", skipped.len()));
        }
    } else {
        let ps = search.fits_for_shift(None, &[])?;
        best = ps.retained.into_iter().next();
    }
    let best = best.ok_or(Error::NoIdentifiableShift)?;

    let series_scale = y.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let ScaleEstimate { sigma, perfect_fit } = estimate_scale(best.objective, h, len, spec.param_count(), series_scale);
    if perfect_fit {
        warnings.push("trimmed objective is zero: perfect fit on the h-subset".into());
    }

    let mut theta_opt = best.theta.clone();
    let mut refinement_profile = Vec::new();
    if spec.shift {
        let r = refine_with(&basis, y, &theta_opt, sigma, opts, &candidate_positions);
        theta_opt.delta2 = r.position;
        refinement_profile = r.profile;
    }
    let residuals = if theta_opt.delta2 == best.theta.delta2 {
        best.residuals.clone()
    } else {
        basis.residuals(&theta_opt, y)
    };
    let scaled_res: Vec<f64> = residuals.iter().map(|r| r / sigma).collect();
    let outlier_flags = flag_outliers_with(&scaled_res, opts.conf_level, opts.outlier_rule);

    let solver = &search.als;
    let mut subset: Vec<usize> = (1..=len).filter(|t| !outlier_flags[t - 1]).collect();
    if solver.check_subset(&subset, theta_opt.delta2).is_err() {
        warnings.push("unflagged points cannot identify the model: final fit on the h-subset".into());
        subset = best.subset.clone();
    }
    let (fit, blocks) = solver.refit_with_inference(&subset, &theta_opt)?;
    if !fit.converged {
        warnings.push(format!("final ALS fit did not converge in {} iterations", fit.iterations));
    }
    let coefficients = inference::coefficient_inference(&fit.theta.coefficients(spec), &blocks);
    let shift_significant = spec.shift && {
        let d = coefficients[spec.delta1_offset()];
        d.t.abs() > t_critical(opts.conf_level, d.df)
    };

    Ok(FitResult {
        spec: *spec,
        h,
        nbest: opts.nbest,
        theta: fit.theta,
        theta_opt,
        coarse_position: spec.shift.then_some(best.theta.delta2),
        objective: best.objective,
        sigma,
        perfect_fit,
        scaled_res,
        outlier_flags,
        coefficients,
        shift_significant,
        positions,
        skipped_positions: skipped,
        refinement_profile,
        final_iterations: fit.iterations,
        final_converged: fit.converged,
        warnings,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::predict;
    use crate::testkit;

    #[test]
    fn resolve_h_and_positions() {
        let o = LtsOptions::default();
        assert_eq!(o.resolve_h(48), 36);
        assert_eq!(o.resolve_h(144), 108);
        assert_eq!(o.resolve_h(4), 3);
        assert_eq!(o.candidate_positions(48).unwrap(), (4..=45).collect::<Vec<_>>());
        assert_eq!(o.candidate_positions(144).unwrap().first(), Some(&8));
        let fixed = LtsOptions {
            positions: Some(vec![9, 7, 7]),
            ..LtsOptions::default()
        };
        assert_eq!(fixed.candidate_positions(12).unwrap(), vec![7, 9]);
    }

    #[test]
    fn option_validation() {
        assert!(LtsOptions::default().validate().is_ok());
        let bad = [
            LtsOptions { window_width: 2, ..Default::default() },
            LtsOptions { conf_level: 1.0, ..Default::default() },
            LtsOptions { trials: 0, ..Default::default() },
            LtsOptions { margin: Some(0), ..Default::default() },
        ];
        for o in bad {
            assert!(matches!(o.validate(), Err(Error::InvalidOptions(_))));
        }
        let o = LtsOptions { h: Some(48), ..Default::default() };
        let spec = ModelSpec::new(1, 2, 1);
        assert!(nlts(&[0.0; 48], &spec, &o).is_err());
    }

    #[test]
    fn exact_series_with_outliers() {
        let spec = ModelSpec::new(1, 2, 1);
        let th = testkit::trade_like_theta();
        let mut y: Vec<f64> = (1..=48).map(|t| predict(&th, &spec, t)).collect();
        for t in [5, 40] {
            y[t - 1] += 300.0;
        }
        let opts = LtsOptions {
            trials: 30,
            seed: 3,
            ..LtsOptions::default()
        };
        let fit = nlts(&y, &spec, &opts).unwrap();
        assert_eq!(fit.theta.delta2, 27);
        assert!(fit.outlier_flags[4] && fit.outlier_flags[39]);
        assert!((fit.theta.delta1 - th.delta1).abs() < 1e-6);
        assert!(fit.p_values().iter().all(|p| p.is_nan() || (0.0..=1.0).contains(p)));
    }

    #[test]
    fn shift_free_spec() {
        let spec = ModelSpec::new(1, 1, 0).with_shift(false);
        let y: Vec<f64> = (1..=36)
            .map(|t| 2.0 + 0.5 * t as f64 + 3.0 * (std::f64::consts::PI * t as f64 / 6.0).cos())
            .collect();
        let fit = nlts(&y, &spec, &LtsOptions { trials: 10, ..Default::default() }).unwrap();
        assert!(fit.positions.is_empty());
        assert!(!fit.shift_significant);
        assert_eq!(fit.coefficients.len(), 4);
        assert!((fit.theta.alpha[1] - 0.5).abs() < 1e-8);
    }
}
