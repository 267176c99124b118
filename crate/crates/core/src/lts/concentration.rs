//! Trimmed objective, concentration steps and the per-position search.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::LtsOptions;
use crate::als::AlsSolver;
use crate::error::{Error, Result};
use crate::model::{Basis, ModelSpec, Theta};

/// A fit together with its h-subset and trimmed objective.
#[derive(Debug, Clone, PartialEq)]
pub struct CandidateFit {
    pub theta: Theta,
    /// The h-subset, ascending 1-based times.
    pub subset: Vec<usize>,
    /// Sum of the h smallest squared residuals of `theta` over the series.
    pub objective: f64,
    /// Residuals of `theta` for `t = 1..=T`.
    pub residuals: Vec<f64>,
}

impl CandidateFit {
    /// Residuals divided by `sqrt(objective / h)`.
    pub fn scaled_residuals(&self) -> Vec<f64> {
        scale_by_trimmed(&self.residuals, self.objective, self.subset.len())
    }
}

/// Indices (1-based, ascending) of the `h` smallest squared residuals and
/// their sum. Ties are broken by time index.
pub(crate) fn smallest_h(residuals: &[f64], h: usize) -> (Vec<usize>, f64) {
    let mut keyed: Vec<(f64, usize)> = residuals
        .iter()
        .enumerate()
        .map(|(i, r)| (r * r, i + 1))
        .collect();
    if h < keyed.len() {
        keyed.select_nth_unstable_by(h, |a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
        keyed.truncate(h);
    }
    keyed.sort_unstable_by_key(|k| k.1);
    let sum = keyed.iter().map(|k| k.0).sum();
    (keyed.into_iter().map(|k| k.1).collect(), sum)
}

/// Sum of the `h` smallest squared residuals of `theta` on `y`.
pub fn trimmed_objective(theta: &Theta, spec: &ModelSpec, y: &[f64], h: usize) -> f64 {
    let mut sq: Vec<f64> = crate::model::residuals(theta, spec, y)
        .into_iter()
        .map(|r| r * r)
        .collect();
    sq.sort_by(f64::total_cmp);
    sq.iter().take(h).sum()
}

fn scale_by_trimmed(residuals: &[f64], objective: f64, h: usize) -> Vec<f64> {
    if objective <= 0.0 || h == 0 {
        return vec![0.0; residuals.len()];
    }
    let s = (objective / h as f64).sqrt();
    residuals.iter().map(|r| r / s).collect()
}

/// Residuals divided by the root mean of the `h` smallest squared
/// residuals. A zero trimmed sum yields all zeros.
pub fn scaled_residuals(theta: &Theta, spec: &ModelSpec, y: &[f64], h: usize) -> Vec<f64> {
    let r = crate::model::residuals(theta, spec, y);
    let (_, obj) = smallest_h(&r, h.min(r.len()));
    scale_by_trimmed(&r, obj, h)
}

/// Elemental subset of `p - 1` distinct times for candidate shift position
/// `t_s`: `t_s` itself, one time before it, and `p - 3` uniform draws from
/// the whole series. Without a position (`None`) all `size` elements are
/// uniform draws.
pub fn sample_elemental<R: Rng>(
    len: usize,
    size: usize,
    shift_position: Option<usize>,
    rng: &mut R,
) -> Result<Vec<usize>> {
    if len < size || size == 0 {
        return Err(Error::InvalidInput(format!(
            "cannot draw {size} distinct times from a series of length {len}"
        )));
    }
    let mut chosen = Vec::with_capacity(size);
    if let Some(ts) = shift_position {
        if ts < 2 || ts > len || size < 2 {
            return Err(Error::InvalidInput(format!(
                "shift position {ts} infeasible for elemental subset of size {size}"
            )));
        }
        chosen.push(ts);
        chosen.push(rng.random_range(1..ts));
    }
    while chosen.len() < size {
        let t = rng.random_range(1..=len);
        if !chosen.contains(&t) {
            chosen.push(t);
        }
    }
    chosen.sort_unstable();
    Ok(chosen)
}

/// splitmix64 finaliser.
fn mix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Independent stream per (seed, position, trial).
pub(crate) fn trial_rng(seed: u64, position: usize, trial: usize) -> ChaCha8Rng {
    let s = mix(mix(seed) ^ (position as u64)) ^ mix(trial as u64 ^ 0xA5A5_A5A5);
    ChaCha8Rng::seed_from_u64(mix(s))
}

/// Result of the search at one candidate position.
#[derive(Debug, Clone)]
pub struct PositionSearch {
    /// Up to `nbest` best candidates with distinct subsets, best first.
    pub retained: Vec<CandidateFit>,
    /// Objectives of the whole pool (fresh and warm-started), ascending.
    pub pool_objectives: Vec<f64>,
    /// Singular draws that were redrawn without counting as a trial.
    pub singular_restarts: usize,
}

/// Fitting context for one series: regressors, ALS and LTS settings.
pub struct Search<'a> {
    pub(crate) y: &'a [f64],
    pub(crate) basis: &'a Basis,
    pub(crate) als: AlsSolver<'a>,
    trial_als: AlsSolver<'a>,
    pub(crate) h: usize,
    pub(crate) opts: &'a LtsOptions,
}

impl<'a> Search<'a> {
    pub fn new(y: &'a [f64], basis: &'a Basis, h: usize, opts: &'a LtsOptions) -> Self {
        let mut trial_opts = opts.als;
        if let Some(cap) = opts.trial_als_iter {
            trial_opts.max_iter = cap;
            trial_opts.gauss_newton = false;
        }
        Self {
            y,
            basis,
            als: AlsSolver::new(basis, y, opts.als),
            trial_als: AlsSolver::new(basis, y, trial_opts),
            h,
            opts,
        }
    }

    /// Wraps a fit computed on `subset`.
    pub fn candidate(&self, theta: Theta, subset: Vec<usize>) -> CandidateFit {
        let residuals = self.basis.residuals(&theta, self.y);
        let (_, objective) = smallest_h(&residuals, self.h);
        CandidateFit {
            theta,
            subset,
            objective,
            residuals,
        }
    }

    /// One concentration step: refit by warm-started ALS on the `h`
    /// observations with smallest squared residuals under `cand.theta`.
    /// A candidate whose own subset is already that set is returned as is.
    pub fn cstep(&self, cand: &CandidateFit) -> Result<CandidateFit> {
        self.cstep_with(&self.als, cand)
    }

    fn cstep_with(&self, als: &AlsSolver, cand: &CandidateFit) -> Result<CandidateFit> {
        let (next, _) = smallest_h(&cand.residuals, self.h);
        if next == cand.subset {
            return Ok(cand.clone());
        }
        let fit = als.refit(&next, &cand.theta)?;
        let residuals = self.basis.residuals(&fit.theta, self.y);
        let (_, objective) = smallest_h(&residuals, self.h);
        // `subset` records the set the fit was computed on.
        Ok(CandidateFit {
            theta: fit.theta,
            subset: next,
            objective,
            residuals,
        })
    }

    /// C-steps until the subset repeats or the objective stops decreasing.
    pub fn concentrate(&self, cand: CandidateFit) -> Result<CandidateFit> {
        let mut cur = self.polish(cand)?;
        for _ in 0..self.opts.max_cstep_iter {
            let next = self.cstep(&cur)?;
            if next.subset == cur.subset || next.objective >= cur.objective {
                break;
            }
            cur = next;
        }
        Ok(cur)
    }

    /// Refit on the candidate's own subset with the full iteration cap,
    /// kept only if the objective does not rise.
    fn polish(&self, cand: CandidateFit) -> Result<CandidateFit> {
        if self.opts.trial_als_iter.is_none() {
            return Ok(cand);
        }
        let fit = self.als.refit(&cand.subset, &cand.theta)?;
        let next = self.candidate(fit.theta, cand.subset.clone());
        Ok(if next.objective <= cand.objective { next } else { cand })
    }

    /// Fit on an elemental subset followed by exactly two C-steps.
    fn trial(&self, elemental: &[usize], position: Option<usize>) -> Result<CandidateFit> {
        let als = &self.trial_als;
        let fit = als.fit(elemental, position.unwrap_or(0))?;
        let start = self.candidate(fit.theta, elemental.to_vec());
        let one = self.cstep_with(als, &start)?;
        self.cstep_with(als, &one)
    }

    /// Random starts at one candidate shift position (or for the shift-free
    /// model when `position` is `None`), plus warm starts carried over from
    /// the previous position.
    pub fn fits_for_shift(
        &self,
        position: Option<usize>,
        warm_starts: &[CandidateFit],
    ) -> Result<PositionSearch> {
        let spec = self.basis.spec();
        let len = self.y.len();
        let size = spec.coef_count();
        let trials = self.opts.trials;
        let restart_cap = 100 * trials;
        let pos_key = position.unwrap_or(0);

        let mut fresh: Vec<(usize, CandidateFit)> = Vec::with_capacity(trials);
        let mut consecutive = 0usize;
        let mut restarts = 0usize;
        for m in 0..trials {
            let mut rng = trial_rng(self.opts.seed, pos_key, m);
            loop {
                let e = sample_elemental(len, size, position, &mut rng)?;
                match self.trial(&e, position) {
                    Ok(c) => {
                        consecutive = 0;
                        fresh.push((m, c));
                        break;
                    }
                    Err(Error::Singular | Error::SubsetDoesNotStraddleShift(_)) => {
                        consecutive += 1;
                        restarts += 1;
                        if consecutive >= restart_cap {
                            return Err(Error::DegenerateSeries { position: pos_key });
                        }
                    }
                    Err(e) => return Err(e),
                }
            }
        }

        fresh.sort_by(|a, b| a.1.objective.total_cmp(&b.1.objective).then(a.0.cmp(&b.0)));
        fresh.truncate(self.opts.nbest);
        let mut pool = Vec::with_capacity(2 * self.opts.nbest);
        for (_, c) in fresh {
            match self.concentrate(c) {
                Ok(c) => pool.push(c),
                Err(Error::Singular) => restarts += 1,
                Err(e) => return Err(e),
            }
        }

        if let Some(ts) = position {
            for w in warm_starts {
                let mut theta = w.theta.clone();
                theta.delta2 = ts;
                let start = match self.als.refit(&w.subset, &theta) {
                    Ok(f) => self.candidate(f.theta, w.subset.clone()),
                    Err(Error::Singular | Error::SubsetDoesNotStraddleShift(_)) => continue,
                    Err(e) => return Err(e),
                };
                match self.concentrate(start) {
                    Ok(c) => pool.push(c),
                    Err(Error::Singular | Error::SubsetDoesNotStraddleShift(_)) => {}
                    Err(e) => return Err(e),
                }
            }
        }
        if pool.is_empty() {
            return Err(Error::DegenerateSeries { position: pos_key });
        }

        // stable: fresh candidates precede warm ones on ties
        pool.sort_by(|a, b| a.objective.total_cmp(&b.objective));
        let pool_objectives = pool.iter().map(|c| c.objective).collect();
        let mut retained: Vec<CandidateFit> = Vec::with_capacity(self.opts.nbest);
        for c in pool {
            if retained.len() == self.opts.nbest {
                break;
            }
            if !retained.iter().any(|r| r.subset == c.subset) {
                retained.push(c);
            }
        }
        Ok(PositionSearch {
            retained,
            pool_objectives,
            singular_restarts: restarts,
        })
    }
}
