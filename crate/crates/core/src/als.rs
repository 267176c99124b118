//! Alternating least squares for the model on a subset with the shift
//! position held fixed.
//!
//! Starting from the joint linear fit with `gamma = 0`, alternate
//! - step A: `(alpha, gamma, delta1)` given the current seasonal pattern,
//! - step B: `beta` given `(alpha, gamma, delta1)`,
//!
//! until the relative coefficient change drops below `tol`. Each step is an
//! exact linear LS solve in which the previous coefficients are feasible, so
//! the subset SSR never increases.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{ls_solve, ls_solve_full_rank, LsSolution};
use crate::model::{Basis, LinearSystem, ModelSpec, Theta};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AlsOptions {
    /// Threshold on `||theta_k - theta_{k-1}|| / ||theta_{k-1}||`.
    pub tol: f64,
    pub max_iter: usize,
    /// Before each sweep, refit with the seasonal scale free and fold the
    /// scale into `beta`. Plain alternation crawls along the near-flat
    /// direction `beta -> c beta, gamma -> gamma / c` when the amplitude
    /// terms dominate.
    pub rescale: bool,
    /// After each sweep, try a joint Gauss-Newton step and keep it only if
    /// it lowers the subset SSR.
    pub gauss_newton: bool,
}

impl Default for AlsOptions {
    fn default() -> Self {
        Self {
            tol: 1e-6,
            max_iter: 50,
            rescale: true,
            gauss_newton: true,
        }
    }
}

impl AlsOptions {
    pub fn validate(&self) -> Result<()> {
        if !(self.tol > 0.0) {
            return Err(Error::InvalidOptions(format!("ALS tol must be > 0, got {}", self.tol)));
        }
        if self.max_iter == 0 {
            return Err(Error::InvalidOptions("ALS max_iter must be >= 1".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AlsResult {
    pub theta: Theta,
    pub iterations: usize,
    pub converged: bool,
    /// Sum of squared residuals over the subset.
    pub subset_ssr: f64,
}

/// Last linear solve of one ALS block, in raw-`t` coordinates.
#[derive(Debug, Clone)]
pub struct BlockFit {
    /// Positions of this block's coefficients in [`Theta::flatten`] order.
    pub coef_index: Vec<usize>,
    /// `(X'X)^{-1}`, column-major `k x k`.
    pub cov_unscaled: Vec<f64>,
    pub rss: f64,
    pub rows: usize,
}

impl BlockFit {
    pub fn cols(&self) -> usize {
        self.coef_index.len()
    }
}

/// `||theta_k - theta_prev|| / ||theta_prev||` over every coefficient except
/// `delta2`. Infinite when `theta_prev` is all zeros.
pub fn relative_change(theta_k: &Theta, theta_prev: &Theta) -> f64 {
    relative_change_vec(&theta_k.flatten(), &theta_prev.flatten())
}

fn relative_change_vec(cur: &[f64], prev: &[f64]) -> f64 {
    let den = prev.iter().map(|v| v * v).sum::<f64>().sqrt();
    if den == 0.0 {
        return f64::INFINITY;
    }
    let num = cur
        .iter()
        .zip(prev)
        .map(|(a, b)| (a - b) * (a - b))
        .sum::<f64>()
        .sqrt();
    num / den
}

/// Fits the model to `y` restricted to `subset` (1-based times) with the
/// shift position fixed at `delta2`.
pub fn als_fit(
    y: &[f64],
    spec: &ModelSpec,
    subset: &[usize],
    delta2: usize,
    opts: &AlsOptions,
) -> Result<AlsResult> {
    let basis = Basis::new(spec, y.len())?;
    AlsSolver::new(&basis, y, *opts).fit(subset, delta2)
}

enum Block {
    Init,
    StepA,
    StepB,
}

/// ALS bound to one series and its tabulated regressors.
pub struct AlsSolver<'a> {
    basis: &'a Basis,
    y: &'a [f64],
    opts: AlsOptions,
}

impl<'a> AlsSolver<'a> {
    pub fn new(basis: &'a Basis, y: &'a [f64], opts: AlsOptions) -> Self {
        debug_assert_eq!(basis.len(), y.len());
        Self { basis, y, opts }
    }

    pub fn basis(&self) -> &Basis {
        self.basis
    }

    pub fn check_subset(&self, subset: &[usize], delta2: usize) -> Result<()> {
        let spec = self.basis.spec();
        let need = spec.coef_count();
        if subset.len() < need {
            return Err(Error::SubsetTooSmall {
                got: subset.len(),
                need,
            });
        }
        if let Some(&bad) = subset.iter().find(|&&t| t == 0 || t > self.y.len()) {
            return Err(Error::InvalidInput(format!(
                "time index {bad} outside 1..={}",
                self.y.len()
            )));
        }
        if spec.shift {
            let left = subset.iter().any(|&t| t < delta2);
            let right = subset.iter().any(|&t| t >= delta2);
            if !(left && right) {
                return Err(Error::SubsetDoesNotStraddleShift(delta2));
            }
        }
        Ok(())
    }

    /// Cold start from the `gamma = 0` linear fit.
    pub fn fit(&self, subset: &[usize], delta2: usize) -> Result<AlsResult> {
        self.run(subset, None, delta2, false).map(|(r, _)| r)
    }

    /// Warm start from `start` (its `delta2` is used). With no amplitude
    /// terms the model is linear and the joint LS solution is returned.
    pub fn refit(&self, subset: &[usize], start: &Theta) -> Result<AlsResult> {
        self.run(subset, Some(start), start.delta2, false)
            .map(|(r, _)| r)
    }

    /// As [`AlsSolver::refit`], also returning the last solve of each block.
    pub fn refit_with_inference(
        &self,
        subset: &[usize],
        start: &Theta,
    ) -> Result<(AlsResult, Vec<BlockFit>)> {
        self.run(subset, Some(start), start.delta2, true)
    }

    fn run(
        &self,
        subset: &[usize],
        start: Option<&Theta>,
        delta2: usize,
        track: bool,
    ) -> Result<(AlsResult, Vec<BlockFit>)> {
        self.check_subset(subset, delta2)?;
        let basis = self.basis;
        let spec = *basis.spec();
        let y = self.y;
        let na = spec.trend_degree + 1;
        let ng = spec.amplitude_degree;

        let cold = start.is_none() || ng == 0;
        let mut theta;
        if cold {
            let sys = basis.design_init(y, delta2, subset);
            let sol = solve(sys)?;
            theta = Theta::zeros(&spec);
            theta.alpha = basis.trend_to_raw(&sol.coeffs[..na]);
            for (b, pair) in theta.beta.iter_mut().enumerate() {
                *pair = [sol.coeffs[na + 2 * b], sol.coeffs[na + 2 * b + 1]];
            }
            if spec.shift {
                theta.delta1 = *sol.coeffs.last().unwrap();
                theta.delta2 = delta2;
            }
            if spec.harmonics == 0 {
                let blocks = if track {
                    vec![self.block_fit(Block::Init, &sol, subset.len())?]
                } else {
                    Vec::new()
                };
                let subset_ssr = self.subset_ssr(&theta, subset);
                return Ok((
                    AlsResult {
                        theta,
                        iterations: 0,
                        converged: true,
                        subset_ssr,
                    },
                    blocks,
                ));
            }
        } else {
            theta = start.unwrap().clone();
            theta.delta2 = delta2;
        }

        let mut seasonal = vec![0.0; y.len()];
        let mut last_a = None;
        let mut last_b = None;
        let mut iterations = 0;
        let mut converged = false;
        for k in 1..=self.opts.max_iter {
            let prev = theta.flatten();

            // Step A is the rescale problem with the scale pinned at the
            // value the rescale just chose, so it would return the same fit.
            let rescaled = self.opts.rescale && self.rescale_step(&mut theta, subset, &mut seasonal);
            if !rescaled || track {
                for &t in subset {
                    seasonal[t - 1] = basis.seasonal_at(&theta.beta, t);
                }
                let sys = basis.design_step_a(y, &seasonal, delta2, subset);
                let sol = solve(sys)?;
                theta.alpha = basis.trend_to_raw(&sol.coeffs[..na]);
                theta.gamma = basis.amplitude_to_raw(&sol.coeffs[na..na + ng]);
                if spec.shift {
                    theta.delta1 = sol.coeffs[na + ng];
                }
                if track {
                    last_a = Some(sol);
                }
            }

            let sys = basis.design_step_b(y, &theta.alpha, &theta.gamma, theta.delta1, delta2, subset);
            let sol = solve(sys)?;
            for (b, pair) in theta.beta.iter_mut().enumerate() {
                *pair = [sol.coeffs[2 * b], sol.coeffs[2 * b + 1]];
            }
            if track {
                last_b = Some(sol);
            }

            if self.opts.gauss_newton {
                self.gauss_newton_step(&mut theta, subset);
            }

            iterations = k;
            if relative_change_vec(&theta.flatten(), &prev) < self.opts.tol {
                converged = true;
                break;
            }
        }

        let mut blocks = Vec::new();
        if track {
            if let Some(sol) = last_a {
                blocks.push(self.block_fit(Block::StepA, &sol, subset.len())?);
            }
            if let Some(sol) = last_b {
                blocks.push(self.block_fit(Block::StepB, &sol, subset.len())?);
            }
        }
        let subset_ssr = self.subset_ssr(&theta, subset);
        Ok((
            AlsResult {
                theta,
                iterations,
                converged,
                subset_ssr,
            },
            blocks,
        ))
    }

    /// Joint Gauss-Newton step; if that does not lower the subset SSR, its
    /// `gamma` direction with step halving, the linear coefficients solved
    /// exactly for each trial `gamma`. Kept only if the SSR drops.
    fn gauss_newton_step(&self, theta: &mut Theta, subset: &[usize]) {
        let basis = self.basis;
        let spec = *basis.spec();
        let (na, nb, ng) = (spec.trend_degree + 1, spec.harmonics, spec.amplitude_degree);
        let mut sys = basis.design_jacobian(self.y, theta, subset);
        let current: f64 = sys.rhs.iter().map(|r| r * r).sum();
        if current == 0.0 {
            return;
        }
        let mut scale = vec![1.0; sys.x.cols()];
        for (j, sc) in scale.iter_mut().enumerate() {
            let col = sys.x.column_mut(j);
            let n = col.iter().map(|v| v * v).sum::<f64>().sqrt();
            if n > 0.0 {
                col.iter_mut().for_each(|v| *v /= n);
                *sc = n;
            }
        }
        let Ok(sol) = ls_solve(&sys.x, &sys.rhs) else {
            return;
        };
        let step: Vec<f64> = sol.coeffs.iter().zip(&scale).map(|(d, s)| d / s).collect();
        let base = theta.coefficients(&spec);
        let mut lam = 1.0;
        for _ in 0..4 {
            let full: Vec<f64> = base.iter().zip(&step).map(|(b, d)| b + lam * d).collect();
            let th = Theta::from_coefficients(&spec, &full, theta.delta2).expect("coefficient count");
            if self.subset_ssr(&th, subset) < current {
                *theta = th;
                return;
            }
            lam *= 0.5;
        }

        // Far from the optimum: move gamma only and re-solve the rest.
        let g0 = na + 2 * nb;
        let dgamma = &step[g0..g0 + ng];
        let size = theta.gamma.iter().map(|g| g * g).sum::<f64>().sqrt();
        let change = dgamma.iter().map(|d| d * d).sum::<f64>().sqrt();
        if change <= self.opts.tol * size {
            return;
        }
        let mut lambda = 1.0;
        for _ in 0..4 {
            let gamma: Vec<f64> = theta.gamma.iter().zip(dgamma).map(|(g, d)| g + lambda * d).collect();
            lambda *= 0.5;
            let lin = basis.design_given_amplitude(self.y, &gamma, theta.delta2, subset);
            let Ok(sol) = solve(lin) else {
                continue;
            };
            let mut th = theta.clone();
            th.alpha = basis.trend_to_raw(&sol.coeffs[..na]);
            for (b, pair) in th.beta.iter_mut().enumerate() {
                *pair = [sol.coeffs[na + 2 * b], sol.coeffs[na + 2 * b + 1]];
            }
            th.gamma = gamma;
            if spec.shift {
                th.delta1 = sol.coeffs[g0];
            }
            if self.subset_ssr(&th, subset) < current {
                *theta = th;
                return;
            }
        }
    }

    /// Step A with the seasonal scale freed: refits `(alpha, c, c gamma,
    /// delta1)` on `c S_t (1 + gamma(t))` and rescales `beta` by `c`.
    fn rescale_step(&self, theta: &mut Theta, subset: &[usize], seasonal: &mut [f64]) -> bool {
        let basis = self.basis;
        let spec = *basis.spec();
        let (na, ng) = (spec.trend_degree + 1, spec.amplitude_degree);
        for &t in subset {
            seasonal[t - 1] = basis.seasonal_at(&theta.beta, t);
        }
        let sys = basis.design_step_a_scaled(self.y, seasonal, theta.delta2, subset);
        let Ok(sol) = solve(sys) else {
            return false;
        };
        let c = sol.coeffs[na];
        if !(c.abs() > 1e-8) {
            return false;
        }
        theta.alpha = basis.trend_to_raw(&sol.coeffs[..na]);
        let g: Vec<f64> = sol.coeffs[na + 1..na + 1 + ng].iter().map(|v| v / c).collect();
        theta.gamma = basis.amplitude_to_raw(&g);
        for pair in theta.beta.iter_mut() {
            pair[0] *= c;
            pair[1] *= c;
        }
        if spec.shift {
            theta.delta1 = sol.coeffs[na + 1 + ng];
        }
        true
    }

    fn subset_ssr(&self, theta: &Theta, subset: &[usize]) -> f64 {
        subset
            .iter()
            .map(|&t| {
                let r = self.y[t - 1] - self.basis.predict_at(theta, t);
                r * r
            })
            .sum()
    }

    fn block_fit(&self, block: Block, sol: &LsSolution, rows: usize) -> Result<BlockFit> {
        let spec = self.basis.spec();
        let na = spec.trend_degree + 1;
        let cov = sol.xtx_inverse().ok_or(Error::Singular)?;
        let k = sol.coeffs.len();

        // Jacobian from design coordinates to raw ones (block diagonal).
        let mut jac = vec![0.0; k * k];
        let mut coef_index = Vec::with_capacity(k);
        let l = self.basis.trend_to_raw_matrix();
        match block {
            Block::Init | Block::StepA => {
                for r in 0..na {
                    for c in 0..na {
                        jac[r * k + c] = l[r * na + c];
                    }
                    coef_index.push(r);
                }
                let mut col = na;
                if matches!(block, Block::StepA) {
                    for (g, s) in self.basis.amp_scale().iter().enumerate() {
                        jac[col * k + col] = *s;
                        coef_index.push(spec.gamma_offset() + g);
                        col += 1;
                    }
                }
                if spec.shift {
                    jac[col * k + col] = 1.0;
                    coef_index.push(spec.delta1_offset());
                }
            }
            Block::StepB => {
                for c in 0..k {
                    jac[c * k + c] = 1.0;
                    coef_index.push(spec.beta_offset() + c);
                }
            }
        }

        // J C J^T; jac is row-major, cov column-major (symmetric).
        let mut raw = vec![0.0; k * k];
        for i in 0..k {
            for j in 0..k {
                let mut s = 0.0;
                for a in 0..k {
                    let jia = jac[i * k + a];
                    if jia == 0.0 {
                        continue;
                    }
                    for b in 0..k {
                        s += jia * cov[b * k + a] * jac[j * k + b];
                    }
                }
                raw[j * k + i] = s;
            }
        }
        Ok(BlockFit {
            coef_index,
            cov_unscaled: raw,
            rss: sol.rss,
            rows,
        })
    }
}

fn solve(sys: LinearSystem) -> Result<LsSolution> {
    ls_solve_full_rank(sys.x, sys.rhs)
}
