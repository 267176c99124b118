//! Trend + varying-amplitude seasonal + level shift model.
//!
//! ```text
//! f(theta, t) = sum_a alpha_a t^a
//!             + S_t * (1 + sum_g gamma_g t^g)
//!             + delta1 * I(t >= delta2)
//! S_t = sum_b beta_b1 cos(2 pi b t / period) + beta_b2 sin(2 pi b t / period)
//! ```
//!
//! Time is 1-based throughout (`t = 1..=T`).

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::Matrix;

/// Structural choices of the model.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ModelSpec {
    /// Trend polynomial degree (A).
    pub trend_degree: usize,
    /// Number of harmonics (B).
    pub harmonics: usize,
    /// Amplitude polynomial degree (G).
    pub amplitude_degree: usize,
    /// Seasonal period in samples.
    pub period: usize,
    /// Whether the level-shift term is present.
    pub shift: bool,
    /// Solve in a rescaled time basis (trend powers of `t` mapped to
    /// `[-1, 1]`, amplitude powers of `t / T`). Reported coefficients are
    /// always in raw `t`.
    pub center_time: bool,
}

impl ModelSpec {
    pub fn new(trend_degree: usize, harmonics: usize, amplitude_degree: usize) -> Self {
        Self {
            trend_degree,
            harmonics,
            amplitude_degree,
            period: 12,
            shift: true,
            center_time: false,
        }
    }

    pub fn with_period(mut self, period: usize) -> Self {
        self.period = period;
        self
    }

    pub fn with_shift(mut self, shift: bool) -> Self {
        self.shift = shift;
        self
    }

    pub fn with_centered_time(mut self, center: bool) -> Self {
        self.center_time = center;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.harmonics == 0 && self.amplitude_degree > 0 {
            return Err(Error::InvalidSpec(
                "amplitude degree must be 0 without harmonics".into(),
            ));
        }
        if self.period < 2 {
            return Err(Error::InvalidSpec(format!(
                "period must be at least 2, got {}",
                self.period
            )));
        }
        Ok(())
    }

    /// Length of the full parameter vector, `delta2` included.
    pub fn param_count(&self) -> usize {
        self.coef_count() + usize::from(self.shift)
    }

    /// Number of real-valued coefficients (everything except `delta2`).
    pub fn coef_count(&self) -> usize {
        self.trend_degree + 1 + 2 * self.harmonics + self.amplitude_degree + usize::from(self.shift)
    }

    /// Offset of `beta[b][j]` in the flattened coefficient vector.
    pub(crate) fn beta_offset(&self) -> usize {
        self.trend_degree + 1
    }

    pub(crate) fn gamma_offset(&self) -> usize {
        self.beta_offset() + 2 * self.harmonics
    }

    pub(crate) fn delta1_offset(&self) -> usize {
        self.gamma_offset() + self.amplitude_degree
    }

    /// Coefficient names in reporting order: alphas, beta pairs, gammas, delta1.
    pub fn coefficient_names(&self) -> Vec<String> {
        let mut names = Vec::with_capacity(self.coef_count());
        names.extend((0..=self.trend_degree).map(|a| format!("alpha_{a}")));
        for b in 1..=self.harmonics {
            names.push(format!("beta_{b}_1"));
            names.push(format!("beta_{b}_2"));
        }
        names.extend((1..=self.amplitude_degree).map(|g| format!("gamma_{g}")));
        if self.shift {
            names.push("delta_1".to_string());
        }
        names
    }
}

pub fn param_count(spec: &ModelSpec) -> usize {
    spec.param_count()
}

/// Full coefficient vector.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Theta {
    /// Trend coefficients `alpha_0..alpha_A`.
    pub alpha: Vec<f64>,
    /// Harmonic pairs `(beta_b1, beta_b2)` for `b = 1..B`.
    pub beta: Vec<[f64; 2]>,
    /// Amplitude coefficients `gamma_1..gamma_G`.
    pub gamma: Vec<f64>,
    /// Shift height; zero when the spec has no shift.
    pub delta1: f64,
    /// Shift position in `2..=T`; unused when the spec has no shift.
    pub delta2: usize,
}

impl Theta {
    pub fn zeros(spec: &ModelSpec) -> Self {
        Self {
            alpha: vec![0.0; spec.trend_degree + 1],
            beta: vec![[0.0; 2]; spec.harmonics],
            gamma: vec![0.0; spec.amplitude_degree],
            delta1: 0.0,
            delta2: 0,
        }
    }

    pub fn is_consistent(&self, spec: &ModelSpec) -> bool {
        self.alpha.len() == spec.trend_degree + 1
            && self.beta.len() == spec.harmonics
            && self.gamma.len() == spec.amplitude_degree
            && (spec.shift || self.delta1 == 0.0)
    }

    /// Real coefficients in reporting order, `delta1` last (always present so
    /// that vectors of one spec share a length).
    pub fn flatten(&self) -> Vec<f64> {
        let mut v = Vec::with_capacity(self.alpha.len() + 2 * self.beta.len() + self.gamma.len() + 1);
        v.extend_from_slice(&self.alpha);
        for pair in &self.beta {
            v.extend_from_slice(pair);
        }
        v.extend_from_slice(&self.gamma);
        v.push(self.delta1);
        v
    }

    /// Coefficients reported for `spec`: [`Theta::flatten`] without the
    /// trailing `delta1` when there is no shift term.
    pub fn coefficients(&self, spec: &ModelSpec) -> Vec<f64> {
        let mut v = self.flatten();
        if !spec.shift {
            v.pop();
        }
        v
    }

    pub fn from_coefficients(spec: &ModelSpec, coefs: &[f64], delta2: usize) -> Result<Self> {
        if coefs.len() != spec.coef_count() {
            return Err(Error::DimensionMismatch(format!(
                "expected {} coefficients, got {}",
                spec.coef_count(),
                coefs.len()
            )));
        }
        let mut th = Theta::zeros(spec);
        th.alpha.copy_from_slice(&coefs[..spec.beta_offset()]);
        for (b, pair) in th.beta.iter_mut().enumerate() {
            let o = spec.beta_offset() + 2 * b;
            *pair = [coefs[o], coefs[o + 1]];
        }
        th.gamma
            .copy_from_slice(&coefs[spec.gamma_offset()..spec.delta1_offset()]);
        if spec.shift {
            th.delta1 = coefs[spec.delta1_offset()];
            th.delta2 = delta2;
        }
        Ok(th)
    }
}

/// Observed series; values must be finite.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimeSeries {
    values: Vec<f64>,
    labels: Option<Vec<String>>,
}

impl TimeSeries {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidInput(format!(
                "non-finite value at t={}",
                i + 1
            )));
        }
        Ok(Self {
            values,
            labels: None,
        })
    }

    pub fn with_labels(values: Vec<f64>, labels: Vec<String>) -> Result<Self> {
        if labels.len() != values.len() {
            return Err(Error::DimensionMismatch(format!(
                "{} labels for {} values",
                labels.len(),
                values.len()
            )));
        }
        let mut s = Self::new(values)?;
        s.labels = Some(labels);
        Ok(s)
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn labels(&self) -> Option<&[String]> {
        self.labels.as_deref()
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }
}

/// `2 pi b t / period`, reduced modulo the period so the seasonal pattern
/// repeats exactly.
#[inline]
fn harmonic_angle(b: usize, t: usize, period: usize) -> f64 {
    2.0 * PI * ((b * t) % period) as f64 / period as f64
}

/// Seasonal component `S_t`.
pub fn seasonal(beta: &[[f64; 2]], spec: &ModelSpec, t: usize) -> Result<f64> {
    if spec.harmonics == 0 || beta.is_empty() {
        return Err(Error::NoSeasonalComponent);
    }
    Ok(beta
        .iter()
        .enumerate()
        .map(|(i, [c, s])| {
            let w = harmonic_angle(i + 1, t, spec.period);
            c * w.cos() + s * w.sin()
        })
        .sum())
}

/// `f(theta, t)`.
pub fn predict(theta: &Theta, spec: &ModelSpec, t: usize) -> f64 {
    let tf = t as f64;
    let trend: f64 = theta
        .alpha
        .iter()
        .rev()
        .fold(0.0, |acc, &a| acc * tf + a);
    let mut value = trend;
    if spec.harmonics > 0 {
        let s = seasonal(&theta.beta, spec, t).unwrap_or(0.0);
        value += s * amplitude(&theta.gamma, tf);
    }
    if spec.shift && t >= theta.delta2 {
        value += theta.delta1;
    }
    value
}

#[inline]
fn amplitude(gamma: &[f64], t: f64) -> f64 {
    1.0 + gamma.iter().rev().fold(0.0, |acc, &g| (acc + g) * t)
}

/// `y_t - f(theta, t)` for `t = 1..=y.len()`.
pub fn residuals(theta: &Theta, spec: &ModelSpec, y: &[f64]) -> Vec<f64> {
    y.iter()
        .enumerate()
        .map(|(i, &v)| v - predict(theta, spec, i + 1))
        .collect()
}

/// Linear system `X b ~ rhs` built for a subset of time points.
#[derive(Debug, Clone)]
pub struct LinearSystem {
    pub x: Matrix,
    pub rhs: Vec<f64>,
}

/// Regressors of a spec tabulated on `t = 1..=T`, plus the change of basis
/// used when `center_time` is set.
#[derive(Debug, Clone)]
pub struct Basis {
    spec: ModelSpec,
    len: usize,
    /// `t^a`, `a = 0..=max(A, G)`, row-major by power.
    raw_pow: Vec<f64>,
    /// Trend design columns, `(A+1) x T`.
    trend: Vec<f64>,
    /// Amplitude design powers, `G x T` (power `g = 1..=G`).
    amp: Vec<f64>,
    cos: Vec<f64>,
    sin: Vec<f64>,
    /// Maps design-basis trend coefficients to raw ones, row-major `(A+1)^2`.
    trend_to_raw: Vec<f64>,
    /// Raw gamma = design gamma * amp_scale.
    amp_scale: Vec<f64>,
}

impl Basis {
    pub fn new(spec: &ModelSpec, len: usize) -> Result<Self> {
        spec.validate()?;
        let na = spec.trend_degree + 1;
        let ng = spec.amplitude_degree;
        let maxpow = spec.trend_degree.max(ng);
        let mut raw_pow = vec![0.0; (maxpow + 1) * len];
        for t in 1..=len {
            let mut p = 1.0;
            for k in 0..=maxpow {
                raw_pow[k * len + t - 1] = p;
                p *= t as f64;
            }
        }

        let (center, half) = if spec.center_time && len > 1 {
            ((len as f64 + 1.0) / 2.0, (len as f64 - 1.0) / 2.0)
        } else {
            (0.0, 1.0)
        };
        let mut trend = vec![0.0; na * len];
        for t in 1..=len {
            let u = (t as f64 - center) / half;
            let mut p = 1.0;
            for a in 0..na {
                trend[a * len + t - 1] = p;
                p *= u;
            }
        }
        // u^a = sum_k C(a,k) t^k (-c)^(a-k) / s^a
        let mut trend_to_raw = vec![0.0; na * na];
        for a in 0..na {
            let mut binom = 1.0;
            for k in 0..=a {
                if k > 0 {
                    binom = binom * (a - k + 1) as f64 / k as f64;
                }
                trend_to_raw[k * na + a] =
                    binom * (-center).powi((a - k) as i32) / half.powi(a as i32);
            }
        }

        let tscale = if spec.center_time { len as f64 } else { 1.0 };
        let mut amp = vec![0.0; ng * len];
        for g in 0..ng {
            for t in 1..=len {
                amp[g * len + t - 1] = (t as f64 / tscale).powi(g as i32 + 1);
            }
        }
        let amp_scale = (1..=ng).map(|g| tscale.powi(-(g as i32))).collect();

        let nb = spec.harmonics;
        let mut cos = vec![0.0; nb * len];
        let mut sin = vec![0.0; nb * len];
        for b in 0..nb {
            for t in 1..=len {
                let w = harmonic_angle(b + 1, t, spec.period);
                cos[b * len + t - 1] = w.cos();
                sin[b * len + t - 1] = w.sin();
            }
        }

        Ok(Self {
            spec: *spec,
            len,
            raw_pow,
            trend,
            amp,
            cos,
            sin,
            trend_to_raw,
            amp_scale,
        })
    }

    pub fn spec(&self) -> &ModelSpec {
        &self.spec
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    #[inline]
    fn pow(&self, k: usize, t: usize) -> f64 {
        self.raw_pow[k * self.len + t - 1]
    }

    /// `S_t` at one time point.
    #[inline]
    pub fn seasonal_at(&self, beta: &[[f64; 2]], t: usize) -> f64 {
        beta.iter()
            .enumerate()
            .map(|(b, [c, s])| c * self.cos[b * self.len + t - 1] + s * self.sin[b * self.len + t - 1])
            .sum()
    }

    #[inline]
    pub fn trend_at(&self, alpha: &[f64], t: usize) -> f64 {
        alpha.iter().enumerate().map(|(a, c)| c * self.pow(a, t)).sum()
    }

    #[inline]
    pub fn amplitude_at(&self, gamma: &[f64], t: usize) -> f64 {
        1.0 + gamma
            .iter()
            .enumerate()
            .map(|(g, c)| c * self.pow(g + 1, t))
            .sum::<f64>()
    }

    #[inline]
    pub fn predict_at(&self, theta: &Theta, t: usize) -> f64 {
        let mut v = self.trend_at(&theta.alpha, t);
        if self.spec.harmonics > 0 {
            v += self.seasonal_at(&theta.beta, t) * self.amplitude_at(&theta.gamma, t);
        }
        if self.spec.shift && t >= theta.delta2 {
            v += theta.delta1;
        }
        v
    }

    /// Fitted values for `t = 1..=T`.
    pub fn fitted(&self, theta: &Theta) -> Vec<f64> {
        (1..=self.len).map(|t| self.predict_at(theta, t)).collect()
    }

    pub fn residuals(&self, theta: &Theta, y: &[f64]) -> Vec<f64> {
        y.iter()
            .enumerate()
            .map(|(i, v)| v - self.predict_at(theta, i + 1))
            .collect()
    }

    #[inline]
    fn shift_indicator(delta2: usize, t: usize) -> f64 {
        if t >= delta2 {
            1.0
        } else {
            0.0
        }
    }

    /// Appends the trend columns over `subset`.
    fn push_trend(&self, data: &mut Vec<f64>, subset: &[usize]) {
        for a in 0..self.spec.trend_degree + 1 {
            let col = &self.trend[a * self.len..(a + 1) * self.len];
            data.extend(subset.iter().map(|&t| col[t - 1]));
        }
    }

    /// Appends `cos_b(t) m_t, sin_b(t) m_t` pairs over `subset`.
    fn push_harmonics(&self, data: &mut Vec<f64>, subset: &[usize], m: Option<&[f64]>) {
        for b in 0..self.spec.harmonics {
            for table in [&self.cos, &self.sin] {
                let col = &table[b * self.len..(b + 1) * self.len];
                match m {
                    Some(m) => data.extend(subset.iter().zip(m).map(|(&t, m)| col[t - 1] * m)),
                    None => data.extend(subset.iter().map(|&t| col[t - 1])),
                }
            }
        }
    }

    /// Appends `s_t t^g` for `g = 1..=G` over `subset`.
    fn push_amplitude(&self, data: &mut Vec<f64>, subset: &[usize], seasonal: &[f64]) {
        for g in 0..self.spec.amplitude_degree {
            let col = &self.amp[g * self.len..(g + 1) * self.len];
            data.extend(subset.iter().map(|&t| seasonal[t - 1] * col[t - 1]));
        }
    }

    fn push_shift(&self, data: &mut Vec<f64>, subset: &[usize], delta2: usize) {
        if self.spec.shift {
            data.extend(subset.iter().map(|&t| Self::shift_indicator(delta2, t)));
        }
    }

    fn system(&self, rows: usize, data: Vec<f64>, rhs: Vec<f64>) -> LinearSystem {
        let cols = data.len() / rows.max(1);
        let x = Matrix::from_col_major(rows, cols, data).expect("design dimensions");
        LinearSystem { x, rhs }
    }

    /// Linear system with `gamma = 0`. Columns: trend powers, cos/sin pairs,
    /// shift indicator (when the spec has a shift).
    pub fn design_init(&self, y: &[f64], delta2: usize, subset: &[usize]) -> LinearSystem {
        let mut data = Vec::with_capacity(subset.len() * self.spec.coef_count());
        self.push_trend(&mut data, subset);
        self.push_harmonics(&mut data, subset, None);
        self.push_shift(&mut data, subset, delta2);
        let rhs = subset.iter().map(|&t| y[t - 1]).collect();
        self.system(subset.len(), data, rhs)
    }

    /// Linear system with the seasonal pattern held at `seasonal_prev`
    /// (length `T`). Response `y_t - S_t`; columns: trend powers,
    /// `S_t t^g` for `g = 1..=G`, shift indicator.
    pub fn design_step_a(
        &self,
        y: &[f64],
        seasonal_prev: &[f64],
        delta2: usize,
        subset: &[usize],
    ) -> LinearSystem {
        let mut data = Vec::with_capacity(subset.len() * self.spec.coef_count());
        self.push_trend(&mut data, subset);
        self.push_amplitude(&mut data, subset, seasonal_prev);
        self.push_shift(&mut data, subset, delta2);
        let rhs = subset.iter().map(|&t| y[t - 1] - seasonal_prev[t - 1]).collect();
        self.system(subset.len(), data, rhs)
    }

    /// Linear system in the harmonic coefficients with trend, amplitude and
    /// shift held fixed. Response `y_t - trend_t - delta1 I(t >= delta2)`;
    /// columns `cos_b(t) m_t, sin_b(t) m_t` with `m_t = 1 + sum gamma_g t^g`.
    pub fn design_step_b(
        &self,
        y: &[f64],
        alpha: &[f64],
        gamma: &[f64],
        delta1: f64,
        delta2: usize,
        subset: &[usize],
    ) -> LinearSystem {
        let m: Vec<f64> = subset.iter().map(|&t| self.amplitude_at(gamma, t)).collect();
        let mut data = Vec::with_capacity(subset.len() * 2 * self.spec.harmonics);
        self.push_harmonics(&mut data, subset, Some(&m));
        let rhs = subset
            .iter()
            .map(|&t| {
                let mut r = y[t - 1] - self.trend_at(alpha, t);
                if self.spec.shift {
                    r -= delta1 * Self::shift_indicator(delta2, t);
                }
                r
            })
            .collect();
        self.system(subset.len(), data, rhs)
    }

    /// As [`Basis::design_step_a`] but with the seasonal pattern's scale
    /// free: response `y_t`; columns: trend powers, `S_t`, `S_t t^g`, shift
    /// indicator.
    pub fn design_step_a_scaled(
        &self,
        y: &[f64],
        seasonal_prev: &[f64],
        delta2: usize,
        subset: &[usize],
    ) -> LinearSystem {
        let mut data = Vec::with_capacity(subset.len() * self.spec.coef_count());
        self.push_trend(&mut data, subset);
        data.extend(subset.iter().map(|&t| seasonal_prev[t - 1]));
        self.push_amplitude(&mut data, subset, seasonal_prev);
        self.push_shift(&mut data, subset, delta2);
        let rhs = subset.iter().map(|&t| y[t - 1]).collect();
        self.system(subset.len(), data, rhs)
    }

    /// Linear system in `(alpha, beta, delta1)` with the amplitude fixed at
    /// `gamma`. Response `y_t`; columns: trend powers, `cos_b(t) m_t`,
    /// `sin_b(t) m_t`, shift indicator.
    pub fn design_given_amplitude(&self, y: &[f64], gamma: &[f64], delta2: usize, subset: &[usize]) -> LinearSystem {
        let m: Vec<f64> = subset.iter().map(|&t| self.amplitude_at(gamma, t)).collect();
        let mut data = Vec::with_capacity(subset.len() * self.spec.coef_count());
        self.push_trend(&mut data, subset);
        self.push_harmonics(&mut data, subset, Some(&m));
        self.push_shift(&mut data, subset, delta2);
        let rhs = subset.iter().map(|&t| y[t - 1]).collect();
        self.system(subset.len(), data, rhs)
    }

    /// Jacobian of the fitted values at `theta` over `subset`, in
    /// [`Theta::flatten`] order (without `delta1` when the spec has no
    /// shift), with the current residuals as response.
    pub fn design_jacobian(&self, y: &[f64], theta: &Theta, subset: &[usize]) -> LinearSystem {
        let spec = &self.spec;
        let na = spec.trend_degree + 1;
        let nb = spec.harmonics;
        let ng = spec.amplitude_degree;
        let cols = spec.coef_count();
        let mut x = Matrix::zeros(subset.len(), cols);
        let mut rhs = Vec::with_capacity(subset.len());
        for (i, &t) in subset.iter().enumerate() {
            let m = self.amplitude_at(&theta.gamma, t);
            let s = self.seasonal_at(&theta.beta, t);
            for a in 0..na {
                x.set(i, a, self.pow(a, t));
            }
            for b in 0..nb {
                x.set(i, na + 2 * b, self.cos[b * self.len + t - 1] * m);
                x.set(i, na + 2 * b + 1, self.sin[b * self.len + t - 1] * m);
            }
            for g in 0..ng {
                x.set(i, na + 2 * nb + g, s * self.pow(g + 1, t));
            }
            if spec.shift {
                x.set(i, cols - 1, Self::shift_indicator(theta.delta2, t));
            }
            rhs.push(y[t - 1] - self.predict_at(theta, t));
        }
        LinearSystem { x, rhs }
    }

    /// Design-basis trend coefficients to raw `t` powers.
    pub fn trend_to_raw(&self, coefs: &[f64]) -> Vec<f64> {
        let na = coefs.len();
        (0..na)
            .map(|k| (0..na).map(|a| self.trend_to_raw[k * na + a] * coefs[a]).sum())
            .collect()
    }

    pub(crate) fn trend_to_raw_matrix(&self) -> &[f64] {
        &self.trend_to_raw
    }

    pub fn amplitude_to_raw(&self, coefs: &[f64]) -> Vec<f64> {
        coefs.iter().zip(&self.amp_scale).map(|(c, s)| c * s).collect()
    }

    pub(crate) fn amp_scale(&self) -> &[f64] {
        &self.amp_scale
    }
}
