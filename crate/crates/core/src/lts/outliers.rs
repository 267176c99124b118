//! Univariate outlier rules applied to scaled residuals.

use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum OutlierRule {
    /// `|r| > Phi^{-1}(1 - (1 - conf) / 2)`.
    #[default]
    FixedQuantile,
    /// Gervini-Yohai adaptive cutoff: compares the empirical distribution of
    /// `|r|` beyond the fixed cutoff with the half-normal and flags only the
    /// excess.
    Adaptive,
}

/// Two-sided standard normal quantile at `conf_level` (2.576 at 0.99).
pub fn outlier_cutoff(conf_level: f64) -> f64 {
    Normal::standard().inverse_cdf(1.0 - (1.0 - conf_level) / 2.0)
}

pub fn flag_outliers(scaled_res: &[f64], conf_level: f64) -> Vec<bool> {
    let c = outlier_cutoff(conf_level);
    scaled_res.iter().map(|r| r.abs() > c).collect()
}

pub fn flag_outliers_with(scaled_res: &[f64], conf_level: f64, rule: OutlierRule) -> Vec<bool> {
    match rule {
        OutlierRule::FixedQuantile => flag_outliers(scaled_res, conf_level),
        OutlierRule::Adaptive => flag_outliers_adaptive(scaled_res, conf_level),
    }
}

fn flag_outliers_adaptive(scaled_res: &[f64], conf_level: f64) -> Vec<bool> {
    let n = scaled_res.len();
    if n == 0 {
        return Vec::new();
    }
    let eta = outlier_cutoff(conf_level);
    let normal = Normal::standard();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| scaled_res[a].abs().total_cmp(&scaled_res[b].abs()).then(a.cmp(&b)));
    let nf = n as f64;
    let mut excess: f64 = 0.0;
    for (i, &k) in order.iter().enumerate() {
        let a = scaled_res[k].abs();
        if a < eta {
            continue;
        }
        let half_normal = 2.0 * normal.cdf(a) - 1.0;
        excess = excess.max(half_normal - i as f64 / nf);
    }
    let count = (nf * excess).floor() as usize;
    let mut flags = vec![false; n];
    for &k in order.iter().rev().take(count) {
        flags[k] = true;
    }
    flags
}
