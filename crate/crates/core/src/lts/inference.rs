//! Standard errors, t statistics and p-values from the final ALS solves.

use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, StudentsT};

use crate::als::BlockFit;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CoefficientInference {
    pub estimate: f64,
    pub se: f64,
    pub t: f64,
    /// Two-sided Student-t p-value.
    pub p: f64,
    /// Residual degrees of freedom of the sub-model that estimated it.
    pub df: usize,
}

/// Two-sided p-value of `t` under Student-t with `df` degrees of freedom.
/// `NaN` when `t` is `NaN` or `df` is zero.
pub fn two_sided_p(t: f64, df: usize) -> f64 {
    if t.is_nan() || df == 0 {
        return f64::NAN;
    }
    if t.is_infinite() {
        return 0.0;
    }
    let dist = StudentsT::new(0.0, 1.0, df as f64).expect("df > 0");
    (2.0 * dist.sf(t.abs())).clamp(0.0, 1.0)
}

/// Two-sided critical value `t_{df, 1 - (1 - conf)/2}`.
pub fn t_critical(conf_level: f64, df: usize) -> f64 {
    if df == 0 {
        return f64::INFINITY;
    }
    let dist = StudentsT::new(0.0, 1.0, df as f64).expect("df > 0");
    dist.inverse_cdf(1.0 - (1.0 - conf_level) / 2.0)
}

/// One entry per reported coefficient (`flat` is [`crate::Theta::flatten`]
/// truncated to the spec's coefficients), each taken from the block that
/// estimated it, with `df = rows - cols` of that block.
pub(crate) fn coefficient_inference(flat: &[f64], blocks: &[BlockFit]) -> Vec<CoefficientInference> {
    let mut out: Vec<CoefficientInference> = flat
        .iter()
        .map(|&estimate| CoefficientInference {
            estimate,
            se: f64::NAN,
            t: f64::NAN,
            p: f64::NAN,
            df: 0,
        })
        .collect();
    for b in blocks {
        let k = b.cols();
        let df = b.rows.saturating_sub(k);
        let s2 = if df > 0 { b.rss / df as f64 } else { f64::NAN };
        for (j, &idx) in b.coef_index.iter().enumerate() {
            let Some(c) = out.get_mut(idx) else { continue };
            let se = (s2 * b.cov_unscaled[j * k + j]).max(0.0).sqrt();
            let t = if se > 0.0 {
                c.estimate / se
            } else if se == 0.0 && c.estimate != 0.0 {
                c.estimate.signum() * f64::INFINITY
            } else {
                f64::NAN
            };
            *c = CoefficientInference {
                estimate: c.estimate,
                se,
                t,
                p: two_sided_p(t, df),
                df,
            };
        }
    }
    out
}
