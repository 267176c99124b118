//! Local refinement of the shift position with a Huber criterion.

/// Huber's rho: `x^2 / 2` for `|x| <= b`, else `b |x| - b^2 / 2`.
pub fn huber_rho(x: f64, b: f64) -> f64 {
    let a = x.abs();
    if a <= b {
        0.5 * x * x
    } else {
        b * a - 0.5 * b * b
    }
}

/// Window of `width` positions centred on `center`, clipped to `[lo, hi]`.
pub fn shift_window(center: usize, width: usize, lo: usize, hi: usize) -> (usize, usize) {
    let left = (width.saturating_sub(1)) / 2;
    let right = width.saturating_sub(1) - left;
    let start = center.saturating_sub(left).max(lo);
    let end = (center + right).min(hi);
    (start, end.max(start))
}

/// Refined position and the `(t*, f(t*))` profile over the window.
#[derive(Debug, Clone, PartialEq)]
pub struct Refinement {
    pub position: usize,
    pub profile: Vec<(usize, f64)>,
}

/// Scores each `t*` in the window by `sum_{t in W} rho(r_t / sigma)` where
/// `r_t` are the residuals with the shift moved to `t*`.
/// `base_residuals` are the residuals without the shift term.
/// Ties go to `current`, then to the smaller `t*`.
pub(crate) fn refine_from_residuals(
    base_residuals: &[f64],
    delta1: f64,
    current: usize,
    window: (usize, usize),
    sigma: f64,
    huber_b: f64,
) -> Refinement {
    let (lo, hi) = window;
    let profile: Vec<(usize, f64)> = (lo..=hi)
        .map(|cand| {
            let f = (lo..=hi)
                .map(|t| {
                    let shift = if t >= cand { delta1 } else { 0.0 };
                    huber_rho((base_residuals[t - 1] - shift) / sigma, huber_b)
                })
                .sum();
            (cand, f)
        })
        .collect();
    let best = profile.iter().map(|p| p.1).fold(f64::INFINITY, f64::min);
    let ties: Vec<usize> = profile.iter().filter(|p| p.1 == best).map(|p| p.0).collect();
    let position = if ties.contains(&current) {
        current
    } else {
        ties.first().copied().unwrap_or(current)
    };
    Refinement { position, profile }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn huber_examples() {
        assert_eq!(huber_rho(0.0, 2.0), 0.0);
        assert_eq!(huber_rho(2.0, 2.0), 2.0);
        assert_eq!(huber_rho(3.0, 2.0), 4.0);
        assert_eq!(huber_rho(-3.0, 2.0), 4.0);
    }

    #[test]
    fn window_clipping() {
        assert_eq!(shift_window(73, 15, 8, 137), (66, 80));
        assert_eq!(shift_window(10, 15, 8, 137), (8, 17));
        assert_eq!(shift_window(135, 15, 8, 137), (128, 137));
    }

    #[test]
    fn finds_true_position_on_exact_data() {
        // residuals without the shift term for a true shift of 5 at t = 20
        let base: Vec<f64> = (1..=40).map(|t| if t >= 20 { 5.0 } else { 0.0 }).collect();
        let r = refine_from_residuals(&base, 5.0, 24, shift_window(24, 15, 4, 37), 1.0, 2.0);
        assert_eq!(r.position, 20);
        assert_eq!(r.profile.iter().find(|p| p.0 == 20).unwrap().1, 0.0);
    }

    #[test]
    fn flat_profile_keeps_current() {
        let base = vec![0.3; 40];
        let r = refine_from_residuals(&base, 0.0, 24, shift_window(24, 15, 4, 37), 1.0, 2.0);
        assert_eq!(r.position, 24);
    }
}
