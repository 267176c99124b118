#![allow(dead_code)]

use nlts::model::ModelSpec;
use nlts::LtsOptions;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

pub const ORACLE_LEN: usize = 12;
pub const ORACLE_H: usize = 9;
pub const ORACLE_SHIFT: usize = 7;

/// Linear model of the brute-force check: intercept, slope, one harmonic
/// and a shift fixed at `ORACLE_SHIFT`.
pub fn oracle_spec() -> ModelSpec {
    ModelSpec::new(1, 1, 0)
}

pub fn oracle_options(seed: u64) -> LtsOptions {
    LtsOptions {
        h: Some(ORACLE_H),
        positions: Some(vec![ORACLE_SHIFT]),
        seed,
        ..LtsOptions::default()
    }
}

/// Random instance: Gaussian noise around a random linear fit, with up to
/// two gross outliers.
pub fn oracle_instance(seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let a0 = rng.random_range(-50.0..50.0);
    let a1 = rng.random_range(-3.0..3.0);
    let b1 = rng.random_range(-10.0..10.0);
    let b2 = rng.random_range(-10.0..10.0);
    let d1 = rng.random_range(-30.0..30.0);
    let mut y: Vec<f64> = (1..=ORACLE_LEN)
        .map(|t| {
            let w = 2.0 * std::f64::consts::PI * t as f64 / 12.0;
            let e: f64 = rng.sample(StandardNormal);
            a0 + a1 * t as f64 + b1 * w.cos() + b2 * w.sin() + if t >= ORACLE_SHIFT { d1 } else { 0.0 } + e
        })
        .collect();
    for _ in 0..rng.random_range(0..=2) {
        let i = rng.random_range(0..ORACLE_LEN);
        let sign = if rng.random::<bool>() { 1.0 } else { -1.0 };
        y[i] += sign * rng.random_range(5.0..25.0);
    }
    y
}

fn oracle_row(t: usize) -> [f64; 5] {
    let w = 2.0 * std::f64::consts::PI * t as f64 / 12.0;
    [1.0, t as f64, w.cos(), w.sin(), if t >= ORACLE_SHIFT { 1.0 } else { 0.0 }]
}

/// Residual sum of squares of the LS fit on `rows` by modified Gram-Schmidt;
/// `None` when the columns are numerically dependent.
fn subset_ssr(y: &[f64], rows: &[usize]) -> Option<f64> {
    let n = rows.len();
    let mut cols: Vec<Vec<f64>> = (0..5).map(|j| rows.iter().map(|&t| oracle_row(t)[j]).collect()).collect();
    let mut r: Vec<f64> = rows.iter().map(|&t| y[t - 1]).collect();
    for j in 0..5 {
        let scale = cols[j].iter().map(|v| v * v).sum::<f64>().sqrt();
        for k in 0..j {
            let (done, rest) = cols.split_at_mut(j);
            let d: f64 = (0..n).map(|i| done[k][i] * rest[0][i]).sum();
            for i in 0..n {
                rest[0][i] -= d * done[k][i];
            }
        }
        let norm = cols[j].iter().map(|v| v * v).sum::<f64>().sqrt();
        if norm <= 1e-10 * scale.max(1.0) {
            return None;
        }
        cols[j].iter_mut().for_each(|v| *v /= norm);
        let d: f64 = (0..n).map(|i| cols[j][i] * r[i]).sum();
        for i in 0..n {
            r[i] -= d * cols[j][i];
        }
    }
    Some(r.iter().map(|v| v * v).sum())
}

/// Minimum LS residual sum of squares over every `ORACLE_H`-subset, with
/// the minimising subset.
pub fn exhaustive_minimum(y: &[f64]) -> (f64, Vec<usize>) {
    let mut best = (f64::INFINITY, Vec::new());
    for mask in 0u32..(1 << ORACLE_LEN) {
        if mask.count_ones() as usize != ORACLE_H {
            continue;
        }
        let rows: Vec<usize> = (1..=ORACLE_LEN).filter(|t| mask >> (t - 1) & 1 == 1).collect();
        if let Some(s) = subset_ssr(y, &rows) {
            if s < best.0 {
                best = (s, rows);
            }
        }
    }
    best
}
