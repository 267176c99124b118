//! Reference data and generators: the Box-Jenkins airline series, its
//! contaminated variants, and simulated series drawn from the model.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::model::{predict, ModelSpec, Theta, TimeSeries};

/// Monthly international airline passengers (thousands), Jan 1949 - Dec 1960.
pub const AIRLINE: [f64; 144] = [
    112., 118., 132., 129., 121., 135., 148., 148., 136., 119., 104., 118., //
    115., 126., 141., 135., 125., 149., 170., 170., 158., 133., 114., 140., //
    145., 150., 178., 163., 172., 178., 199., 199., 184., 162., 146., 166., //
    171., 180., 193., 181., 183., 218., 230., 242., 209., 191., 172., 194., //
    196., 196., 236., 235., 229., 243., 264., 272., 237., 211., 180., 201., //
    204., 188., 235., 227., 234., 264., 302., 293., 259., 229., 203., 229., //
    242., 233., 267., 269., 270., 315., 364., 347., 312., 274., 237., 278., //
    284., 277., 317., 313., 318., 374., 413., 405., 355., 306., 271., 306., //
    315., 301., 356., 348., 355., 422., 465., 467., 404., 347., 305., 336., //
    340., 318., 362., 348., 363., 435., 491., 505., 404., 359., 310., 337., //
    360., 342., 406., 396., 420., 472., 548., 559., 463., 407., 362., 405., //
    417., 391., 419., 461., 472., 535., 622., 606., 508., 461., 390., 432., //
];

pub fn airline() -> TimeSeries {
    let labels = (0..144)
        .map(|i| format!("{}-{:02}", 1949 + i / 12, i % 12 + 1))
        .collect();
    TimeSeries::with_labels(AIRLINE.to_vec(), labels).expect("static data is finite")
}

/// Additive offset on the closed interval `[start, end]` (1-based).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Edit {
    pub start: usize,
    pub end: usize,
    pub offset: f64,
}

impl Edit {
    pub fn new(start: usize, end: usize, offset: f64) -> Self {
        Self { start, end, offset }
    }

    pub fn negated(self) -> Self {
        Self {
            offset: -self.offset,
            ..self
        }
    }
}

/// Applies the edits in order; overlapping edits stack.
pub fn contaminate(y: &TimeSeries, edits: &[Edit]) -> Result<TimeSeries> {
    let len = y.len();
    let mut values = y.values().to_vec();
    for e in edits {
        if e.start == 0 || e.start > e.end || e.end > len {
            return Err(Error::IntervalOutOfRange {
                start: e.start,
                end: e.end,
                len,
            });
        }
        for v in &mut values[e.start - 1..e.end] {
            *v += e.offset;
        }
    }
    match y.labels() {
        Some(l) => TimeSeries::with_labels(values, l.to_vec()),
        None => TimeSeries::new(values),
    }
}

/// Three stretches of outliers.
pub fn contamination_1() -> Vec<Edit> {
    vec![
        Edit::new(50, 55, -300.0),
        Edit::new(122, 127, 300.0),
        Edit::new(130, 134, -400.0),
    ]
}

/// Level shift of +1300 at t = 68 with isolated outliers at 45, 67, 68, 69.
pub fn contamination_2(len: usize) -> Vec<Edit> {
    vec![
        Edit::new(68, len, 1300.0),
        Edit::new(45, 45, -800.0),
        Edit::new(67, 67, -600.0),
        Edit::new(68, 69, 800.0),
    ]
}

/// Two level shifts, at t = 31 and t = 100.
pub fn two_shift_edits(len: usize) -> Vec<Edit> {
    vec![Edit::new(1, 30, -100.0), Edit::new(100, len, 200.0)]
}

/// Linear trend, three harmonics, linear amplitude, and a shift of 13000 at
/// t = 40; intended for T = 150.
pub fn a2_model() -> (ModelSpec, Theta) {
    let spec = ModelSpec::new(1, 3, 1);
    let theta = Theta {
        alpha: vec![1.0, 1.0],
        beta: vec![[20.0, -20.0], [12.0, -12.0], [4.0, -4.0]],
        gamma: vec![8.88],
        delta1: 13_000.0,
        delta2: 40,
    };
    (spec, theta)
}

/// Outlier stretch of -29000 on [131, 140].
pub fn a2_outlier_edits() -> Vec<Edit> {
    vec![Edit::new(131, 140, -29_000.0)]
}

/// Coefficients shaped like a 48-month trade series with a downward shift
/// at t = 27, for the (A=1, B=2, G=1) model.
pub fn trade_like_theta() -> Theta {
    Theta {
        alpha: vec![115.27, 1.59],
        beta: vec![[-2.83, -12.42], [-9.07, -22.60]],
        gamma: vec![-0.016],
        delta1: -112.62,
        delta2: 27,
    }
}

/// `y_t = f(theta, t) + eps_t` with i.i.d. Gaussian errors whose standard
/// deviation is `sd(f) / snr`, the signal sd taken over `t = 1..=len`.
/// An infinite `snr` gives the exact model values.
pub fn simulate_series(spec: &ModelSpec, theta: &Theta, len: usize, snr: f64, seed: u64) -> TimeSeries {
    let signal: Vec<f64> = (1..=len).map(|t| predict(theta, spec, t)).collect();
    if snr.is_infinite() {
        return TimeSeries::new(signal).expect("finite model values");
    }
    let n = len as f64;
    let mean = signal.iter().sum::<f64>() / n;
    let sd = (signal.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n).sqrt();
    let noise_sd = sd / snr;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let values = signal
        .into_iter()
        .map(|v| {
            let e: f64 = rng.sample(StandardNormal);
            v + noise_sd * e
        })
        .collect();
    TimeSeries::new(values).expect("finite simulated values")
}

/// I.i.d. standard normal series.
pub fn noise_series(len: usize, seed: u64) -> TimeSeries {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    TimeSeries::new((0..len).map(|_| rng.sample(StandardNormal)).collect())
        .expect("finite draws")
}
