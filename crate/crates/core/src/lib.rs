//! Robust fitting and monitoring of short seasonal time series.
//!
//! The model is a polynomial trend plus a harmonic seasonal component whose
//! amplitude varies polynomially in time, plus an optional level shift
//! `delta1 * I(t >= delta2)`. It is estimated by nonlinear least trimmed
//! squares: every candidate shift position is tried, each with many random
//! elemental starts refined by concentration steps, where the inner
//! nonlinear fits are solved by alternating least squares.
//!
//! ```no_run
//! use nlts::{nlts, LtsOptions, ModelSpec};
//! use nlts::testkit::airline;
//!
//! let y = airline();
//! let spec = ModelSpec::new(2, 4, 2);
//! let fit = nlts(y.values(), &spec, &LtsOptions::default()).unwrap();
//! println!("shift at t={} height {:.2}", fit.theta.delta2, fit.theta.delta1);
//! ```

pub mod als;
pub mod error;
pub mod io;
pub mod linalg;
pub mod lts;
pub mod model;
pub mod monitor;
pub mod testkit;
pub mod wedge;

pub use als::{als_fit, relative_change, AlsOptions, AlsResult};
pub use error::{Error, Result};
pub use lts::{nlts, CandidateFit, FitResult, LtsOptions, OutlierRule};
pub use model::{param_count, predict, residuals, seasonal, Basis, ModelSpec, Theta, TimeSeries};
pub use monitor::{batch_run, detect_shifts, SeriesReport, ShiftReport};
pub use wedge::{build_wedge, WedgeMatrix};
