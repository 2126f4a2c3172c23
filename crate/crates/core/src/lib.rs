//! Parity calibration for sequential distributional forecasts.
//!
//! A regression forecaster that emits a predictive cdf `F̂_t` for the next
//! value of a series implicitly predicts whether the series will go down:
//! `p̂_t = F̂_t(y_{t-1})`. Those probabilities are frequently miscalibrated
//! even when `F̂_t` itself is well calibrated. This crate extracts them,
//! recalibrates them online with Platt scaling, scores them, and turns them
//! into decisions.
//!
//! ```
//! use parity_cal::calibrate::{run_stream, Method, ScheduleConfig};
//! use parity_cal::metrics::{parity_reliability, pce};
//! use parity_cal::synthetic::{generate, prehoc_records};
//! use parity_cal::ProbabilitySource;
//!
//! let stream = generate(2_000, 1)?;
//! let prehoc = prehoc_records(&stream);
//! let calibrated = run_stream(
//!     &ScheduleConfig::new(Method::Ops),
//!     prehoc.iter().map(|r| (r.p_raw, r.outcome)),
//! )?;
//! let before = pce(&parity_reliability(&prehoc, 30, ProbabilitySource::Raw)?);
//! let after = pce(&parity_reliability(&calibrated, 30, ProbabilitySource::Calibrated)?);
//! assert!(after < before);
//! # Ok::<(), parity_cal::Error>(())
//! ```
//!
//! The guide under `book/` walks through each piece; its code blocks are
//! compiled and run as doctests of this crate.

pub mod calibrate;
pub mod cli;
pub mod decision;
pub mod distributions;
mod error;
pub mod io;
pub mod metrics;
pub mod normal;
pub mod svg;
pub mod synthetic;

pub use calibrate::{OnsConfig, OnsState, PlattParams, ScheduleConfig};
pub use decision::{Action, LossMatrix, PolicyResult};
pub use distributions::{
    parity_outcome, piecewise_gaussian_parity, ForecastDistribution, ParityRecord,
    ProbabilitySource,
};
pub use error::{Error, Result};
pub use metrics::{MetricsReport, ReliabilityDiagram};

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/parity.md")]
    mod parity {}
    #[doc = include_str!("../../../book/src/quantile-forecasts.md")]
    mod quantile_forecasts {}
    #[doc = include_str!("../../../book/src/platt-scaling.md")]
    mod platt_scaling {}
    #[doc = include_str!("../../../book/src/online-newton.md")]
    mod online_newton {}
    #[doc = include_str!("../../../book/src/metrics.md")]
    mod metrics {}
    #[doc = include_str!("../../../book/src/decisions.md")]
    mod decisions {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
    #[doc = include_str!("../../../README.md")]
    mod readme {}
}
