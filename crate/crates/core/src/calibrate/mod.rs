//! Platt-scaling recalibration of parity probabilities.
//!
//! Three ways of keeping the map `p ↦ sigmoid(a·logit(p) + b)` up to date on
//! a stream: refit on everything seen so far (increasing window), refit on
//! the most recent points (moving window), or take one Online Newton Step
//! after every observation.

mod ons;
mod platt;
mod schedule;

pub use ons::{project_in_metric, OnsConfig, OnsState, Sym2};
pub use platt::{
    logit_clamped, platt_fit_batch, platt_objective, sigmoid, stream_log_loss, PlattParams,
    LOGIT_EPS, PARAM_RADIUS, RIDGE,
};
pub use schedule::{run_stream, Method, ScheduleConfig, StreamCalibrator};
