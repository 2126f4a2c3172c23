use serde::{Deserialize, Serialize};
use std::collections::VecDeque;

use super::ons::{OnsConfig, OnsState};
use super::platt::{platt_fit_batch, PlattParams};
use crate::distributions::ParityRecord;
use crate::error::{check_probability, Error, Result};

/// How the Platt parameters are kept current along a stream.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    /// Pass the raw probabilities through.
    None,
    /// Refit on every observation so far.
    #[serde(rename = "iw")]
    IncreasingWindow,
    /// Refit on the most recent `window` observations.
    #[serde(rename = "mw")]
    MovingWindow,
    /// Online Newton Step after every observation.
    Ops,
}

impl std::str::FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "none" => Ok(Self::None),
            "iw" => Ok(Self::IncreasingWindow),
            "mw" => Ok(Self::MovingWindow),
            "ops" => Ok(Self::Ops),
            other => Err(Error::validation(format!("unknown calibration method `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScheduleConfig {
    pub method: Method,
    /// Refit every this many observations (windowed methods).
    pub update_every: usize,
    /// Moving-window length.
    pub window: usize,
    pub ons: OnsConfig,
}

impl Default for ScheduleConfig {
    fn default() -> Self {
        Self {
            method: Method::Ops,
            update_every: 1,
            window: 100,
            ons: OnsConfig::default(),
        }
    }
}

impl ScheduleConfig {
    pub fn new(method: Method) -> Self {
        Self {
            method,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.update_every == 0 {
            return Err(Error::validation("update frequency must be at least 1"));
        }
        if self.window == 0 {
            return Err(Error::validation("window size must be at least 1"));
        }
        self.ons.validate()
    }
}

enum Engine {
    Fixed,
    Windowed {
        history: VecDeque<(f64, bool)>,
        cap: Option<usize>,
        params: PlattParams,
    },
    Online(OnsState),
}

/// Sequential recalibrator: predict with the current map, then observe the
/// outcome and update.
pub struct StreamCalibrator {
    config: ScheduleConfig,
    engine: Engine,
    seen: usize,
    refits: usize,
}

impl StreamCalibrator {
    pub fn new(config: ScheduleConfig) -> Result<Self> {
        config.validate()?;
        let windowed = |cap| Engine::Windowed {
            history: VecDeque::new(),
            cap,
            params: PlattParams::IDENTITY,
        };
        let engine = match config.method {
            Method::None => Engine::Fixed,
            Method::IncreasingWindow => windowed(None),
            Method::MovingWindow => windowed(Some(config.window)),
            Method::Ops => Engine::Online(OnsState::new(config.ons)?),
        };
        Ok(Self {
            config,
            engine,
            seen: 0,
            refits: 0,
        })
    }

    pub fn config(&self) -> &ScheduleConfig {
        &self.config
    }

    /// Parameters currently in force.
    pub fn params(&self) -> PlattParams {
        match &self.engine {
            Engine::Fixed => PlattParams::IDENTITY,
            Engine::Windowed { params, .. } => *params,
            Engine::Online(state) => state.params(),
        }
    }

    /// Number of batch refits performed so far.
    pub fn refits(&self) -> usize {
        self.refits
    }

    pub fn observed(&self) -> usize {
        self.seen
    }

    pub fn predict(&self, p: f64) -> f64 {
        match &self.engine {
            Engine::Fixed => p,
            _ => self.params().apply(p),
        }
    }

    pub fn observe(&mut self, p: f64, y: bool) -> Result<()> {
        check_probability(p)?;
        self.seen += 1;
        match &mut self.engine {
            Engine::Fixed => {}
            Engine::Online(state) => state.step(p, y)?,
            Engine::Windowed {
                history,
                cap,
                params,
            } => {
                history.push_back((p, y));
                if let Some(cap) = *cap {
                    while history.len() > cap {
                        history.pop_front();
                    }
                }
                if self.seen.is_multiple_of(self.config.update_every) {
                    *params = platt_fit_batch(history.make_contiguous())?;
                    self.refits += 1;
                }
            }
        }
        Ok(())
    }
}

/// Recalibrates a stream of `(p_raw, outcome)` pairs. Each output record
/// uses only the parameters available before its own outcome was seen.
/// Records are numbered from `t = 2`, the first step with a parity outcome.
pub fn run_stream<I>(config: &ScheduleConfig, stream: I) -> Result<Vec<ParityRecord>>
where
    I: IntoIterator<Item = (f64, bool)>,
{
    let mut cal = StreamCalibrator::new(*config)?;
    stream
        .into_iter()
        .enumerate()
        .map(|(i, (p, y))| {
            check_probability(p)?;
            let p_cal = cal.predict(p);
            cal.observe(p, y)?;
            Ok(ParityRecord {
                t: i + 2,
                p_raw: p,
                p_cal,
                outcome: y,
            })
        })
        .collect()
}
