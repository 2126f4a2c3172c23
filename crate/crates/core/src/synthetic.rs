//! A stream that is quantile calibrated yet maximally parity miscalibrated.
//!
//! Outcomes alternate between the negative half-normal (odd `t`) and the
//! positive half-normal (even `t`). The forecaster always predicts the
//! even mixture of the two halves, which is exactly right marginally. But
//! every odd step goes down and every even step goes up, while the implied
//! parity probability sits above one half exactly on the odd steps.

use rand::distr::Open01;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::calibrate::{logit_clamped, sigmoid};
use crate::distributions::{
    implied_records, ForecastDistribution, ParityRecord, TruncatedNormal,
};
use crate::error::{Error, Result};

/// Standard normal restricted to `(-∞, 0)`.
pub fn negative_half_normal() -> TruncatedNormal {
    TruncatedNormal {
        mu: 0.0,
        sigma: 1.0,
        lower: f64::NEG_INFINITY,
        upper: 0.0,
    }
}

/// Standard normal restricted to `[0, ∞)`.
pub fn positive_half_normal() -> TruncatedNormal {
    TruncatedNormal {
        mu: 0.0,
        sigma: 1.0,
        lower: 0.0,
        upper: f64::INFINITY,
    }
}

/// `½ F₋ + ½ F₊`.
pub fn mixture_forecaster() -> ForecastDistribution {
    ForecastDistribution::mixture(
        vec![0.5, 0.5],
        vec![negative_half_normal(), positive_half_normal()],
    )
    .expect("half-normal mixture is valid")
}

#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticStream {
    pub horizon: usize,
    pub seed: u64,
    /// `outcomes[i]` is `Y_{i+1}`.
    pub outcomes: Vec<f64>,
    pub forecasts: Vec<ForecastDistribution>,
}

impl SyntheticStream {
    /// The same forecaster written as a plain Gaussian: the two half-normal
    /// halves with weight ½ each put back together are `N(0, 1)`. This is
    /// the form exported to forecast CSV files.
    pub fn gaussian_equivalent() -> ForecastDistribution {
        ForecastDistribution::Gaussian {
            mu: 0.0,
            sigma: 1.0,
        }
    }
}

pub fn generate(horizon: usize, seed: u64) -> Result<SyntheticStream> {
    if horizon < 2 {
        return Err(Error::validation(format!(
            "synthetic horizon must be at least 2, got {horizon}"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (neg, pos) = (negative_half_normal(), positive_half_normal());
    let outcomes = (1..=horizon)
        .map(|t| {
            let u: f64 = rng.sample(Open01);
            if t % 2 == 1 {
                neg.quantile(u).min(-f64::MIN_POSITIVE)
            } else {
                pos.quantile(u)
            }
        })
        .collect();
    Ok(SyntheticStream {
        horizon,
        seed,
        outcomes,
        forecasts: vec![mixture_forecaster(); horizon],
    })
}

/// Parity records of the uncalibrated forecaster, from `t = 2` on.
pub fn prehoc_records(stream: &SyntheticStream) -> Vec<ParityRecord> {
    implied_records(&stream.forecasts, &stream.outcomes)
        .expect("synthetic forecasts are cdf-valued and aligned with outcomes")
}

/// Draws one outcome from `dist` by inverting its cdf.
pub fn sample_outcome<R: Rng + ?Sized>(dist: &ForecastDistribution, rng: &mut R) -> Result<f64> {
    let u: f64 = rng.sample(Open01);
    dist.quantile(u)
}

/// A non-stationary `(p, y)` stream for exercising online recalibration.
///
/// Raw probabilities are uniform on `(0.01, 0.99)`; the outcome is drawn
/// from a Platt map of the raw probability whose parameters jump to a fresh
/// random value every `len / regimes` steps.
pub fn drifting_platt_stream(len: usize, regimes: usize, seed: u64) -> Vec<(f64, bool)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let span = (len / regimes.max(1)).max(1);
    let mut params = (1.0, 0.0);
    (0..len)
        .map(|i| {
            if i % span == 0 {
                params = (rng.random_range(0.3..3.0), rng.random_range(-1.5..1.5));
            }
            let p = rng.random_range(0.01..0.99);
            let q = sigmoid(params.0 * logit_clamped(p) + params.1);
            (p, rng.random::<f64>() < q)
        })
        .collect()
}
