//! Predictive distributions and the parity quantities derived from them.
//!
//! A forecaster hands us a predictive cdf `F̂_t` for the next value of a
//! series. The probability that the series does not go up is then simply
//! `F̂_t(y_{t-1})`, and the realized binary event is `1{y_t <= y_{t-1}}`.

use crate::error::{check_probability, Error, Result};
use crate::normal;

/// Endpoint quantiles of unbounded distributions are clamped this many
/// standard deviations away from the location.
pub const QUANTILE_CLAMP_SIGMAS: f64 = 8.0;

/// Relative floor applied to segment scales when two quantile values coincide.
pub const SEGMENT_SIGMA_FLOOR: f64 = 1e-9;

/// A predictive distribution for one timestep.
#[derive(Debug, Clone, PartialEq)]
pub enum ForecastDistribution {
    Gaussian { mu: f64, sigma: f64 },
    QuantileSet(QuantileSet),
    TruncatedMixture(TruncatedMixture),
    /// A binary classifier's probability for the parity event itself.
    DirectProbability(f64),
}

impl ForecastDistribution {
    pub fn gaussian(mu: f64, sigma: f64) -> Result<Self> {
        if !mu.is_finite() {
            return Err(Error::validation(format!("gaussian mean {mu} is not finite")));
        }
        if !(sigma.is_finite() && sigma > 0.0) {
            return Err(Error::validation(format!(
                "gaussian sigma must be positive and finite, got {sigma}"
            )));
        }
        Ok(Self::Gaussian { mu, sigma })
    }

    pub fn quantiles(levels: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        QuantileSet::new(levels, values).map(Self::QuantileSet)
    }

    pub fn mixture(weights: Vec<f64>, components: Vec<TruncatedNormal>) -> Result<Self> {
        TruncatedMixture::new(weights, components).map(Self::TruncatedMixture)
    }

    pub fn direct(p: f64) -> Result<Self> {
        check_probability(p).map(Self::DirectProbability)
    }

    /// `F̂(y)`.
    pub fn cdf(&self, y: f64) -> Result<f64> {
        match self {
            Self::Gaussian { mu, sigma } => Ok(normal::cdf((y - mu) / sigma)),
            Self::QuantileSet(q) => Ok(q.cdf(y)),
            Self::TruncatedMixture(m) => Ok(m.cdf(y)),
            Self::DirectProbability(_) => Err(Error::UnsupportedVariant("cdf")),
        }
    }

    /// `F̂⁻¹(p)`, with the endpoints of unbounded supports clamped to
    /// `μ ± 8σ` of the relevant Gaussian piece.
    pub fn quantile(&self, p: f64) -> Result<f64> {
        if let Self::DirectProbability(_) = self {
            return Err(Error::UnsupportedVariant("quantile"));
        }
        check_probability(p)?;
        Ok(match self {
            Self::Gaussian { mu, sigma } => mu + sigma * clamped_normal_quantile(p),
            Self::QuantileSet(q) => q.quantile(p),
            Self::TruncatedMixture(m) => m.quantile(p),
            Self::DirectProbability(_) => unreachable!(),
        })
    }

    /// Implied probability that the next value is at most `y_prev`.
    pub fn parity_prob(&self, y_prev: f64) -> Result<f64> {
        match self {
            Self::DirectProbability(p) => Ok(*p),
            other => other.cdf(y_prev),
        }
    }
}

fn clamped_normal_quantile(p: f64) -> f64 {
    if p <= 0.0 {
        -QUANTILE_CLAMP_SIGMAS
    } else if p >= 1.0 {
        QUANTILE_CLAMP_SIGMAS
    } else {
        normal::quantile(p)
    }
}

/// A forecast given as quantile values at fixed levels, turned into a full
/// cdf by fitting one Gaussian between every adjacent pair of quantiles.
///
/// Between knots `x_k` and `x_{k+1}` the cdf is `Φ((y - μ_k) / σ_k)` with
///
/// ```text
/// σ_k = (x_{k+1} - x_k) / (Φ⁻¹(τ_{k+1}) - Φ⁻¹(τ_k))
/// μ_k = x_k - σ_k Φ⁻¹(τ_k)
/// ```
///
/// Below the first knot the first piece is extended, at or above the last
/// knot the last piece is.
#[derive(Debug, Clone, PartialEq)]
pub struct QuantileSet {
    levels: Vec<f64>,
    values: Vec<f64>,
    z: Vec<f64>,
    sigmas: Vec<f64>,
}

impl QuantileSet {
    pub fn new(levels: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if levels.len() != values.len() {
            return Err(Error::validation(format!(
                "{} quantile levels but {} values",
                levels.len(),
                values.len()
            )));
        }
        if levels.len() < 2 {
            return Err(Error::validation("a quantile set needs at least two levels"));
        }
        for (i, &tau) in levels.iter().enumerate() {
            if !(tau > 0.0 && tau < 1.0) {
                return Err(Error::validation(format!("quantile level {tau} is not in (0, 1)")));
            }
            if i > 0 && tau <= levels[i - 1] {
                return Err(Error::validation("quantile levels must be strictly increasing"));
            }
        }
        for (i, &x) in values.iter().enumerate() {
            if !x.is_finite() {
                return Err(Error::validation(format!("quantile value {x} is not finite")));
            }
            if i > 0 && x < values[i - 1] {
                return Err(Error::validation("quantile values must be non-decreasing"));
            }
        }

        let z: Vec<f64> = levels.iter().map(|&tau| normal::quantile(tau)).collect();
        let sigmas = values
            .windows(2)
            .zip(z.windows(2))
            .map(|(x, z)| {
                let raw = (x[1] - x[0]) / (z[1] - z[0]);
                raw.max(SEGMENT_SIGMA_FLOOR * x[0].abs().max(1.0))
            })
            .collect();

        Ok(Self {
            levels,
            values,
            z,
            sigmas,
        })
    }

    pub fn levels(&self) -> &[f64] {
        &self.levels
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// `(μ_k, σ_k)` of piece `k` (zero-based, `k < len - 1`).
    pub fn segment(&self, k: usize) -> (f64, f64) {
        let sigma = self.sigmas[k];
        (self.values[k] - sigma * self.z[k], sigma)
    }

    fn last_segment(&self) -> usize {
        self.sigmas.len() - 1
    }

    pub fn cdf(&self, y: f64) -> f64 {
        let n = self.values.len();
        // Number of knots at or below y; the piece is the last one starting there.
        let at_or_below = self.values.partition_point(|&x| x <= y);
        let k = at_or_below.saturating_sub(1).min(self.last_segment());
        // Anchor on a knot of the piece so the knots themselves map exactly to their levels.
        let anchor = if at_or_below == n { n - 1 } else { k };
        let z = self.z[anchor] + (y - self.values[anchor]) / self.sigmas[k];
        normal::cdf(z)
    }

    pub fn quantile(&self, p: f64) -> f64 {
        let k = self
            .levels
            .partition_point(|&tau| tau <= p)
            .saturating_sub(1)
            .min(self.last_segment());
        let z = clamped_normal_quantile(p);
        if p >= self.levels[k + 1] {
            // only reachable on the extrapolated upper tail
            let n = self.values.len();
            return self.values[n - 1] + self.sigmas[k] * (z - self.z[n - 1]);
        }
        self.values[k] + self.sigmas[k] * (z - self.z[k])
    }
}

/// Parity probability of a quantile forecast via piecewise-Gaussian
/// interpolation. Validates the quantile set on every call; build a
/// [`QuantileSet`] once when evaluating the same forecast repeatedly.
pub fn piecewise_gaussian_parity(levels: &[f64], values: &[f64], y_prev: f64) -> Result<f64> {
    QuantileSet::new(levels.to_vec(), values.to_vec()).map(|q| q.cdf(y_prev))
}

/// A normal distribution restricted to `[lower, upper)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TruncatedNormal {
    pub mu: f64,
    pub sigma: f64,
    pub lower: f64,
    pub upper: f64,
}

impl TruncatedNormal {
    pub fn new(mu: f64, sigma: f64, lower: f64, upper: f64) -> Result<Self> {
        let t = Self {
            mu,
            sigma,
            lower,
            upper,
        };
        t.validate()?;
        Ok(t)
    }

    fn validate(&self) -> Result<()> {
        if !(self.mu.is_finite() && self.sigma.is_finite() && self.sigma > 0.0) {
            return Err(Error::validation(format!(
                "truncated normal needs finite mu and positive sigma, got ({}, {})",
                self.mu, self.sigma
            )));
        }
        if self.lower.is_nan() || self.upper.is_nan() || self.lower >= self.upper {
            return Err(Error::validation(format!(
                "truncation bounds [{}, {}) are empty",
                self.lower, self.upper
            )));
        }
        if self.mass() <= 0.0 {
            return Err(Error::validation("truncation interval carries no probability mass"));
        }
        Ok(())
    }

    fn z(&self, y: f64) -> f64 {
        (y - self.mu) / self.sigma
    }

    fn lower_cdf(&self) -> f64 {
        normal::cdf(self.z(self.lower))
    }

    fn mass(&self) -> f64 {
        normal::cdf(self.z(self.upper)) - self.lower_cdf()
    }

    pub fn cdf(&self, y: f64) -> f64 {
        if y < self.lower {
            0.0
        } else if y >= self.upper {
            1.0
        } else {
            ((normal::cdf(self.z(y)) - self.lower_cdf()) / self.mass()).clamp(0.0, 1.0)
        }
    }

    pub fn pdf(&self, y: f64) -> f64 {
        if y < self.lower || y >= self.upper {
            0.0
        } else {
            normal::pdf(self.z(y)) / (self.sigma * self.mass())
        }
    }

    /// Inverse cdf; used for sampling, so `u` is expected in `(0, 1)`.
    pub fn quantile(&self, u: f64) -> f64 {
        let x = self.mu + self.sigma * normal::quantile(self.lower_cdf() + u * self.mass());
        x.clamp(self.support_min(), self.support_max())
    }

    fn support_min(&self) -> f64 {
        if self.lower.is_finite() {
            self.lower
        } else {
            self.mu - QUANTILE_CLAMP_SIGMAS * self.sigma
        }
    }

    fn support_max(&self) -> f64 {
        if self.upper.is_finite() {
            self.upper
        } else {
            self.mu + QUANTILE_CLAMP_SIGMAS * self.sigma
        }
    }
}

/// A finite mixture of truncated normals.
#[derive(Debug, Clone, PartialEq)]
pub struct TruncatedMixture {
    weights: Vec<f64>,
    components: Vec<TruncatedNormal>,
}

impl TruncatedMixture {
    pub fn new(weights: Vec<f64>, components: Vec<TruncatedNormal>) -> Result<Self> {
        if weights.is_empty() || weights.len() != components.len() {
            return Err(Error::validation(format!(
                "mixture needs one weight per component, got {} weights and {} components",
                weights.len(),
                components.len()
            )));
        }
        if weights.iter().any(|w| !(w.is_finite() && *w >= 0.0)) {
            return Err(Error::validation("mixture weights must be non-negative"));
        }
        let total: f64 = weights.iter().sum();
        if (total - 1.0).abs() > 1e-12 {
            return Err(Error::validation(format!("mixture weights sum to {total}, not 1")));
        }
        for c in &components {
            c.validate()?;
        }
        Ok(Self {
            weights,
            components,
        })
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn components(&self) -> &[TruncatedNormal] {
        &self.components
    }

    fn active(&self) -> impl Iterator<Item = (f64, &TruncatedNormal)> {
        self.weights
            .iter()
            .copied()
            .zip(&self.components)
            .filter(|(w, _)| *w > 0.0)
    }

    pub fn cdf(&self, y: f64) -> f64 {
        self.active()
            .map(|(w, c)| w * c.cdf(y))
            .sum::<f64>()
            .clamp(0.0, 1.0)
    }

    pub fn pdf(&self, y: f64) -> f64 {
        self.active().map(|(w, c)| w * c.pdf(y)).sum()
    }

    fn support(&self) -> (f64, f64) {
        self.active().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), (_, c)| {
            (lo.min(c.support_min()), hi.max(c.support_max()))
        })
    }

    /// Smallest `y` in the (clamped) support with `cdf(y) >= p`.
    pub fn quantile(&self, p: f64) -> f64 {
        let (mut lo, mut hi) = self.support();
        if p <= 0.0 || self.cdf(lo) >= p {
            return lo;
        }
        if p >= 1.0 || self.cdf(hi) < p {
            return hi;
        }
        // invariant: cdf(lo) < p <= cdf(hi)
        let mut x = 0.5 * (lo + hi);
        let mut last_step = hi - lo;
        for _ in 0..200 {
            let f = self.cdf(x) - p;
            if f >= 0.0 {
                hi = x;
            } else {
                lo = x;
            }
            if f == 0.0 {
                break;
            }
            let d = self.pdf(x);
            let mut next = if d > 0.0 { x - f / d } else { f64::NAN };
            // fall back to bisection when Newton leaves the bracket or stalls
            if !(next > lo && next < hi) || next == x || 2.0 * (next - x).abs() > last_step {
                next = 0.5 * (lo + hi);
            }
            last_step = (next - x).abs();
            if next <= lo || next >= hi {
                break;
            }
            x = next;
        }
        hi
    }
}

/// One timestep of the parity problem.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ParityRecord {
    /// 1-based time index of the outcome; the first parity record has `t = 2`.
    pub t: usize,
    /// Probability implied by the forecaster before any recalibration.
    pub p_raw: f64,
    /// Probability after recalibration.
    pub p_cal: f64,
    /// `y_t <= y_{t-1}`.
    pub outcome: bool,
}

/// Which probability column of a record to score.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ProbabilitySource {
    Raw,
    #[default]
    Calibrated,
}

impl ParityRecord {
    pub fn probability(&self, source: ProbabilitySource) -> f64 {
        match source {
            ProbabilitySource::Raw => self.p_raw,
            ProbabilitySource::Calibrated => self.p_cal,
        }
    }
}

/// `1{y_t <= y_prev}`: ties count as a decrease.
pub fn parity_outcome(y_t: f64, y_prev: f64) -> bool {
    y_t <= y_prev
}

/// Builds uncalibrated parity records (`p_cal = p_raw`) from a forecast
/// sequence and the realized series. `forecasts[i]` targets `outcomes[i]`.
pub fn implied_records(
    forecasts: &[ForecastDistribution],
    outcomes: &[f64],
) -> Result<Vec<ParityRecord>> {
    if forecasts.len() != outcomes.len() {
        return Err(Error::validation(format!(
            "{} forecasts but {} outcomes",
            forecasts.len(),
            outcomes.len()
        )));
    }
    (1..outcomes.len())
        .map(|i| {
            let p = forecasts[i].parity_prob(outcomes[i - 1])?;
            Ok(ParityRecord {
                t: i + 1,
                p_raw: p,
                p_cal: p,
                outcome: parity_outcome(outcomes[i], outcomes[i - 1]),
            })
        })
        .collect()
}
