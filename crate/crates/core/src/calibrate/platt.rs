use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Probabilities are clamped to `[LOGIT_EPS, 1 - LOGIT_EPS]` before the logit.
pub const LOGIT_EPS: f64 = 1e-6;

/// Radius of the feasible parameter ball.
pub const PARAM_RADIUS: f64 = 100.0;

/// Ridge weight pulling batch fits toward the identity map.
pub const RIDGE: f64 = 1e-6;

const MAX_NEWTON_ITERS: usize = 100;
const GRAD_TOL: f64 = 1e-10;

/// Parameters of the map `p ↦ sigmoid(a·logit(p) + b)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PlattParams {
    pub a: f64,
    pub b: f64,
}

impl Default for PlattParams {
    fn default() -> Self {
        Self::IDENTITY
    }
}

impl PlattParams {
    pub const IDENTITY: Self = Self { a: 1.0, b: 0.0 };

    pub fn new(a: f64, b: f64) -> Self {
        Self { a, b }
    }

    pub fn apply(&self, p: f64) -> f64 {
        sigmoid(self.score(logit_clamped(p)))
    }

    /// Log-loss of this map's prediction for `p` against outcome `y`.
    pub fn log_loss(&self, p: f64, y: bool) -> f64 {
        log_loss_from_score(self.score(logit_clamped(p)), y)
    }

    pub(crate) fn score(&self, z: f64) -> f64 {
        self.a * z + self.b
    }

    pub fn norm(&self) -> f64 {
        self.a.hypot(self.b)
    }

    /// Euclidean projection onto the ball of radius [`PARAM_RADIUS`].
    pub fn clamp_to_ball(self) -> Self {
        self.clamp_to_radius(PARAM_RADIUS)
    }

    pub(crate) fn clamp_to_radius(self, radius: f64) -> Self {
        let n = self.norm();
        if n > radius {
            let s = radius / n;
            Self::new(self.a * s, self.b * s)
        } else {
            self
        }
    }
}

pub fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

pub fn logit_clamped(p: f64) -> f64 {
    let p = p.clamp(LOGIT_EPS, 1.0 - LOGIT_EPS);
    (p / (1.0 - p)).ln()
}

/// `-y log σ(u) - (1-y) log(1-σ(u))` computed from the score `u`.
pub(crate) fn log_loss_from_score(u: f64, y: bool) -> f64 {
    let softplus = u.max(0.0) + (-u.abs()).exp().ln_1p();
    if y {
        softplus - u
    } else {
        softplus
    }
}

/// Summed log-loss of a fixed map over `(p, y)` pairs.
pub fn stream_log_loss(params: PlattParams, data: &[(f64, bool)]) -> f64 {
    data.iter()
        .map(|&(p, y)| log_loss_from_score(params.score(logit_clamped(p)), y))
        .sum()
}

/// The batch fitting objective: summed log-loss plus the ridge term.
pub fn platt_objective(params: PlattParams, calset: &[(f64, bool)]) -> f64 {
    let da = params.a - PlattParams::IDENTITY.a;
    let db = params.b - PlattParams::IDENTITY.b;
    stream_log_loss(params, calset) + RIDGE * (da * da + db * db)
}

/// Minimizes the log-loss of the Platt map on a calibration set.
///
/// Damped Newton from the identity map with Armijo backtracking; every
/// iterate stays inside the feasible ball.
pub fn platt_fit_batch(calset: &[(f64, bool)]) -> Result<PlattParams> {
    if calset.is_empty() {
        return Err(Error::validation("cannot fit Platt scaling on an empty calibration set"));
    }
    if let Some(&(p, _)) = calset.iter().find(|(p, _)| !(0.0..=1.0).contains(p)) {
        return Err(Error::Domain(p));
    }
    let z: Vec<f64> = calset.iter().map(|&(p, _)| logit_clamped(p)).collect();
    let objective = |t: PlattParams| -> f64 {
        let da = t.a - 1.0;
        let db = t.b;
        z.iter()
            .zip(calset)
            .map(|(&z, &(_, y))| log_loss_from_score(t.score(z), y))
            .sum::<f64>()
            + RIDGE * (da * da + db * db)
    };

    let mut theta = PlattParams::IDENTITY;
    let mut f = objective(theta);
    for _ in 0..MAX_NEWTON_ITERS {
        let (mut ga, mut gb) = (2.0 * RIDGE * (theta.a - 1.0), 2.0 * RIDGE * theta.b);
        let (mut haa, mut hab, mut hbb) = (2.0 * RIDGE, 0.0, 2.0 * RIDGE);
        for (&z, &(_, y)) in z.iter().zip(calset) {
            let q = sigmoid(theta.score(z));
            let r = q - if y { 1.0 } else { 0.0 };
            let w = q * (1.0 - q);
            ga += r * z;
            gb += r;
            haa += w * z * z;
            hab += w * z;
            hbb += w;
        }
        if !(ga.is_finite() && gb.is_finite()) {
            return Err(Error::Numeric("Platt fit gradient"));
        }
        if ga.hypot(gb) < GRAD_TOL {
            break;
        }
        let det = haa * hbb - hab * hab;
        let (da, db) = if det > 0.0 && det.is_finite() {
            (-(hbb * ga - hab * gb) / det, -(haa * gb - hab * ga) / det)
        } else {
            (-ga, -gb)
        };
        let slope = ga * da + gb * db;

        let mut step = 1.0;
        let mut accepted = None;
        while step > 1e-12 {
            let cand = PlattParams::new(theta.a + step * da, theta.b + step * db).clamp_to_ball();
            let fc = objective(cand);
            if fc <= f + 1e-4 * step * slope {
                accepted = Some((cand, fc));
                break;
            }
            step *= 0.5;
        }
        match accepted {
            Some((cand, fc)) if cand != theta => {
                theta = cand;
                f = fc;
            }
            _ => break,
        }
    }
    Ok(theta)
}
