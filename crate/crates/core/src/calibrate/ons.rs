//! Online Platt scaling driven by the Online Newton Step.

use serde::{Deserialize, Serialize};

use super::platt::{logit_clamped, sigmoid, PlattParams, PARAM_RADIUS};
use crate::error::{check_probability, Error, Result};

/// `A⁻¹` is rebuilt from `A` this often to stop rank-1 update drift.
const INVERSE_REFRESH_STEPS: u64 = 1_000_000;

/// Symmetric 2×2 matrix `[[xx, xy], [xy, yy]]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Sym2 {
    pub xx: f64,
    pub xy: f64,
    pub yy: f64,
}

impl Sym2 {
    pub fn scaled_identity(s: f64) -> Self {
        Self {
            xx: s,
            xy: 0.0,
            yy: s,
        }
    }

    pub fn mul_vec(&self, v: [f64; 2]) -> [f64; 2] {
        [
            self.xx * v[0] + self.xy * v[1],
            self.xy * v[0] + self.yy * v[1],
        ]
    }

    pub fn det(&self) -> f64 {
        self.xx * self.yy - self.xy * self.xy
    }

    pub fn inverse(&self) -> Self {
        let d = self.det();
        Self {
            xx: self.yy / d,
            xy: -self.xy / d,
            yy: self.xx / d,
        }
    }

    fn add_outer(&mut self, g: [f64; 2]) {
        self.xx += g[0] * g[0];
        self.xy += g[0] * g[1];
        self.yy += g[1] * g[1];
    }

    /// Eigenvalues (largest first) and the rotation angle of the first eigenvector.
    pub fn eigen(&self) -> ([f64; 2], f64) {
        let angle = 0.5 * (2.0 * self.xy).atan2(self.xx - self.yy);
        let (s, c) = angle.sin_cos();
        let l1 = self.xx * c * c + 2.0 * self.xy * s * c + self.yy * s * s;
        let l2 = self.xx * s * s - 2.0 * self.xy * s * c + self.yy * c * c;
        ([l1, l2], angle)
    }
}

/// Hyperparameters of the online update.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OnsConfig {
    /// Inverse step size.
    pub gamma: f64,
    /// Scale of the initial regularizer `A₀ = (1/(γD))² I`.
    pub d: f64,
}

impl Default for OnsConfig {
    fn default() -> Self {
        Self { gamma: 0.1, d: 1.0 }
    }
}

impl OnsConfig {
    /// The untuned setting used for weekly COVID-19 case forecasts.
    pub const COVID: Self = Self {
        gamma: 0.001,
        d: 10.0,
    };

    pub fn validate(&self) -> Result<()> {
        if !(self.gamma.is_finite() && self.gamma > 0.0) {
            return Err(Error::validation(format!("gamma must be positive, got {}", self.gamma)));
        }
        if !(self.d.is_finite() && self.d > 0.0) {
            return Err(Error::validation(format!("D must be positive, got {}", self.d)));
        }
        Ok(())
    }
}

/// State of online Platt scaling: the current parameters, the accumulated
/// gradient outer products `A` and its inverse.
#[derive(Debug, Clone, PartialEq)]
pub struct OnsState {
    theta: PlattParams,
    a: Sym2,
    a_inv: Sym2,
    config: OnsConfig,
    steps: u64,
}

impl OnsState {
    pub fn new(config: OnsConfig) -> Result<Self> {
        config.validate()?;
        let eps = (1.0 / (config.gamma * config.d)).powi(2);
        Ok(Self {
            theta: PlattParams::IDENTITY,
            a: Sym2::scaled_identity(eps),
            a_inv: Sym2::scaled_identity(1.0 / eps),
            config,
            steps: 0,
        })
    }

    pub fn params(&self) -> PlattParams {
        self.theta
    }

    pub fn matrix(&self) -> Sym2 {
        self.a
    }

    pub fn inverse(&self) -> Sym2 {
        self.a_inv
    }

    pub fn config(&self) -> OnsConfig {
        self.config
    }

    pub fn steps(&self) -> u64 {
        self.steps
    }

    pub fn predict(&self, p: f64) -> f64 {
        self.theta.apply(p)
    }

    /// Observes outcome `y` for raw probability `p` and moves the parameters.
    pub fn step(&mut self, p: f64, y: bool) -> Result<()> {
        check_probability(p)?;
        let z = logit_clamped(p);
        let r = sigmoid(self.theta.score(z)) - if y { 1.0 } else { 0.0 };
        let g = [r * z, r];
        if !(g[0].is_finite() && g[1].is_finite()) {
            return Err(Error::Numeric("online Newton gradient"));
        }

        self.a.add_outer(g);
        self.steps += 1;
        if self.steps.is_multiple_of(INVERSE_REFRESH_STEPS) {
            self.a_inv = self.a.inverse();
        } else {
            // Sherman–Morrison
            let u = self.a_inv.mul_vec(g);
            let denom = 1.0 + g[0] * u[0] + g[1] * u[1];
            self.a_inv.xx -= u[0] * u[0] / denom;
            self.a_inv.xy -= u[0] * u[1] / denom;
            self.a_inv.yy -= u[1] * u[1] / denom;
        }

        let dir = self.a_inv.mul_vec(g);
        let unconstrained = PlattParams::new(
            self.theta.a - dir[0] / self.config.gamma,
            self.theta.b - dir[1] / self.config.gamma,
        );
        self.theta = project_in_metric(unconstrained, &self.a, PARAM_RADIUS);
        Ok(())
    }
}

/// `argmin_{‖θ‖ ≤ radius} (point - θ)ᵀ A (point - θ)`.
///
/// Outside the ball the minimizer is `(A + μI)⁻¹ A · point` for the unique
/// multiplier `μ > 0` that puts it on the sphere. In the eigenbasis of `A`
/// the norm is monotone in `μ`, so `μ` is found by bisection.
pub fn project_in_metric(point: PlattParams, metric: &Sym2, radius: f64) -> PlattParams {
    let norm = point.norm();
    if norm <= radius {
        return point;
    }
    let ([l1, l2], angle) = metric.eigen();
    let (s, c) = angle.sin_cos();
    let c1 = c * point.a + s * point.b;
    let c2 = -s * point.a + c * point.b;
    let at = |mu: f64| -> (f64, f64) { (l1 * c1 / (l1 + mu), l2 * c2 / (l2 + mu)) };
    let radius_at = |mu: f64| {
        let (e1, e2) = at(mu);
        e1.hypot(e2)
    };

    let mut lo = 0.0;
    let mut hi = l1.max(l2) * (norm / radius - 1.0);
    while radius_at(hi) > radius {
        hi *= 2.0;
    }
    for _ in 0..400 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if radius_at(mid) > radius {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let (e1, e2) = at(hi);
    let projected = PlattParams::new(c * e1 - s * e2, s * e1 + c * e2);
    projected.clamp_to_radius(radius)
}
