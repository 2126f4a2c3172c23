//! Standard normal distribution primitives.
//!
//! The cdf goes through the complementary error function so that both tails
//! keep full relative precision. The quantile is found with safeguarded
//! Newton steps inside a shrinking bracket.

use libm::erfc;
use std::f64::consts::FRAC_1_SQRT_2;

const FRAC_1_SQRT_2PI: f64 = 0.398_942_280_401_432_7;

/// Φ(x).
pub fn cdf(x: f64) -> f64 {
    if x.is_nan() {
        return f64::NAN;
    }
    0.5 * erfc(-x * FRAC_1_SQRT_2)
}

/// φ(x).
pub fn pdf(x: f64) -> f64 {
    FRAC_1_SQRT_2PI * (-0.5 * x * x).exp()
}

/// Φ⁻¹(p). Returns `-inf` / `+inf` at the endpoints and NaN outside `[0, 1]`.
pub fn quantile(p: f64) -> f64 {
    if !(0.0..=1.0).contains(&p) {
        return f64::NAN;
    }
    if p == 0.0 {
        return f64::NEG_INFINITY;
    }
    if p == 1.0 {
        return f64::INFINITY;
    }
    if p == 0.5 {
        return 0.0;
    }
    if p > 0.5 {
        // 1 - p is exact here
        return -quantile(1.0 - p);
    }

    // Lower tail: Newton on ln Φ(x) = ln p, which stays well conditioned far out.
    let target = p.ln();
    let mut x = -(-2.0 * target).sqrt().max(1e-3);
    let (mut lo, mut hi) = (-40.0_f64, 0.0_f64);
    for _ in 0..100 {
        let c = cdf(x);
        let h = c.ln() - target;
        if h == 0.0 {
            return x;
        }
        if h > 0.0 {
            hi = hi.min(x);
        } else {
            lo = lo.max(x);
        }
        let slope = pdf(x) / c;
        let mut next = if slope > 0.0 && slope.is_finite() { x - h / slope } else { f64::NAN };
        if !(next > lo && next < hi) {
            next = 0.5 * (lo + hi);
        }
        if (next - x).abs() <= 1e-15 * (1.0 + x.abs()) {
            return next;
        }
        x = next;
    }
    x
}
