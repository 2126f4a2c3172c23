//! Reference implementations used only by the tests. None of these share
//! code with the library paths they check.
#![allow(dead_code)]

use std::f64::consts::PI;

/// erf(x) from the all-positive series
/// `erf(x) = 2/√π · e^{-x²} · Σ 2ⁿ x^{2n+1} / (1·3·…·(2n+1))`.
pub fn erf_series(x: f64) -> f64 {
    let mut term = x;
    let mut sum = x;
    let x2 = x * x;
    for n in 1..400 {
        term *= 2.0 * x2 / (2 * n + 1) as f64;
        sum += term;
        if term.abs() < 1e-18 * sum.abs() {
            break;
        }
    }
    2.0 / PI.sqrt() * (-x2).exp() * sum
}

/// Φ via the series above; good to ~1e-15 for |x| ≤ 5.
pub fn phi(x: f64) -> f64 {
    0.5 * (1.0 + erf_series(x / 2f64.sqrt()))
}

/// Bisection for an increasing function.
pub fn bisect(f: impl Fn(f64) -> f64, target: f64, mut lo: f64, mut hi: f64) -> f64 {
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if f(mid) < target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// AUROC by comparing every positive with every negative; ties count ½.
pub fn auroc_pairwise(pairs: &[(f64, bool)]) -> f64 {
    let pos: Vec<f64> = pairs.iter().filter(|p| p.1).map(|p| p.0).collect();
    let neg: Vec<f64> = pairs.iter().filter(|p| !p.1).map(|p| p.0).collect();
    let mut wins = 0.0;
    for &a in &pos {
        for &b in &neg {
            if a > b {
                wins += 1.0;
            } else if a == b {
                wins += 0.5;
            }
        }
    }
    wins / (pos.len() * neg.len()) as f64
}

pub fn logit(p: f64) -> f64 {
    let p = p.clamp(1e-6, 1.0 - 1e-6);
    (p / (1.0 - p)).ln()
}

/// Summed log-loss of `sigmoid(a z + b)` on pre-computed logits.
pub fn platt_loss(a: f64, b: f64, z: &[f64], y: &[bool]) -> f64 {
    z.iter()
        .zip(y)
        .map(|(&z, &y)| {
            let u = a * z + b;
            // -ln σ(u) = ln(1 + e^{-u}); -ln(1 - σ(u)) = ln(1 + e^{u})
            let s = if y { -u } else { u };
            if s > 0.0 {
                s + (-s).exp().ln_1p()
            } else {
                s.exp().ln_1p()
            }
        })
        .sum()
}

/// Minimum of `platt_loss` over the grid `a0 + i·step`, `b0 + j·step`.
///
/// For a fixed `a` the loss is strictly convex in `b`, so its restriction to
/// the `b` grid is a strictly convex sequence and any local minimum found by
/// walking downhill is the row minimum. Every row is visited.
pub fn platt_grid_min(
    z: &[f64],
    y: &[bool],
    (a0, na): (f64, usize),
    (b0, nb): (f64, usize),
    step: f64,
) -> (f64, f64, f64) {
    let mut best = (f64::INFINITY, 0.0, 0.0);
    let mut j = nb / 2;
    for i in 0..na {
        let a = a0 + i as f64 * step;
        let f = |j: usize| platt_loss(a, b0 + j as f64 * step, z, y);
        let mut fj = f(j);
        loop {
            if j + 1 < nb {
                let up = f(j + 1);
                if up < fj {
                    j += 1;
                    fj = up;
                    continue;
                }
            }
            if j > 0 {
                let down = f(j - 1);
                if down < fj {
                    j -= 1;
                    fj = down;
                    continue;
                }
            }
            break;
        }
        if fj < best.0 {
            best = (fj, a, b0 + j as f64 * step);
        }
    }
    best
}

/// Kolmogorov–Smirnov distance of a sample to Uniform(lo, hi).
pub fn ks_uniform(mut xs: Vec<f64>, lo: f64, hi: f64) -> f64 {
    xs.sort_by(f64::total_cmp);
    let n = xs.len() as f64;
    xs.iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = ((x - lo) / (hi - lo)).clamp(0.0, 1.0);
            (f - i as f64 / n).abs().max(((i + 1) as f64 / n - f).abs())
        })
        .fold(0.0, f64::max)
}
