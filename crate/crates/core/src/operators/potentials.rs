use std::ops::Range;

use serde::{Deserialize, Serialize};

/// Irrational rotation number, carried as a double together with its name.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Rotation {
    /// `(√5 − 1)/2`, the fractional part of the golden mean.
    GoldenMean,
    /// Any other value in `(0, 1)`; the label is recorded in reports.
    Value { theta: f64, label: String },
}

impl Rotation {
    pub fn theta(&self) -> f64 {
        match self {
            Rotation::GoldenMean => (5f64.sqrt() - 1.0) / 2.0,
            Rotation::Value { theta, .. } => *theta,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SturmianParams {
    pub coupling: f64,
    pub rotation: Rotation,
    #[serde(default)]
    pub phase: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LimitPeriodicParams {
    /// `c_1, …, c_K`; term `k` has period `base_period · 2^k`.
    pub coefficients: Vec<f64>,
    #[serde(default = "one")]
    pub base_period: u64,
}

fn one() -> u64 {
    1
}

impl LimitPeriodicParams {
    /// Period of the truncated sequence, `base_period · 2^K`.
    pub fn period(&self) -> u64 {
        self.base_period << self.coefficients.len()
    }
}

/// `frac(n θ + β)` with the product `nθ` carried as an unevaluated sum so
/// that large `|n|` keep full precision in the fractional part.
fn rotation_phase(n: i64, theta: f64, beta: f64) -> f64 {
    let nf = n as f64;
    let hi = nf * theta;
    let lo = nf.mul_add(theta, -hi);
    let reduced = hi - hi.floor();
    let x = reduced + lo + beta;
    let f = x - x.floor();
    if f >= 1.0 {
        0.0
    } else {
        f
    }
}

/// `λ · χ_{[1−θ, 1)}(nθ + β mod 1)` for every `n` in `window`.
pub fn sturmian_potential(p: &SturmianParams, window: Range<i64>) -> Vec<f64> {
    let theta = p.rotation.theta();
    window
        .map(|n| {
            if rotation_phase(n, theta, p.phase) >= 1.0 - theta {
                p.coupling
            } else {
                0.0
            }
        })
        .collect()
}

/// Square wave of period `period` (even): `+1` on the first half, `−1` after.
fn square_wave(n: i64, period: u64) -> f64 {
    let r = n.rem_euclid(period as i64) as u64;
    if r < period / 2 {
        1.0
    } else {
        -1.0
    }
}

/// `Σ_k c_k φ_k(n)`: a periodic approximant of a limit-periodic potential.
pub fn limit_periodic_potential(p: &LimitPeriodicParams, window: Range<i64>) -> Vec<f64> {
    window
        .map(|n| {
            p.coefficients
                .iter()
                .enumerate()
                .map(|(k, c)| c * square_wave(n, p.base_period << (k + 1)))
                .sum()
        })
        .collect()
}
