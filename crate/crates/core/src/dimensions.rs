//! Finite-scale estimators for scaling exponents of measures.
//!
//! Asymptotic quantities (liminf/limsup as `ε ↓ 0` or `t → ∞`) are replaced
//! by the minimum and maximum of least-squares slopes over a sliding window
//! of a declared scale grid. Nothing here claims an asymptotic value; every
//! [`ScalingEstimate`] records the window it was measured on.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dynamics::{LogSeries, SeriesKind};
use crate::error::{Error, Origin, Result};
use crate::measure::AtomicMeasure;
use crate::numeric::{fit_line, geometric_grid, pairwise_sum};

/// Minimum series length accepted by [`envelope_slopes`].
pub const MIN_SERIES_POINTS: usize = 8;

/// Scales below `RESOLUTION_FACTOR × (minimum atom gap)` are not trusted.
pub const RESOLUTION_FACTOR: f64 = 3.0;

/// A set of scales `ε` (or reciprocal times).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ScaleGrid {
    Geometric {
        min: f64,
        max: f64,
        points: usize,
    },
    Explicit {
        scales: Vec<f64>,
    },
    /// Every `base^{k/per_factor}` (integer `k`) inside `[min, max]`.
    Lattice {
        base: f64,
        per_factor: u32,
        min: f64,
        max: f64,
    },
}

impl ScaleGrid {
    pub fn geometric(min: f64, max: f64, points: usize) -> Self {
        ScaleGrid::Geometric { min, max, points }
    }

    /// The scales in increasing order.
    pub fn scales(&self) -> Result<Vec<f64>> {
        let scales = match self {
            ScaleGrid::Geometric { min, max, points } => {
                if !(*min > 0.0 && min < max && max.is_finite()) {
                    return Err(Error::validation(
                        Origin::Dimensions,
                        format!("need 0 < min < max, got [{min}, {max}]"),
                    ));
                }
                if *points < 2 {
                    return Err(Error::validation(
                        Origin::Dimensions,
                        "a scale grid needs at least 2 points",
                    ));
                }
                geometric_grid(*min, *max, *points)
            }
            ScaleGrid::Lattice {
                base,
                per_factor,
                min,
                max,
            } => {
                if !(*base > 1.0 && base.is_finite()) || *per_factor == 0 {
                    return Err(Error::validation(
                        Origin::Dimensions,
                        "lattice needs base > 1 and per_factor >= 1",
                    ));
                }
                if !(*min > 0.0 && min < max && max.is_finite()) {
                    return Err(Error::validation(
                        Origin::Dimensions,
                        format!("need 0 < min < max, got [{min}, {max}]"),
                    ));
                }
                let step = base.ln() / *per_factor as f64;
                let k_lo = (min.ln() / step - 1e-9).ceil() as i64;
                let k_hi = (max.ln() / step + 1e-9).floor() as i64;
                let s: Vec<f64> = (k_lo..=k_hi)
                    .map(|k| base.powf(k as f64 / *per_factor as f64))
                    .collect();
                if s.len() < 2 {
                    return Err(Error::validation(
                        Origin::Dimensions,
                        "lattice grid has fewer than 2 points",
                    ));
                }
                s
            }
            ScaleGrid::Explicit { scales } => {
                let mut s = scales.clone();
                s.sort_by(f64::total_cmp);
                if s.is_empty() || s.iter().any(|&e| !(e > 0.0) || !e.is_finite()) {
                    return Err(Error::validation(
                        Origin::Dimensions,
                        "scales must be positive and finite",
                    ));
                }
                if s.windows(2).any(|w| w[0] == w[1]) {
                    return Err(Error::validation(Origin::Dimensions, "scales must be distinct"));
                }
                s
            }
        };
        Ok(scales)
    }
}

/// Sliding-window parameters for [`envelope_slopes`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EnvelopeConfig {
    /// Points per regression window.
    pub window_points: usize,
    /// Drop the first and last windows.
    pub trim_edges: bool,
}

impl Default for EnvelopeConfig {
    fn default() -> Self {
        EnvelopeConfig {
            window_points: 5,
            trim_edges: true,
        }
    }
}

/// How a liminf/limsup of `ln f / ln ε` is approximated on a grid.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Estimator {
    /// Min/max of sliding-window log-log slopes.
    #[default]
    Slope,
    /// Min/max of the ratio `ln f(ε) / ln ε` itself (requires every `ε < 1`).
    Ratio,
}

/// Lower/upper envelope of a scaling exponent over a declared window.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalingEstimate {
    #[serde(with = "crate::serde_float")]
    pub lower: f64,
    #[serde(with = "crate::serde_float")]
    pub upper: f64,
    pub window: (f64, f64),
    pub estimator: Estimator,
    /// Per-window slopes (or per-point ratios) that produced the envelope.
    #[serde(with = "crate::serde_float::vec")]
    pub slopes: Vec<f64>,
    /// RMS regression residual per window (empty for ratios).
    pub residuals: Vec<f64>,
}

impl ScalingEstimate {
    fn infinite(window: (f64, f64), estimator: Estimator) -> Self {
        ScalingEstimate {
            lower: f64::INFINITY,
            upper: f64::INFINITY,
            window,
            estimator,
            slopes: Vec::new(),
            residuals: Vec::new(),
        }
    }

    fn negated(self) -> Self {
        ScalingEstimate {
            lower: -self.upper,
            upper: -self.lower,
            slopes: self.slopes.iter().map(|s| -s).collect(),
            ..self
        }
    }

    /// True when the degenerate-mass convention (`d = ∞`) applied.
    pub fn is_infinite(&self) -> bool {
        self.lower == f64::INFINITY
    }
}

/// Min and max least-squares slope of `ln value` against `ln grid` over a
/// sliding window.
pub fn envelope_slopes(series: &LogSeries, cfg: &EnvelopeConfig) -> Result<ScalingEstimate> {
    let n = series.len();
    if n < MIN_SERIES_POINTS {
        return Err(Error::validation(
            Origin::Dimensions,
            format!("series has {n} points, at least {MIN_SERIES_POINTS} are required"),
        ));
    }
    let k = cfg.window_points;
    if k < 2 || k > n {
        return Err(Error::validation(
            Origin::Dimensions,
            format!("window of {k} points does not fit a series of {n}"),
        ));
    }
    if series.values().iter().any(|&v| !(v > 0.0)) {
        return Err(Error::validation(
            Origin::Dimensions,
            "series contains non-positive values",
        ));
    }
    let lx: Vec<f64> = series.grid().iter().map(|g| g.ln()).collect();
    let ly: Vec<f64> = series.values().iter().map(|v| v.ln()).collect();

    let mut fits: Vec<(f64, f64)> = (0..=n - k)
        .map(|i| {
            let f = fit_line(&lx[i..i + k], &ly[i..i + k]);
            (f.slope, f.rms_residual)
        })
        .collect();
    if cfg.trim_edges && fits.len() >= 3 {
        fits.pop();
        fits.remove(0);
    }
    let slopes: Vec<f64> = fits.iter().map(|f| f.0).collect();
    let residuals: Vec<f64> = fits.iter().map(|f| f.1).collect();
    let lower = slopes.iter().copied().fold(f64::INFINITY, f64::min);
    let upper = slopes.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    Ok(ScalingEstimate {
        lower,
        upper,
        window: (series.grid()[0], series.grid()[n - 1]),
        estimator: Estimator::Slope,
        slopes,
        residuals,
    })
}

/// Refuses scales below [`RESOLUTION_FACTOR`] times the smallest atom gap.
pub fn check_resolvable(mu: &AtomicMeasure, scale_min: f64) -> Result<()> {
    if let Some(gap) = mu.min_gap() {
        let floor = RESOLUTION_FACTOR * gap;
        if scale_min < floor {
            return Err(Error::validation(
                Origin::Dimensions,
                format!(
                    "smallest scale {scale_min:e} is below the resolution floor {floor:e} \
                     ({RESOLUTION_FACTOR} x minimum atom gap {gap:e}); usable scales are [{floor:e}, inf)"
                ),
            ));
        }
    }
    Ok(())
}

/// `μ(B(x_j; ε))` for every atom `x_j`, by a two-pointer sweep.
fn atom_ball_masses(mu: &AtomicMeasure, eps: f64) -> Vec<f64> {
    let x = mu.positions();
    let w = mu.weights();
    let mut prefix = Vec::with_capacity(x.len() + 1);
    prefix.push(0.0);
    let mut acc = 0.0;
    for &wi in w {
        acc += wi;
        prefix.push(acc);
    }
    let (mut lo, mut hi) = (0usize, 0usize);
    x.iter()
        .map(|&xj| {
            while xj - x[lo] >= eps {
                lo += 1;
            }
            while hi < x.len() && x[hi] - xj < eps {
                hi += 1;
            }
            prefix[hi] - prefix[lo]
        })
        .collect()
}

/// `∫ μ(B(y; ε))^{q−1} dμ(y)`.
fn partition_sum(mu: &AtomicMeasure, q: f64, eps: f64) -> f64 {
    let masses = atom_ball_masses(mu, eps);
    let terms: Vec<f64> = if q == 2.0 {
        mu.weights().iter().zip(&masses).map(|(w, m)| w * m).collect()
    } else {
        mu.weights()
            .iter()
            .zip(&masses)
            .map(|(w, m)| w * m.powf(q - 1.0))
            .collect()
    };
    pairwise_sum(&terms)
}

/// `C(ε) = ∫ μ(B(y; ε)) dμ(y) = Σ_{j,k} w_j w_k 1{|x_j − x_k| < ε}`.
pub fn correlation_integral(mu: &AtomicMeasure, eps: f64) -> f64 {
    partition_sum(mu, 2.0, eps)
}

/// `∫ μ(B(y; ε))^{q−1} dμ(y)` at each scale.
pub fn partition_sums(mu: &AtomicMeasure, q: f64, scales: &[f64]) -> Vec<f64> {
    scales.par_iter().map(|&e| partition_sum(mu, q, e)).collect()
}

/// Ball masses `μ(B(x; ε))` or Laplace values `∫ e^{−2|x−y|/ε} dμ(y)` at each scale.
pub fn route_profile(mu: &AtomicMeasure, x: f64, scales: &[f64], route: Route) -> Vec<f64> {
    match route {
        Route::Ball => scales
            .iter()
            .map(|&e| {
                let range = mu.ball_range(x, e);
                mu.weights()[range].iter().sum()
            })
            .collect(),
        Route::Laplace => scales.iter().map(|&e| mu.laplace_transform(x, 1.0 / e)).collect(),
    }
}

/// Windowed `D^±(q)` from slopes of `ln Σ_j w_j μ(B(x_j; ε))^{q−1} / (q − 1)`.
pub fn generalized_dimension(
    mu: &AtomicMeasure,
    q: f64,
    grid: &ScaleGrid,
    cfg: &EnvelopeConfig,
) -> Result<ScalingEstimate> {
    if !(q > 0.0) || q == 1.0 || !q.is_finite() {
        return Err(Error::validation(
            Origin::Dimensions,
            format!("q must be positive and different from 1, got {q}"),
        ));
    }
    if mu.is_degenerate() {
        return Err(Error::validation(Origin::Dimensions, "measure carries no mass"));
    }
    let scales = grid.scales()?;
    check_resolvable(mu, scales[0])?;
    let sums = partition_sums(mu, q, &scales);
    let series = LogSeries::new(scales, sums, SeriesKind::PartitionSum)?;
    let raw = envelope_slopes(&series, cfg)?;
    let scale = 1.0 / (q - 1.0);
    let slopes: Vec<f64> = raw.slopes.iter().map(|s| s * scale).collect();
    let (lower, upper) = if scale > 0.0 {
        (raw.lower * scale, raw.upper * scale)
    } else {
        (raw.upper * scale, raw.lower * scale)
    };
    Ok(ScalingEstimate {
        lower,
        upper,
        slopes,
        ..raw
    })
}

/// Which side of the ball/Laplace identities measures the pointwise exponent.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Route {
    /// `ln μ(B(x; ε))` against `ln ε`.
    Ball,
    /// `−ln ∫ e^{−2t|x−y|} dμ(y)` against `ln t`, with `t = 1/ε`.
    Laplace,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PointwiseOptions {
    pub route: Route,
    pub estimator: Estimator,
    pub envelope: EnvelopeConfig,
    /// Apply [`check_resolvable`]; disable for measures that are atomic by construction.
    pub enforce_resolution: bool,
}

impl Default for PointwiseOptions {
    fn default() -> Self {
        PointwiseOptions {
            route: Route::Ball,
            estimator: Estimator::Slope,
            envelope: EnvelopeConfig::default(),
            enforce_resolution: true,
        }
    }
}

impl PointwiseOptions {
    pub fn route(route: Route) -> Self {
        PointwiseOptions {
            route,
            ..Default::default()
        }
    }
}

/// Windowed lower/upper pointwise exponents `d^±(x)`.
///
/// A ball of zero mass anywhere in the window (or a Laplace transform that
/// underflows) makes both exponents `+∞`.
pub fn pointwise_exponents(
    mu: &AtomicMeasure,
    x: f64,
    grid: &ScaleGrid,
    opts: &PointwiseOptions,
) -> Result<ScalingEstimate> {
    let scales = grid.scales()?;
    if opts.enforce_resolution {
        check_resolvable(mu, scales[0])?;
    }
    let window = (scales[0], scales[scales.len() - 1]);
    if opts.estimator == Estimator::Ratio && window.1 >= 1.0 {
        return Err(Error::validation(
            Origin::Dimensions,
            "the ratio estimator needs every scale below 1",
        ));
    }
    let values = route_profile(mu, x, &scales, opts.route);
    if values.iter().any(|&v| !(v > 0.0)) {
        return Ok(ScalingEstimate::infinite(window, opts.estimator));
    }

    match opts.estimator {
        Estimator::Ratio => {
            let ratios: Vec<f64> = values.iter().zip(&scales).map(|(v, e)| v.ln() / e.ln()).collect();
            Ok(ScalingEstimate {
                lower: ratios.iter().copied().fold(f64::INFINITY, f64::min),
                upper: ratios.iter().copied().fold(f64::NEG_INFINITY, f64::max),
                window,
                estimator: Estimator::Ratio,
                slopes: ratios,
                residuals: Vec::new(),
            })
        }
        Estimator::Slope => match opts.route {
            Route::Ball => {
                let series = LogSeries::new(scales, values, SeriesKind::BallMass)?;
                envelope_slopes(&series, &opts.envelope)
            }
            Route::Laplace => {
                let (times, values): (Vec<f64>, Vec<f64>) =
                    scales.iter().zip(&values).rev().map(|(e, v)| (1.0 / e, *v)).unzip();
                let series = LogSeries::new(times, values, SeriesKind::Laplace)?;
                let est = envelope_slopes(&series, &opts.envelope)?.negated();
                Ok(ScalingEstimate { window, ..est })
            }
        },
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum UahVerdict {
    BoundedAtTestedScales,
    Diverging,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct UahOptions {
    /// The growth exponent must exceed `3 × max(stderr, growth_floor)` to
    /// count as divergence.
    pub growth_floor: f64,
    pub enforce_resolution: bool,
}

impl Default for UahOptions {
    fn default() -> Self {
        UahOptions {
            growth_floor: 0.01,
            enforce_resolution: true,
        }
    }
}

/// Finite-scale test of `μ(I) < C |I|^α`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UahReport {
    pub alpha: f64,
    /// `(h, sup_{|I| = h} μ(I) / h^α)` for each tested scale, largest first.
    pub samples: Vec<(f64, f64)>,
    pub verdict: UahVerdict,
    /// Fitted exponent of the modulus against `1/h`.
    pub growth_exponent: f64,
    pub growth_stderr: f64,
}

/// Sup of `μ(I)/h^α` over intervals of length `h` anchored on a grid of
/// stride `h/4`, for each `h` in `scales` (strictly decreasing, inside (0, 1)).
pub fn uah_modulus(mu: &AtomicMeasure, alpha: f64, scales: &[f64], opts: &UahOptions) -> Result<UahReport> {
    if !(0.0..=1.0).contains(&alpha) {
        return Err(Error::validation(
            Origin::Dimensions,
            format!("alpha must lie in [0, 1], got {alpha}"),
        ));
    }
    if scales.len() < 2 {
        return Err(Error::validation(Origin::Dimensions, "need at least two scales"));
    }
    if scales.iter().any(|&h| !(h > 0.0 && h < 1.0)) {
        return Err(Error::validation(Origin::Dimensions, "scales must lie in (0, 1)"));
    }
    if scales.windows(2).any(|w| !(w[0] > w[1])) {
        return Err(Error::validation(
            Origin::Dimensions,
            "scales must be strictly decreasing",
        ));
    }
    if opts.enforce_resolution {
        check_resolvable(mu, scales[scales.len() - 1])?;
    }
    let samples: Vec<(f64, f64)> = scales
        .par_iter()
        .map(|&h| (h, sup_interval_mass(mu, h) / h.powf(alpha)))
        .collect();

    let (growth_exponent, growth_stderr) = if samples.iter().all(|s| s.1 > 0.0) {
        let lx: Vec<f64> = samples.iter().map(|s| -s.0.ln()).collect();
        let ly: Vec<f64> = samples.iter().map(|s| s.1.ln()).collect();
        let fit = fit_line(&lx, &ly);
        (fit.slope, fit.slope_stderr)
    } else {
        (0.0, 0.0)
    };
    let verdict = if growth_exponent > 3.0 * growth_stderr.max(opts.growth_floor) {
        UahVerdict::Diverging
    } else {
        UahVerdict::BoundedAtTestedScales
    };
    Ok(UahReport {
        alpha,
        samples,
        verdict,
        growth_exponent,
        growth_stderr,
    })
}

/// Sup of `μ((a, a + h))` over anchors `a = origin + i·h/4`. Only anchors
/// whose interval can contain an atom are visited; the others have mass 0.
fn sup_interval_mass(mu: &AtomicMeasure, h: f64) -> f64 {
    let Some((first, _)) = mu.support_bounds() else {
        return 0.0;
    };
    let stride = h / 4.0;
    let origin = first - h;
    let half = 0.5 * h;
    let mut best = 0.0_f64;
    let mut last_anchor: Option<i64> = None;
    for &x in mu.positions() {
        let i_lo = ((x - h - origin) / stride).floor() as i64;
        let i_hi = ((x - origin) / stride).ceil() as i64;
        let start = match last_anchor {
            Some(l) if l >= i_lo => l + 1,
            _ => i_lo,
        };
        for i in start..=i_hi {
            let center = origin + i as f64 * stride + half;
            let range = mu.ball_range(center, half);
            let mass: f64 = mu.weights()[range].iter().sum();
            best = best.max(mass);
        }
        last_anchor = Some(last_anchor.map_or(i_hi, |l| l.max(i_hi)));
    }
    best
}
