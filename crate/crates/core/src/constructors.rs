//! Builders for measures with prescribed local behaviour at a point `x`:
//! smoothing, slowly concentrating ladders, splices and oscillating ladders.
//!
//! Everything here acts on measures only. A state-level operation such as
//! adding `(1/n)·η` to a projected state becomes the mixture with weight
//! `1/n²`, which is exact on every ball that only sees one of the two parts.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Origin, Result, Violation};
use crate::measure::AtomicMeasure;

/// Deepest ladder level: `e^{−2^9} ≈ 4e-223` is still a normal double.
pub const MAX_SLOW_DEPTH: u32 = 9;

/// Smallest scale an oscillation band may reach.
pub const MIN_BAND_SCALE: f64 = 1e-280;

/// Smallest atom weight an oscillation ladder may emit.
pub const MIN_LADDER_WEIGHT: f64 = 1e-300;

/// Slopes at or below this count as "low" when checking alternation.
pub const LOW_SLOPE_LIMIT: f64 = 0.5;

/// `ε_j = e^{−2^j}`.
pub fn slow_scale(j: u32) -> f64 {
    (-(2f64.powi(j as i32))).exp()
}

/// `e^{−1.5·2^j}`, which lies strictly between `ε_{j+1}` and `ε_j`.
pub fn slow_midscale(j: u32) -> f64 {
    (-1.5 * 2f64.powi(j as i32)).exp()
}

/// Atoms at `x + ε_j`, `j = start..=depth`, with weights `w_j`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SlowSchedule {
    pub center: f64,
    /// First ladder level; raise it to push `ε_start` below a splice radius.
    #[serde(default = "default_start")]
    pub start: u32,
    pub depth: u32,
    /// `w_start, …, w_depth`; defaults to `2^{−j}`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub weights: Option<Vec<f64>>,
}

fn default_start() -> u32 {
    1
}

impl SlowSchedule {
    pub fn new(center: f64, depth: u32) -> Self {
        SlowSchedule {
            center,
            start: 1,
            depth,
            weights: None,
        }
    }

    pub fn starting_at(mut self, start: u32) -> Self {
        self.start = start;
        self
    }

    pub fn levels(&self) -> std::ops::RangeInclusive<u32> {
        self.start..=self.depth
    }

    pub fn scales(&self) -> Vec<f64> {
        self.levels().map(slow_scale).collect()
    }

    pub fn weights(&self) -> Vec<f64> {
        match &self.weights {
            Some(w) => w.clone(),
            None => self.levels().map(|j| 0.5f64.powi(j as i32)).collect(),
        }
    }

    /// `ε_start` (the outermost atom distance).
    pub fn outer_scale(&self) -> f64 {
        slow_scale(self.start)
    }

    /// Radii `e^{−1.5·2^j}` for `j = start..depth`: one per gap of the ladder,
    /// increasing. Balls of these radii see exactly the tails `Σ_{k>j} w_k`.
    pub fn matched_scales(&self) -> Vec<f64> {
        (self.start..self.depth).rev().map(slow_midscale).collect()
    }

    pub fn validate(&self) -> Vec<Violation> {
        let mut out = Vec::new();
        if !self.center.is_finite() {
            out.push(Violation::new("center", "must be finite"));
        }
        if self.start == 0 {
            out.push(Violation::new("start", "ladder levels start at 1"));
        }
        if self.depth > MAX_SLOW_DEPTH {
            out.push(Violation::new(
                "depth",
                format!(
                    "at most {MAX_SLOW_DEPTH} levels fit in double precision, got {}",
                    self.depth
                ),
            ));
        }
        if self.start > self.depth {
            out.push(Violation::new(
                "depth",
                format!("depth {} is below start {}", self.depth, self.start),
            ));
        }
        if !out.is_empty() {
            return out;
        }
        let weights = self.weights();
        let expected = (self.depth - self.start + 1) as usize;
        if weights.len() != expected {
            out.push(Violation::new(
                "weights",
                format!("expected {expected} weights, got {}", weights.len()),
            ));
            return out;
        }
        for (i, &w) in weights.iter().enumerate() {
            if !(w > 0.0) || !w.is_finite() {
                out.push(Violation::new(
                    format!("weights[{i}]"),
                    format!("must be positive, got {w}"),
                ));
            }
        }
        if !out.is_empty() {
            return out;
        }
        // tail inequality Σ_{k≥j} w_k ≥ 2^{−j}
        let mut tail = 0.0;
        for i in (0..weights.len()).rev() {
            let j = self.start + i as u32;
            tail += weights[i];
            let need = 0.5f64.powi(j as i32);
            if tail < need {
                out.push(Violation::new(
                    format!("weights[{i}]"),
                    format!("tail sum {tail:e} from level {j} is below 2^-{j} = {need:e}"),
                ));
            }
        }
        out
    }
}

fn first_violation(origin_op: &str, violations: Vec<Violation>) -> Result<()> {
    match violations.into_iter().next() {
        None => Ok(()),
        Some(v) => Err(Error::validation(Origin::Constructors, format!("{origin_op}: {v}"))),
    }
}

/// The ladder `Σ_j w_j δ_{x + ε_j}`.
///
/// When `|x|` is large compared with the deep scales, `x + ε_j` rounds to
/// `x` and those atoms merge into one atom at the centre; ball masses around
/// `x` are unaffected.
pub fn slow_measure(s: &SlowSchedule) -> Result<AtomicMeasure> {
    first_violation("slow_measure", s.validate())?;
    AtomicMeasure::from_atoms(s.scales().into_iter().zip(s.weights()).map(|(e, w)| (s.center + e, w)))
}

/// Multiplies each weight by `1 − e^{−n|x − y|^ρ}`.
///
/// An atom exactly at `x` vanishes. If nothing survives the result is empty
/// and reports itself degenerate.
pub fn smooth_state(mu: &AtomicMeasure, x: f64, rho: f64, n: f64) -> Result<AtomicMeasure> {
    if !(rho > 0.0) || !rho.is_finite() {
        return Err(Error::validation(
            Origin::Constructors,
            format!("smooth_state: rho must be positive, got {rho}"),
        ));
    }
    if !(n > 0.0) || !n.is_finite() {
        return Err(Error::validation(
            Origin::Constructors,
            format!("smooth_state: n must be positive, got {n}"),
        ));
    }
    if !x.is_finite() {
        return Err(Error::validation(
            Origin::Constructors,
            "smooth_state: x must be finite",
        ));
    }
    let (positions, weights): (Vec<f64>, Vec<f64>) = mu
        .atoms()
        .map(|(y, w)| (y, w * -(-n * (x - y).abs().powf(rho)).exp_m1()))
        .filter(|&(_, w)| w > 0.0)
        .unzip();
    Ok(AtomicMeasure::from_sorted_unchecked(positions, weights))
}

/// `μ_ψ` with `(x − 1/n, x) ∪ (x, x + 1/n)` removed, plus `μ_η / n²`.
///
/// `μ_ψ` must not charge `x` itself, and every atom of `μ_η` must lie
/// strictly within `1/n` of `x`; then for every
/// `ε ≤ 1/n` the ball `B(x; ε)` of the result carries exactly `μ_η(B(x; ε))/n²`.
pub fn splice_state(mu_psi: &AtomicMeasure, mu_eta: &AtomicMeasure, n: u32, x: f64) -> Result<AtomicMeasure> {
    if n == 0 {
        return Err(Error::validation(
            Origin::Constructors,
            "splice_state: n must be positive",
        ));
    }
    if !x.is_finite() {
        return Err(Error::validation(
            Origin::Constructors,
            "splice_state: x must be finite",
        ));
    }
    let radius = 1.0 / n as f64;
    if let Some((y, _)) = mu_eta.atoms().find(|&(y, _)| !((x - y).abs() < radius)) {
        return Err(Error::validation(
            Origin::Constructors,
            format!(
                "splice_state: the spliced measure has an atom at {y}, at distance {:e} >= 1/n = {radius:e} from x = {x}",
                (x - y).abs()
            ),
        ));
    }
    if mu_psi.ball_mass(crate::measure::BallQuery::new(x, f64::MIN_POSITIVE)?) > 0.0 {
        return Err(Error::validation(
            Origin::Constructors,
            format!("splice_state: the base measure has an atom at x = {x}; smooth it first"),
        ));
    }
    let outside = mu_psi.restrict(&[(x - radius, x), (x, x + radius)])?;
    let coefficient = radius * radius;
    match (outside.is_empty(), mu_eta.is_empty()) {
        (true, true) => Ok(AtomicMeasure::empty()),
        (true, false) => mu_eta.scaled(coefficient),
        (false, true) => Ok(outside),
        (false, false) => AtomicMeasure::mix(&[(&outside, 1.0), (mu_eta, coefficient)]),
    }
}

/// One scale band `[lo, hi]` of an oscillation ladder with target slope.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OscillationBlock {
    pub lo: f64,
    pub hi: f64,
    pub slope: f64,
}

impl OscillationBlock {
    pub fn new(lo: f64, hi: f64, slope: f64) -> Self {
        OscillationBlock { lo, hi, slope }
    }

    pub fn is_low(&self) -> bool {
        self.slope <= LOW_SLOPE_LIMIT
    }
}

/// A ladder at `center` whose ball-mass profile has slope `s_k` on band `k`.
///
/// Within a band the mass of `B(center; r)` follows `F(hi)·(r/hi)^{s_k}`,
/// realised by atoms at `center + r_i` on a grid of `atoms_per_decade`
/// radii. Bands with slope 0 need no atoms. Whatever mass remains below the
/// last band sits in one atom at the centre.
///
/// An infinite upper exponent cannot be realised at finite precision; a
/// high target (3 by default) stands in for it, and deeper ladders with
/// larger targets exceed any fixed slope.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OscillationPlan {
    pub center: f64,
    pub blocks: Vec<OscillationBlock>,
    #[serde(default = "default_atoms_per_decade")]
    pub atoms_per_decade: u32,
    #[serde(default = "default_mass")]
    pub mass: f64,
}

fn default_atoms_per_decade() -> u32 {
    200
}

fn default_mass() -> f64 {
    1.0
}

impl OscillationPlan {
    pub fn new(center: f64, blocks: Vec<OscillationBlock>) -> Self {
        OscillationPlan {
            center,
            blocks,
            atoms_per_decade: default_atoms_per_decade(),
            mass: default_mass(),
        }
    }

    /// Four alternating bands (0, high, 0, high), 1.5 decades each, from
    /// `10^{-1}` down to `10^{-7}`.
    pub fn alternating(center: f64, high: f64) -> Self {
        let d = |e: f64| 10f64.powf(e);
        Self::new(
            center,
            vec![
                OscillationBlock::new(d(-2.5), d(-1.0), 0.0),
                OscillationBlock::new(d(-4.0), d(-2.5), high),
                OscillationBlock::new(d(-5.5), d(-4.0), 0.0),
                OscillationBlock::new(d(-7.0), d(-5.5), high),
            ],
        )
    }

    /// The full scale window `[lo of last band, hi of first band]`.
    pub fn window(&self) -> Option<(f64, f64)> {
        Some((self.blocks.last()?.lo, self.blocks.first()?.hi))
    }

    pub fn validate(&self) -> Vec<Violation> {
        let mut out = Vec::new();
        if !self.center.is_finite() {
            out.push(Violation::new("center", "must be finite"));
        }
        if !(self.mass > 0.0) || !self.mass.is_finite() {
            out.push(Violation::new("mass", format!("must be positive, got {}", self.mass)));
        }
        if self.atoms_per_decade == 0 {
            out.push(Violation::new("atoms_per_decade", "must be positive"));
        }
        if self.blocks.is_empty() {
            out.push(Violation::new("blocks", "at least one block is required"));
        }
        for (k, b) in self.blocks.iter().enumerate() {
            let path = |f: &str| format!("blocks[{k}].{f}");
            if !(b.lo > 0.0 && b.lo < b.hi && b.hi.is_finite()) {
                out.push(Violation::new(
                    path("lo"),
                    format!("need 0 < lo < hi, got [{}, {}]", b.lo, b.hi),
                ));
            }
            if b.lo < MIN_BAND_SCALE {
                out.push(Violation::new(
                    path("lo"),
                    format!("scales below {MIN_BAND_SCALE:e} are not supported"),
                ));
            }
            if !(b.slope >= 0.0) || !b.slope.is_finite() {
                out.push(Violation::new(
                    path("slope"),
                    format!("must be finite and nonnegative, got {}", b.slope),
                ));
            }
            if self.center != 0.0 && b.lo < 1e-13 * self.center.abs() {
                out.push(Violation::new(
                    path("lo"),
                    format!("scale {:e} is not resolvable next to center {}", b.lo, self.center),
                ));
            }
            if k > 0 {
                let prev = &self.blocks[k - 1];
                if b.hi > prev.lo {
                    out.push(Violation::new(
                        path("hi"),
                        format!(
                            "bands must be disjoint and decreasing, {} exceeds previous lo {}",
                            b.hi, prev.lo
                        ),
                    ));
                }
                if b.is_low() == prev.is_low() {
                    out.push(Violation::new(
                        path("slope"),
                        format!("slopes must alternate low/high, got {} after {}", b.slope, prev.slope),
                    ));
                }
            }
        }
        out
    }
}

/// Emits the atom ladder of an [`OscillationPlan`].
pub fn oscillating_measure(p: &OscillationPlan) -> Result<AtomicMeasure> {
    first_violation("oscillating_measure", p.validate())?;
    let per_decade = p.atoms_per_decade as f64;
    let mut atoms: Vec<(f64, f64)> = Vec::new();
    let mut enclosed = p.mass;
    for (k, b) in p.blocks.iter().enumerate() {
        let steps = ((b.hi / b.lo).log10() * per_decade + 1e-9).floor() as usize;
        if b.slope == 0.0 || steps == 0 {
            continue;
        }
        let radius = |i: usize| b.hi * 10f64.powf(-(i as f64) / per_decade);
        let profile = |r: f64| enclosed * (r / b.hi).powf(b.slope);
        let mut outer = profile(radius(0));
        for i in 0..steps {
            let r = radius(i);
            let inner = profile(radius(i + 1));
            let w = outer - inner;
            if w < MIN_LADDER_WEIGHT {
                return Err(Error::validation(
                    Origin::Constructors,
                    format!(
                        "oscillating_measure: block {k} ([{:e}, {:e}], slope {}) needs weight {w:e} below {MIN_LADDER_WEIGHT:e}",
                        b.lo, b.hi, b.slope
                    ),
                ));
            }
            atoms.push((p.center + r, w));
            outer = inner;
        }
        enclosed = outer;
    }
    if enclosed < MIN_LADDER_WEIGHT {
        return Err(Error::validation(
            Origin::Constructors,
            format!(
                "oscillating_measure: block {} leaves a core mass {enclosed:e} below {MIN_LADDER_WEIGHT:e}",
                p.blocks.len() - 1
            ),
        ));
    }
    atoms.push((p.center, enclosed));
    AtomicMeasure::from_atoms(atoms)
}
