use serde::{Deserialize, Serialize};

use super::AtomicMeasure;
use crate::error::{Error, Origin, Result, Violation};

/// Default ceiling on the number of atoms a refinement may produce.
pub const DEFAULT_ATOM_CAP: usize = 1 << 22;

/// Tolerance on `Σ p_i = 1` for self-similar measures.
const PROBABILITY_SUM_TOL: f64 = 1e-12;

/// Declarative description of a measure, refinable to atoms at any level.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum MeasureSpec {
    /// A fixed list of `(position, weight)` atoms; refinement is the identity.
    ExplicitAtoms { atoms: Vec<(f64, f64)> },
    /// A density on `[a, b]`, discretized into `2^level` equal cells whose
    /// exact masses sit at the cell midpoints.
    DensityOnInterval {
        density: Density,
        interval: (f64, f64),
        #[serde(default = "unit_mass")]
        mass: f64,
    },
    /// Invariant measure of an iterated function system of similitudes.
    SelfSimilar(SelfSimilar),
    /// The base measure with every atom strictly inside an excluded interval removed.
    Restricted {
        base: Box<MeasureSpec>,
        excluded: Vec<(f64, f64)>,
    },
    /// `Σ c_i μ_i`.
    Mixture { parts: Vec<MixturePart> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MixturePart {
    pub spec: MeasureSpec,
    pub coefficient: f64,
}

/// Shape of a normalized density on `[a, b]` (with `u = (x − a)/(b − a)`).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "shape", rename_all = "snake_case", deny_unknown_fields)]
pub enum Density {
    Uniform,
    /// Density proportional to `u^exponent`, `exponent > −1`.
    Power {
        exponent: f64,
    },
    /// Density proportional to `1/√(u(1 − u))`.
    Arcsine,
}

impl Density {
    /// Cumulative distribution on `u ∈ [0, 1]`.
    fn cdf(&self, u: f64) -> f64 {
        let u = u.clamp(0.0, 1.0);
        match *self {
            Density::Uniform => u,
            Density::Power { exponent } => u.powf(exponent + 1.0),
            Density::Arcsine => std::f64::consts::FRAC_2_PI * u.sqrt().asin(),
        }
    }
}

/// Affine contraction `x ↦ ratio·x + shift`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Similitude {
    pub ratio: f64,
    pub shift: f64,
}

impl Similitude {
    fn apply(&self, x: f64) -> f64 {
        self.ratio * x + self.shift
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SelfSimilar {
    pub maps: Vec<Similitude>,
    pub probabilities: Vec<f64>,
    pub interval: (f64, f64),
    #[serde(default = "unit_mass")]
    pub mass: f64,
}

fn unit_mass() -> f64 {
    1.0
}

impl MeasureSpec {
    /// Middle-thirds Cantor measure on `[0, 1]` with equal weights.
    pub fn cantor() -> Self {
        MeasureSpec::SelfSimilar(SelfSimilar {
            maps: vec![
                Similitude {
                    ratio: 1.0 / 3.0,
                    shift: 0.0,
                },
                Similitude {
                    ratio: 1.0 / 3.0,
                    shift: 2.0 / 3.0,
                },
            ],
            probabilities: vec![0.5, 0.5],
            interval: (0.0, 1.0),
            mass: 1.0,
        })
    }

    /// Lebesgue measure on `[a, b]` scaled to unit mass.
    pub fn uniform(a: f64, b: f64) -> Self {
        MeasureSpec::DensityOnInterval {
            density: Density::Uniform,
            interval: (a, b),
            mass: 1.0,
        }
    }

    /// Mass the refined measure should carry, when it is known a priori.
    pub fn expected_mass(&self) -> Option<f64> {
        match self {
            MeasureSpec::ExplicitAtoms { atoms } => Some(atoms.iter().map(|a| a.1).sum()),
            MeasureSpec::DensityOnInterval { mass, .. } => Some(*mass),
            MeasureSpec::SelfSimilar(s) => Some(s.mass),
            MeasureSpec::Restricted { .. } => None,
            MeasureSpec::Mixture { parts } => parts
                .iter()
                .map(|p| p.spec.expected_mass().map(|m| m * p.coefficient))
                .sum(),
        }
    }

    /// Number of atoms produced at `level` (before merging), saturating.
    pub fn atom_count(&self, level: u32) -> usize {
        match self {
            MeasureSpec::ExplicitAtoms { atoms } => atoms.len(),
            MeasureSpec::DensityOnInterval { .. } => 1usize.checked_shl(level).unwrap_or(usize::MAX),
            MeasureSpec::SelfSimilar(s) => s.maps.len().checked_pow(level).unwrap_or(usize::MAX),
            MeasureSpec::Restricted { base, .. } => base.atom_count(level),
            MeasureSpec::Mixture { parts } => parts
                .iter()
                .fold(0usize, |acc, p| acc.saturating_add(p.spec.atom_count(level))),
        }
    }

    /// Every violated constraint, with a path relative to this spec.
    pub fn validate(&self) -> Vec<Violation> {
        let mut out = Vec::new();
        match self {
            MeasureSpec::ExplicitAtoms { atoms } => {
                if atoms.is_empty() {
                    out.push(Violation::new("atoms", "at least one atom is required"));
                }
                for (i, &(x, w)) in atoms.iter().enumerate() {
                    if !x.is_finite() {
                        out.push(Violation::new(format!("atoms[{i}]"), "position must be finite"));
                    }
                    if !(w > 0.0) || !w.is_finite() {
                        out.push(Violation::new(format!("atoms[{i}]"), "weight must be positive"));
                    }
                }
            }
            MeasureSpec::DensityOnInterval {
                density,
                interval: (a, b),
                mass,
            } => {
                if !(a < b) || !a.is_finite() || !b.is_finite() {
                    out.push(Violation::new("interval", "need finite a < b"));
                }
                if !(*mass > 0.0) || !mass.is_finite() {
                    out.push(Violation::new("mass", "must be positive"));
                }
                if let Density::Power { exponent } = density {
                    if !(*exponent > -1.0) || !exponent.is_finite() {
                        out.push(Violation::new("density.exponent", "must be finite and > -1"));
                    }
                }
            }
            MeasureSpec::SelfSimilar(s) => s.validate_into(&mut out),
            MeasureSpec::Restricted { base, excluded } => {
                out.extend(base.validate().into_iter().map(|v| v.nested("base")));
                for (i, &(a, b)) in excluded.iter().enumerate() {
                    if !(a < b) {
                        out.push(Violation::new(format!("excluded[{i}]"), "need a < b"));
                    }
                }
            }
            MeasureSpec::Mixture { parts } => {
                if parts.is_empty() {
                    out.push(Violation::new("parts", "at least one part is required"));
                }
                for (i, part) in parts.iter().enumerate() {
                    if !(part.coefficient > 0.0) || !part.coefficient.is_finite() {
                        out.push(Violation::new(format!("parts[{i}].coefficient"), "must be positive"));
                    }
                    out.extend(
                        part.spec
                            .validate()
                            .into_iter()
                            .map(|v| v.nested(&format!("parts[{i}].spec"))),
                    );
                }
            }
        }
        out
    }
}

impl SelfSimilar {
    fn validate_into(&self, out: &mut Vec<Violation>) {
        let (a, b) = self.interval;
        if self.maps.is_empty() {
            out.push(Violation::new("maps", "at least one map is required"));
        }
        if self.maps.len() != self.probabilities.len() {
            out.push(Violation::new(
                "probabilities",
                format!(
                    "expected {} probabilities, got {}",
                    self.maps.len(),
                    self.probabilities.len()
                ),
            ));
        }
        if !(a < b) {
            out.push(Violation::new("interval", "need a < b"));
        }
        if !(self.mass > 0.0) || !self.mass.is_finite() {
            out.push(Violation::new("mass", "must be positive"));
        }
        for (i, m) in self.maps.iter().enumerate() {
            if !(m.ratio > 0.0 && m.ratio < 1.0) {
                out.push(Violation::new(format!("maps[{i}].ratio"), "must lie in (0, 1)"));
            }
            if !m.shift.is_finite() {
                out.push(Violation::new(format!("maps[{i}].shift"), "must be finite"));
            }
        }
        for (i, &p) in self.probabilities.iter().enumerate() {
            if !(p > 0.0) {
                out.push(Violation::new(format!("probabilities[{i}]"), "must be positive"));
            }
        }
        let total: f64 = self.probabilities.iter().sum();
        if (total - 1.0).abs() > PROBABILITY_SUM_TOL {
            out.push(Violation::new("probabilities", format!("must sum to 1, got {total}")));
        }

        if a < b {
            let mut images: Vec<(usize, f64, f64)> = self
                .maps
                .iter()
                .enumerate()
                .map(|(i, m)| (i, m.apply(a), m.apply(b)))
                .collect();
            for &(i, lo, hi) in &images {
                if lo < a || hi > b {
                    out.push(Violation::new(
                        format!("maps[{i}]"),
                        format!("image [{lo}, {hi}] leaves the interval [{a}, {b}]"),
                    ));
                }
            }
            images.sort_by(|x, y| x.1.total_cmp(&y.1));
            for pair in images.windows(2) {
                if !(pair[0].2 < pair[1].1) {
                    out.push(Violation::new(
                        "maps",
                        format!(
                            "images of maps[{}] and maps[{}] overlap (open set condition)",
                            pair[0].0, pair[1].0
                        ),
                    ));
                }
            }
        }
    }
}

/// Discretizes `spec` at `level` using [`DEFAULT_ATOM_CAP`].
pub fn refine(spec: &MeasureSpec, level: u32) -> Result<AtomicMeasure> {
    refine_with_cap(spec, level, DEFAULT_ATOM_CAP)
}

pub fn refine_with_cap(spec: &MeasureSpec, level: u32, atom_cap: usize) -> Result<AtomicMeasure> {
    if level == 0 {
        return Err(Error::validation(Origin::Measure, "refinement level must be positive"));
    }
    if let Some(v) = spec.validate().into_iter().next() {
        return Err(Error::validation(Origin::Measure, v.to_string()));
    }
    let count = spec.atom_count(level);
    if count > atom_cap {
        return Err(Error::resource(
            Origin::Measure,
            format!("level {level} would produce {count} atoms, cap is {atom_cap}"),
        ));
    }
    refine_unchecked(spec, level)
}

fn refine_unchecked(spec: &MeasureSpec, level: u32) -> Result<AtomicMeasure> {
    match spec {
        MeasureSpec::ExplicitAtoms { atoms } => AtomicMeasure::from_atoms(atoms.iter().copied()),
        MeasureSpec::DensityOnInterval {
            density,
            interval: (a, b),
            mass,
        } => {
            let cells = 1usize << level;
            let h = (b - a) / cells as f64;
            let inv = 1.0 / cells as f64;
            let atoms = (0..cells).map(|k| {
                let lo = density.cdf(k as f64 * inv);
                let hi = density.cdf((k + 1) as f64 * inv);
                (a + (k as f64 + 0.5) * h, mass * (hi - lo))
            });
            AtomicMeasure::from_atoms(atoms)
        }
        MeasureSpec::SelfSimilar(s) => {
            let mid = 0.5 * (s.interval.0 + s.interval.1);
            let mut atoms = vec![(mid, s.mass)];
            for _ in 0..level {
                atoms = s
                    .maps
                    .iter()
                    .zip(&s.probabilities)
                    .flat_map(|(m, &p)| atoms.iter().map(move |&(x, w)| (m.apply(x), w * p)))
                    .collect();
            }
            AtomicMeasure::from_atoms(atoms)
        }
        MeasureSpec::Restricted { base, excluded } => refine_unchecked(base, level)?.restrict(excluded),
        MeasureSpec::Mixture { parts } => {
            let refined = parts
                .iter()
                .map(|p| refine_unchecked(&p.spec, level).map(|m| (m, p.coefficient)))
                .collect::<Result<Vec<_>>>()?;
            let borrowed: Vec<(&AtomicMeasure, f64)> = refined.iter().map(|(m, c)| (m, *c)).collect();
            AtomicMeasure::mix(&borrowed)
        }
    }
}
