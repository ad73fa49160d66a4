use std::io::Write;
use std::path::Path;

use crate::error::{Error, Origin, Result};
use crate::numeric::neumaier_sum;

/// Relative separation below which two positions are treated as one atom.
pub const MERGE_RELATIVE: f64 = 1e-15;

/// Open ball `B(x; ε) = (x − ε, x + ε)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BallQuery {
    center: f64,
    radius: f64,
}

impl BallQuery {
    pub fn new(center: f64, radius: f64) -> Result<Self> {
        if !center.is_finite() {
            return Err(Error::validation(Origin::Measure, "ball center must be finite"));
        }
        if !(radius > 0.0) {
            return Err(Error::validation(
                Origin::Measure,
                format!("ball radius must be > 0, got {radius}"),
            ));
        }
        Ok(BallQuery { center, radius })
    }

    pub fn center(&self) -> f64 {
        self.center
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }
}

/// A finite positive measure supported on finitely many points.
///
/// Positions are strictly increasing; every stored weight is positive. A
/// measure with no atoms is representable (for example after restriction) and
/// reports itself as degenerate.
#[derive(Debug, Clone, PartialEq)]
pub struct AtomicMeasure {
    positions: Vec<f64>,
    weights: Vec<f64>,
    total_mass: f64,
}

impl AtomicMeasure {
    /// Builds a measure from `(position, weight)` pairs in any order.
    ///
    /// Zero weights are dropped, coincident positions (within
    /// [`MERGE_RELATIVE`]) are merged by adding their weights and keeping the
    /// leftmost position.
    pub fn from_atoms<I>(atoms: I) -> Result<Self>
    where
        I: IntoIterator<Item = (f64, f64)>,
    {
        let mut raw: Vec<(f64, f64)> = Vec::new();
        for (x, w) in atoms {
            if !x.is_finite() {
                return Err(Error::validation(
                    Origin::Measure,
                    format!("atom position must be finite, got {x}"),
                ));
            }
            if !w.is_finite() || w < 0.0 {
                return Err(Error::validation(
                    Origin::Measure,
                    format!("atom weight must be finite and nonnegative, got {w} at {x}"),
                ));
            }
            if w > 0.0 {
                raw.push((x, w));
            }
        }
        raw.sort_by(|a, b| a.0.total_cmp(&b.0));

        let mut positions: Vec<f64> = Vec::with_capacity(raw.len());
        let mut weights: Vec<f64> = Vec::with_capacity(raw.len());
        for (x, w) in raw {
            match positions.last() {
                Some(&last) if coincident(last, x) => {
                    *weights.last_mut().expect("parallel vectors") += w;
                }
                _ => {
                    positions.push(x);
                    weights.push(w);
                }
            }
        }
        let total_mass = neumaier_sum(weights.iter().copied());
        Ok(AtomicMeasure {
            positions,
            weights,
            total_mass,
        })
    }

    /// Builds a measure from already sorted, already merged atoms.
    pub(crate) fn from_sorted_unchecked(positions: Vec<f64>, weights: Vec<f64>) -> Self {
        debug_assert_eq!(positions.len(), weights.len());
        debug_assert!(positions.windows(2).all(|p| p[0] < p[1]));
        let total_mass = neumaier_sum(weights.iter().copied());
        AtomicMeasure {
            positions,
            weights,
            total_mass,
        }
    }

    pub fn point_mass(position: f64, weight: f64) -> Result<Self> {
        Self::from_atoms([(position, weight)])
    }

    pub fn empty() -> Self {
        AtomicMeasure {
            positions: Vec::new(),
            weights: Vec::new(),
            total_mass: 0.0,
        }
    }

    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }

    /// True when the measure carries no mass.
    pub fn is_degenerate(&self) -> bool {
        !(self.total_mass > 0.0)
    }

    pub fn positions(&self) -> &[f64] {
        &self.positions
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn atoms(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.positions.iter().copied().zip(self.weights.iter().copied())
    }

    pub fn total_mass(&self) -> f64 {
        self.total_mass
    }

    /// `Σ w_j²`, the limit of the time-averaged return probability.
    pub fn sum_of_squares(&self) -> f64 {
        neumaier_sum(self.weights.iter().map(|w| w * w))
    }

    /// Smallest distance between neighbouring atoms, `None` with fewer than two.
    pub fn min_gap(&self) -> Option<f64> {
        self.positions
            .windows(2)
            .map(|p| p[1] - p[0])
            .min_by(|a, b| a.total_cmp(b))
    }

    /// Sup distance between the normalized distribution functions.
    pub fn cdf_distance(&self, other: &AtomicMeasure) -> f64 {
        let (ma, mb) = (self.total_mass, other.total_mass);
        let (mut i, mut j) = (0, 0);
        let (mut fa, mut fb) = (0.0, 0.0);
        let mut worst = 0.0_f64;
        while i < self.len() || j < other.len() {
            let x = match (self.positions.get(i), other.positions.get(j)) {
                (Some(&a), Some(&b)) => a.min(b),
                (Some(&a), None) => a,
                (None, Some(&b)) => b,
                (None, None) => unreachable!(),
            };
            while i < self.len() && self.positions[i] == x {
                fa += self.weights[i];
                i += 1;
            }
            while j < other.len() && other.positions[j] == x {
                fb += other.weights[j];
                j += 1;
            }
            worst = worst.max((fa / ma - fb / mb).abs());
        }
        worst
    }

    pub fn support_bounds(&self) -> Option<(f64, f64)> {
        Some((*self.positions.first()?, *self.positions.last()?))
    }

    /// Index range of atoms with `|position − x| < ε`.
    pub(crate) fn ball_range(&self, center: f64, radius: f64) -> std::ops::Range<usize> {
        let p = &self.positions;
        let lo = p.partition_point(|&y| y <= center && center - y >= radius);
        let hi = p.partition_point(|&y| y < center || y - center < radius);
        lo..hi.max(lo)
    }

    /// `μ(B(x; ε))` summed directly over the atoms inside the open ball.
    pub fn ball_mass(&self, query: BallQuery) -> f64 {
        let range = self.ball_range(query.center, query.radius);
        self.weights[range].iter().sum()
    }

    /// `∫ e^{−2t|x−y|} dμ(y)`.
    pub fn laplace_transform(&self, x: f64, t: f64) -> f64 {
        debug_assert!(t > 0.0);
        self.atoms().map(|(y, w)| w * (-2.0 * t * (x - y).abs()).exp()).sum()
    }

    /// Removes every atom lying strictly inside one of the open intervals.
    pub fn restrict(&self, excluded: &[(f64, f64)]) -> Result<AtomicMeasure> {
        for &(a, b) in excluded {
            if !(a < b) {
                return Err(Error::validation(
                    Origin::Measure,
                    format!("excluded interval ({a}, {b}) is not well formed"),
                ));
            }
        }
        let (positions, weights): (Vec<f64>, Vec<f64>) = self
            .atoms()
            .filter(|&(y, _)| !excluded.iter().any(|&(a, b)| a < y && y < b))
            .unzip();
        Ok(Self::from_sorted_unchecked(positions, weights))
    }

    /// Weighted sum `Σ c_i μ_i`; atoms at shared positions are merged.
    pub fn mix(parts: &[(&AtomicMeasure, f64)]) -> Result<AtomicMeasure> {
        if parts.is_empty() {
            return Err(Error::validation(Origin::Measure, "mixture needs at least one part"));
        }
        for (i, &(_, c)) in parts.iter().enumerate() {
            if !(c > 0.0) || !c.is_finite() {
                return Err(Error::validation(
                    Origin::Measure,
                    format!("mixture coefficient {i} must be positive and finite, got {c}"),
                ));
            }
        }
        AtomicMeasure::from_atoms(parts.iter().flat_map(|&(m, c)| m.atoms().map(move |(y, w)| (y, c * w))))
    }

    /// Multiplies every weight by `factor > 0`.
    pub fn scaled(&self, factor: f64) -> Result<AtomicMeasure> {
        AtomicMeasure::mix(&[(self, factor)])
    }

    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(writer);
        out.write_record(["position", "weight"])?;
        for atom in self.atoms() {
            out.serialize(atom)?;
        }
        out.flush()?;
        Ok(())
    }

    pub fn save_csv(&self, path: &Path) -> Result<()> {
        let file = std::fs::File::create(path)?;
        self.write_csv(std::io::BufWriter::new(file))
    }
}

fn coincident(a: f64, b: f64) -> bool {
    b - a <= MERGE_RELATIVE * a.abs().max(b.abs())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn two_atoms() -> AtomicMeasure {
        AtomicMeasure::from_atoms([(0.0, 1.0), (2.0, 1.0)]).unwrap()
    }

    #[test]
    fn construction_sorts_and_merges() {
        let m = AtomicMeasure::from_atoms([(1.0, 0.25), (0.0, 0.5), (1.0, 0.25), (3.0, 0.0)]).unwrap();
        assert_eq!(m.positions(), &[0.0, 1.0]);
        assert_eq!(m.weights(), &[0.5, 0.5]);
        assert_eq!(m.total_mass(), 1.0);
    }

    #[test]
    fn near_coincident_positions_merge() {
        let m = AtomicMeasure::from_atoms([(1.0, 1.0), (1.0 + 1e-16, 1.0)]).unwrap();
        assert_eq!(m.len(), 1);
        assert_eq!(m.total_mass(), 2.0);
        // tiny but well separated offsets around zero stay distinct
        let m = AtomicMeasure::from_atoms([(0.0, 1.0), (1e-300, 1.0), (2e-300, 1.0)]).unwrap();
        assert_eq!(m.len(), 3);
    }

    #[test]
    fn rejects_negative_weight() {
        let err = AtomicMeasure::from_atoms([(0.0, -1.0)]).unwrap_err();
        assert!(matches!(err, Error::Validation { .. }));
    }

    #[test]
    fn ball_mass_single_atom() {
        let m = AtomicMeasure::point_mass(0.0, 1.0).unwrap();
        assert_eq!(m.ball_mass(BallQuery::new(0.0, 0.1).unwrap()), 1.0);
        assert_eq!(m.ball_mass(BallQuery::new(1.0, 0.5).unwrap()), 0.0);
    }

    #[test]
    fn ball_is_open() {
        let m = two_atoms();
        assert_eq!(m.ball_mass(BallQuery::new(1.0, 1.0).unwrap()), 0.0);
        assert_eq!(m.ball_mass(BallQuery::new(1.0, 1.0000001).unwrap()), 2.0);
        assert_eq!(m.ball_mass(BallQuery::new(0.0, 2.0).unwrap()), 1.0);
    }

    #[test]
    fn ball_query_rejects_nonpositive_radius() {
        assert!(BallQuery::new(0.0, 0.0).is_err());
        assert!(BallQuery::new(0.0, -1.0).is_err());
    }

    #[test]
    fn laplace_point_mass_and_single_term() {
        let m = AtomicMeasure::point_mass(0.3, 0.7).unwrap();
        assert_eq!(m.laplace_transform(0.3, 12.0), 0.7);
        let t = 2.5;
        let d = 0.4;
        let v = m.laplace_transform(0.3 + d, t);
        assert!((v - 0.7 * (-2.0 * t * d).exp()).abs() < 1e-15);
        // far atoms underflow to zero instead of producing NaN
        assert_eq!(m.laplace_transform(1e3, 1e308), 0.0);
    }

    #[test]
    fn restrict_examples() {
        let m = two_atoms();
        let r = m.restrict(&[(-0.5, 0.5)]).unwrap();
        assert_eq!(r.positions(), &[2.0]);
        assert_eq!(r.total_mass(), 1.0);

        let single = AtomicMeasure::point_mass(0.0, 1.0).unwrap();
        assert_eq!(single.restrict(&[(1.0, 2.0)]).unwrap(), single);

        let gone = single.restrict(&[(-1.0, 1.0)]).unwrap();
        assert!(gone.is_degenerate());
        assert!(gone.is_empty());
        assert!(single.restrict(&[(1.0, 1.0)]).is_err());
    }

    #[test]
    fn restrict_keeps_endpoints_and_punctured_center() {
        let m = AtomicMeasure::from_atoms([(-1.0, 1.0), (-0.5, 1.0), (0.0, 1.0), (0.5, 1.0), (1.0, 1.0)]).unwrap();
        let r = m.restrict(&[(-1.0, 0.0), (0.0, 1.0)]).unwrap();
        assert_eq!(r.positions(), &[-1.0, 0.0, 1.0]);
    }

    #[test]
    fn mix_examples() {
        let delta = AtomicMeasure::point_mass(0.0, 1.0).unwrap();
        let half = AtomicMeasure::mix(&[(&delta, 0.5)]).unwrap();
        assert_eq!(half.weights(), &[0.5]);

        let doubled = AtomicMeasure::mix(&[(&delta, 1.0), (&delta, 1.0)]).unwrap();
        assert_eq!(doubled.len(), 1);
        assert_eq!(doubled.total_mass(), 2.0);

        assert!(AtomicMeasure::mix(&[]).is_err());
        assert!(AtomicMeasure::mix(&[(&delta, 0.0)]).is_err());
    }

    #[test]
    fn csv_export() {
        let mut buf = Vec::new();
        two_atoms().write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text, "position,weight\n0.0,1.0\n2.0,1.0\n");
    }

    #[test]
    fn cdf_distance_normalizes_and_merges_positions() {
        let a = two_atoms();
        assert_eq!(a.cdf_distance(&a.scaled(3.0).unwrap()), 0.0);
        let b = AtomicMeasure::from_atoms([(0.0, 1.0), (1.0, 1.0), (2.0, 2.0)]).unwrap();
        // F_a jumps to 1/2 at 0 and 1 at 2; F_b is 1/4, 1/2, 1
        assert_eq!(a.cdf_distance(&b), 0.25);
        assert_eq!(b.cdf_distance(&a), 0.25);
    }
}
