//! Time-averaged return probability
//! `W(t) = (1/t) ∫₀ᵗ |⟨ψ, e^{−isT}ψ⟩|² ds` evaluated from the spectral measure.
//!
//! Writing `μ̂(s) = Σ_j w_j e^{−isx_j}` and integrating term by term gives the
//! closed form `W(t) = Σ_{j,k} w_j w_k sinc(t(x_j − x_k))`, with `sinc(0) = 1`.
//! No time stepping is needed once the measure is known.

use std::collections::BTreeMap;
use std::io::Write;
use std::path::Path;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Origin, Result};
use crate::measure::AtomicMeasure;
use crate::numeric::{geometric_grid, pairwise_sum};

/// Default limit on `n²` for the exact double sum.
pub const DEFAULT_PAIR_BUDGET: u64 = 10_000_000_000;

/// What a [`LogSeries`] samples.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SeriesKind {
    /// `W(t)` on a time grid.
    ReturnProbability,
    /// `μ(B(x; ε))` on a scale grid.
    BallMass,
    /// `∫ e^{−2t|x−y|} dμ(y)` on a time grid.
    Laplace,
    /// Partition sums `∫ μ(B(y; ε))^{q−1} dμ(y)` on a scale grid.
    PartitionSum,
    /// Anything else (synthetic fixtures, moduli).
    Other,
}

impl SeriesKind {
    fn column_names(self) -> [&'static str; 2] {
        match self {
            SeriesKind::ReturnProbability => ["t", "W"],
            SeriesKind::Laplace => ["t", "laplace"],
            SeriesKind::BallMass => ["epsilon", "ball_mass"],
            SeriesKind::PartitionSum => ["epsilon", "partition_sum"],
            SeriesKind::Other => ["grid", "value"],
        }
    }
}

/// A positive quantity sampled on a strictly increasing positive grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LogSeries {
    grid: Vec<f64>,
    #[serde(with = "crate::serde_float::vec")]
    values: Vec<f64>,
    kind: SeriesKind,
    /// Parameters that produced the series, in a fixed key order.
    pub provenance: BTreeMap<String, serde_json::Value>,
}

impl LogSeries {
    pub fn new(grid: Vec<f64>, values: Vec<f64>, kind: SeriesKind) -> Result<Self> {
        if grid.len() != values.len() {
            return Err(Error::validation(
                Origin::Dynamics,
                format!("grid has {} points but {} values", grid.len(), values.len()),
            ));
        }
        if grid.iter().any(|&g| !(g > 0.0) || !g.is_finite()) {
            return Err(Error::validation(
                Origin::Dynamics,
                "grid points must be positive and finite",
            ));
        }
        if grid.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(Error::validation(Origin::Dynamics, "grid must be strictly increasing"));
        }
        if values.iter().any(|&v| !(v >= 0.0)) {
            return Err(Error::validation(Origin::Dynamics, "values must be nonnegative"));
        }
        Ok(LogSeries {
            grid,
            values,
            kind,
            provenance: BTreeMap::new(),
        })
    }

    pub fn with_provenance(mut self, key: &str, value: impl Serialize) -> Self {
        let value = serde_json::to_value(value).unwrap_or(serde_json::Value::Null);
        self.provenance.insert(key.to_string(), value);
        self
    }

    pub fn grid(&self) -> &[f64] {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn kind(&self) -> SeriesKind {
        self.kind
    }

    pub fn len(&self) -> usize {
        self.grid.len()
    }

    pub fn is_empty(&self) -> bool {
        self.grid.is_empty()
    }

    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(writer);
        out.write_record(self.kind.column_names())?;
        for pair in self.grid.iter().zip(&self.values) {
            out.serialize(pair)?;
        }
        out.flush()?;
        Ok(())
    }

    pub fn save_csv(&self, path: &Path) -> Result<()> {
        let file = std::fs::File::create(path)?;
        self.write_csv(std::io::BufWriter::new(file))
    }
}

/// `μ̂(s) = Σ_j w_j e^{−isx_j}`.
pub fn autocorrelation(mu: &AtomicMeasure, s: f64) -> Complex64 {
    mu.atoms()
        .map(|(x, w)| Complex64::from_polar(w, -s * x))
        .fold(Complex64::new(0.0, 0.0), |acc, z| acc + z)
}

fn sinc(u: f64) -> f64 {
    if u == 0.0 {
        1.0
    } else {
        u.sin() / u
    }
}

/// Controls for the `O(n²)` evaluation of `W(t)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReturnProbabilityOptions {
    /// Largest `n²` evaluated without truncation.
    pub pair_budget: u64,
    /// When set, pairs with `t|x_j − x_k| > u_max` are skipped; each skipped
    /// pair contributes at most `w_j w_k / u_max` in absolute value.
    pub truncate_beyond: Option<f64>,
}

impl Default for ReturnProbabilityOptions {
    fn default() -> Self {
        ReturnProbabilityOptions {
            pair_budget: DEFAULT_PAIR_BUDGET,
            truncate_beyond: None,
        }
    }
}

/// `W(t)` together with an upper bound on the truncation error (0 when exact).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReturnProbability {
    pub value: f64,
    pub truncation_bound: f64,
}

/// `W(t)` by the exact double sum.
pub fn return_probability_avg(mu: &AtomicMeasure, t: f64) -> Result<f64> {
    Ok(return_probability_with(mu, t, &ReturnProbabilityOptions::default())?.value)
}

pub fn return_probability_with(
    mu: &AtomicMeasure,
    t: f64,
    opts: &ReturnProbabilityOptions,
) -> Result<ReturnProbability> {
    if !(t > 0.0) || !t.is_finite() {
        return Err(Error::validation(
            Origin::Dynamics,
            format!("time must be positive, got {t}"),
        ));
    }
    let n = mu.len() as u64;
    let x = mu.positions();
    let w = mu.weights();

    match opts.truncate_beyond {
        None => {
            if n.saturating_mul(n) > opts.pair_budget {
                return Err(Error::resource(
                    Origin::Dynamics,
                    format!(
                        "{n} atoms need {} pair evaluations, budget is {}; enable truncation or raise the budget",
                        n.saturating_mul(n),
                        opts.pair_budget
                    ),
                ));
            }
            let rows: Vec<f64> = (0..x.len())
                .into_par_iter()
                .map(|j| {
                    let (xj, wj) = (x[j], w[j]);
                    let off: f64 = x[j + 1..]
                        .iter()
                        .zip(&w[j + 1..])
                        .map(|(&xk, &wk)| wk * sinc(t * (xk - xj)))
                        .sum();
                    wj * (wj + 2.0 * off)
                })
                .collect();
            Ok(ReturnProbability {
                value: pairwise_sum(&rows),
                truncation_bound: 0.0,
            })
        }
        Some(u_max) => {
            if !(u_max > 0.0) {
                return Err(Error::validation(
                    Origin::Dynamics,
                    "truncation threshold must be positive",
                ));
            }
            let mut suffix = vec![0.0; x.len() + 1];
            for j in (0..x.len()).rev() {
                suffix[j] = suffix[j + 1] + w[j];
            }
            let reach = u_max / t;
            let rows: Vec<(f64, f64)> = (0..x.len())
                .into_par_iter()
                .map(|j| {
                    let (xj, wj) = (x[j], w[j]);
                    let end = j + 1 + x[j + 1..].partition_point(|&xk| xk - xj <= reach);
                    let near: f64 = x[j + 1..end]
                        .iter()
                        .zip(&w[j + 1..end])
                        .map(|(&xk, &wk)| wk * sinc(t * (xk - xj)))
                        .sum();
                    (wj * (wj + 2.0 * near), 2.0 * wj * suffix[end])
                })
                .collect();
            let values: Vec<f64> = rows.iter().map(|r| r.0).collect();
            let dropped: Vec<f64> = rows.iter().map(|r| r.1).collect();
            Ok(ReturnProbability {
                value: pairwise_sum(&values),
                truncation_bound: pairwise_sum(&dropped) / u_max,
            })
        }
    }
}

/// `W` on an explicit time grid; grid points are evaluated independently.
pub fn sample_w_on(mu: &AtomicMeasure, grid: Vec<f64>, opts: &ReturnProbabilityOptions) -> Result<LogSeries> {
    let values = grid
        .par_iter()
        .map(|&t| return_probability_with(mu, t, opts).map(|r| r.value))
        .collect::<Result<Vec<f64>>>()?;
    // rounding can push W a hair below zero when it is at the 1e-17 level
    let values = values.into_iter().map(|v| v.max(0.0)).collect();
    Ok(LogSeries::new(grid, values, SeriesKind::ReturnProbability)?
        .with_provenance("atoms", mu.len())
        .with_provenance("total_mass", mu.total_mass()))
}

/// `W` on `points` geometrically spaced times from `t_min` to `t_max`.
pub fn sample_w(mu: &AtomicMeasure, t_min: f64, t_max: f64, points: usize) -> Result<LogSeries> {
    check_time_grid(t_min, t_max, points)?;
    sample_w_on(
        mu,
        geometric_grid(t_min, t_max, points),
        &ReturnProbabilityOptions::default(),
    )
}

pub(crate) fn check_time_grid(t_min: f64, t_max: f64, points: usize) -> Result<()> {
    if !(t_min > 0.0 && t_min < t_max && t_max.is_finite()) {
        return Err(Error::validation(
            Origin::Dynamics,
            format!("need 0 < t_min < t_max, got [{t_min}, {t_max}]"),
        ));
    }
    if points < 2 {
        return Err(Error::validation(
            Origin::Dynamics,
            "a time grid needs at least 2 points",
        ));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measure::{refine, MeasureSpec};
    use std::f64::consts::PI;

    fn pair() -> AtomicMeasure {
        AtomicMeasure::from_atoms([(0.0, 0.5), (1.0, 0.5)]).unwrap()
    }

    #[test]
    fn autocorrelation_examples() {
        let single = AtomicMeasure::point_mass(0.37, 1.0).unwrap();
        assert!((autocorrelation(&single, 12.3).norm() - 1.0).abs() < 1e-15);
        let m = AtomicMeasure::from_atoms([(0.0, 0.25), (2.0, 0.5)]).unwrap();
        assert_eq!(autocorrelation(&m, 0.0), Complex64::new(0.75, 0.0));
        assert!(autocorrelation(&pair(), PI).norm() < 1e-16);
    }

    #[test]
    fn single_atom_never_decays() {
        let single = AtomicMeasure::point_mass(-1.5, 1.0).unwrap();
        for t in [1e-3, 1.0, 1e6] {
            assert_eq!(return_probability_avg(&single, t).unwrap(), 1.0);
        }
    }

    #[test]
    fn two_atoms_at_sinc_zero() {
        let v = return_probability_avg(&pair(), PI).unwrap();
        assert!((v - 0.5).abs() < 1e-16);
    }

    #[test]
    fn rejects_nonpositive_time() {
        assert!(return_probability_avg(&pair(), 0.0).is_err());
        assert!(sample_w(&pair(), 10.0, 1.0, 5).is_err());
        assert!(sample_w(&pair(), 1.0, 10.0, 1).is_err());
    }

    #[test]
    fn budget_is_enforced() {
        let m = refine(&MeasureSpec::cantor(), 6).unwrap();
        let opts = ReturnProbabilityOptions {
            pair_budget: 100,
            truncate_beyond: None,
        };
        assert!(matches!(
            return_probability_with(&m, 1.0, &opts),
            Err(Error::Resource { .. })
        ));
    }

    #[test]
    fn truncation_stays_within_bound() {
        let m = refine(&MeasureSpec::cantor(), 9).unwrap();
        let exact = return_probability_avg(&m, 300.0).unwrap();
        for u_max in [5.0, 50.0, 500.0] {
            let opts = ReturnProbabilityOptions {
                pair_budget: 0,
                truncate_beyond: Some(u_max),
            };
            let r = return_probability_with(&m, 300.0, &opts).unwrap();
            assert!((r.value - exact).abs() <= r.truncation_bound, "u_max {u_max}");
        }
    }

    #[test]
    fn sample_endpoints() {
        let s = sample_w(&AtomicMeasure::point_mass(0.0, 1.0).unwrap(), 2.0, 50.0, 2).unwrap();
        assert_eq!(s.grid(), &[2.0, 50.0]);
        assert_eq!(s.values(), &[1.0, 1.0]);
    }

    #[test]
    fn bounded_by_mass_squared() {
        let m = AtomicMeasure::from_atoms([(0.0, 2.0), (0.3, 1.0), (1.7, 0.5)]).unwrap();
        let bound = m.total_mass().powi(2);
        for t in [0.1, 1.0, 7.0, 100.0] {
            let v = return_probability_avg(&m, t).unwrap();
            assert!((0.0..=bound).contains(&v));
        }
    }

    #[test]
    fn series_validation_and_csv() {
        assert!(LogSeries::new(vec![1.0, 1.0], vec![1.0, 1.0], SeriesKind::Other).is_err());
        assert!(LogSeries::new(vec![1.0], vec![1.0, 2.0], SeriesKind::Other).is_err());
        let s = LogSeries::new(vec![1.0, 10.0], vec![0.5, 0.25], SeriesKind::ReturnProbability).unwrap();
        let mut buf = Vec::new();
        s.write_csv(&mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "t,W\n1.0,0.5\n10.0,0.25\n");
    }
}
