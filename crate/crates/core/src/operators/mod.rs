//! Finite truncations of discrete Schrödinger operators
//! `(Hu)_n = u_{n+1} + u_{n−1} + v_n u_n` with Dirichlet boundary conditions,
//! and the spectral measures of states under them.

mod potentials;
pub mod tridiag;

use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

pub use potentials::{limit_periodic_potential, sturmian_potential, LimitPeriodicParams, Rotation, SturmianParams};

use crate::error::{Error, Origin, Result, Violation};
use crate::measure::AtomicMeasure;

/// Tridiagonal operator on the sites `first_site .. first_site + size`.
#[derive(Debug, Clone, PartialEq)]
pub struct JacobiOperator {
    potential: Vec<f64>,
    first_site: i64,
    hopping: f64,
}

impl JacobiOperator {
    pub fn new(potential: Vec<f64>, first_site: i64) -> Result<Self> {
        Self::with_hopping(potential, first_site, 1.0)
    }

    /// `hopping = 0` gives the diagonal (degenerate) model used in tests.
    pub fn with_hopping(potential: Vec<f64>, first_site: i64, hopping: f64) -> Result<Self> {
        if potential.len() < 2 {
            return Err(Error::validation(
                Origin::Operators,
                format!("truncation size must be at least 2, got {}", potential.len()),
            ));
        }
        if let Some(i) = potential.iter().position(|v| !v.is_finite()) {
            return Err(Error::validation(
                Origin::Operators,
                format!("potential at site {} is not finite", first_site + i as i64),
            ));
        }
        if !hopping.is_finite() {
            return Err(Error::validation(Origin::Operators, "hopping must be finite"));
        }
        Ok(JacobiOperator {
            potential,
            first_site,
            hopping,
        })
    }

    /// Free Laplacian on a window centred at site 0.
    pub fn free(size: usize) -> Result<Self> {
        Self::new(vec![0.0; size], centred_first_site(size))
    }

    pub fn sturmian(size: usize, params: &SturmianParams) -> Result<Self> {
        let first = centred_first_site(size);
        Self::new(sturmian_potential(params, first..first + size as i64), first)
    }

    pub fn limit_periodic(size: usize, params: &LimitPeriodicParams) -> Result<Self> {
        let first = centred_first_site(size);
        Self::new(limit_periodic_potential(params, first..first + size as i64), first)
    }

    pub fn size(&self) -> usize {
        self.potential.len()
    }

    pub fn potential(&self) -> &[f64] {
        &self.potential
    }

    pub fn first_site(&self) -> i64 {
        self.first_site
    }

    pub fn sites(&self) -> std::ops::Range<i64> {
        self.first_site..self.first_site + self.size() as i64
    }

    pub fn sup_potential(&self) -> f64 {
        self.potential.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Interval guaranteed to contain the spectrum.
    pub fn gershgorin_bounds(&self) -> (f64, f64) {
        let lo = self.potential.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = self.potential.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let h = 2.0 * self.hopping.abs();
        (lo - h, hi + h)
    }

    fn basis_index(&self, site: i64) -> Result<usize> {
        let idx = site - self.first_site;
        if idx < 0 || idx as usize >= self.size() {
            return Err(Error::validation(
                Origin::Operators,
                format!("site {site} lies outside the window {:?}", self.sites()),
            ));
        }
        Ok(idx as usize)
    }

    pub fn save_potential_csv(&self, path: &Path) -> Result<()> {
        let file = std::fs::File::create(path)?;
        self.write_potential_csv(std::io::BufWriter::new(file))
    }

    pub fn write_potential_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(writer);
        out.write_record(["n", "v"])?;
        for (n, v) in self.sites().zip(&self.potential) {
            out.serialize((n, v))?;
        }
        out.flush()?;
        Ok(())
    }
}

fn centred_first_site(size: usize) -> i64 {
    -((size / 2) as i64)
}

/// State whose spectral measure is requested.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum State {
    /// Basis vector `δ_m`.
    Site { site: i64 },
    /// Coefficients over the truncation window, in site order.
    Vector { coefficients: Vec<f64> },
}

/// Spectral measure `μ_ψ`: atoms `(λ_k, |⟨φ_k, ψ⟩|²)`.
pub fn spectral_measure(op: &JacobiOperator, state: &State) -> Result<AtomicMeasure> {
    Ok(spectral_measures(op, std::slice::from_ref(state))?.remove(0))
}

/// Spectral measures of several states from a single diagonalization.
pub fn spectral_measures(op: &JacobiOperator, states: &[State]) -> Result<Vec<AtomicMeasure>> {
    let n = op.size();
    let vectors = states
        .iter()
        .map(|s| match s {
            State::Site { site } => {
                let mut v = vec![0.0; n];
                v[op.basis_index(*site)?] = 1.0;
                Ok(v)
            }
            State::Vector { coefficients } => {
                if coefficients.len() != n {
                    return Err(Error::validation(
                        Origin::Operators,
                        format!("state has dimension {}, operator has size {n}", coefficients.len()),
                    ));
                }
                Ok(coefficients.clone())
            }
        })
        .collect::<Result<Vec<_>>>()?;

    let off = vec![op.hopping; n - 1];
    let sys = tridiag::eigen_projections(&op.potential, &off, &vectors)?;
    sys.projections
        .iter()
        .map(|proj| AtomicMeasure::from_atoms(sys.values.iter().zip(proj).map(|(&lambda, &c)| (lambda, c * c))))
        .collect()
}

/// Spectral measure of `δ_0` for the free Laplacian, keeping only the
/// eigenvalues in `[a, b]`. An empty window yields a degenerate measure.
pub fn free_restricted_measure(size: usize, window: (f64, f64)) -> Result<AtomicMeasure> {
    let (a, b) = window;
    if !(a < b) {
        return Err(Error::validation(
            Origin::Operators,
            format!("energy window [{a}, {b}] is not well formed"),
        ));
    }
    let full = spectral_measure(&JacobiOperator::free(size)?, &State::Site { site: 0 })?;
    let (positions, weights): (Vec<f64>, Vec<f64>) = full.atoms().filter(|&(x, _)| a <= x && x <= b).unzip();
    AtomicMeasure::from_atoms(positions.into_iter().zip(weights))
}

/// Declarative operator description used in configuration documents.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum OperatorSpec {
    Free {
        size: usize,
    },
    Sturmian {
        size: usize,
        #[serde(flatten)]
        params: SturmianParams,
    },
    LimitPeriodic {
        size: usize,
        #[serde(flatten)]
        params: LimitPeriodicParams,
    },
    /// Explicit potential on `first_site ..`.
    Explicit {
        potential: Vec<f64>,
        #[serde(default)]
        first_site: i64,
    },
}

impl OperatorSpec {
    /// The same operator on twice as many sites; `None` for explicit potentials.
    pub fn doubled(&self) -> Option<OperatorSpec> {
        let mut d = self.clone();
        match &mut d {
            OperatorSpec::Free { size }
            | OperatorSpec::Sturmian { size, .. }
            | OperatorSpec::LimitPeriodic { size, .. } => *size *= 2,
            OperatorSpec::Explicit { .. } => return None,
        }
        Some(d)
    }

    pub fn validate(&self) -> Vec<Violation> {
        let mut out = Vec::new();
        let size_ok = |size: usize, out: &mut Vec<Violation>| {
            if size < 2 {
                out.push(Violation::new("size", "must be at least 2"));
            }
        };
        match self {
            OperatorSpec::Free { size } => size_ok(*size, &mut out),
            OperatorSpec::Sturmian { size, params } => {
                size_ok(*size, &mut out);
                let theta = params.rotation.theta();
                if !(theta > 0.0 && theta < 1.0) {
                    out.push(Violation::new("rotation", "rotation number must lie in (0, 1)"));
                }
                if !(0.0..1.0).contains(&params.phase) {
                    out.push(Violation::new("phase", "must lie in [0, 1)"));
                }
                if !params.coupling.is_finite() {
                    out.push(Violation::new("coupling", "must be finite"));
                }
            }
            OperatorSpec::LimitPeriodic { size, params } => {
                size_ok(*size, &mut out);
                if params.coefficients.is_empty() {
                    out.push(Violation::new("coefficients", "truncation depth must be at least 1"));
                }
                if params.base_period == 0 {
                    out.push(Violation::new("base_period", "must be positive"));
                }
                if params.coefficients.len() > 40 {
                    out.push(Violation::new("coefficients", "depth above 40 overflows the period"));
                }
            }
            OperatorSpec::Explicit { potential, .. } => {
                size_ok(potential.len(), &mut out);
                if potential.iter().any(|v| !v.is_finite()) {
                    out.push(Violation::new("potential", "entries must be finite"));
                }
            }
        }
        out
    }

    pub fn build(&self) -> Result<JacobiOperator> {
        if let Some(v) = self.validate().into_iter().next() {
            return Err(Error::validation(Origin::Operators, v.to_string()));
        }
        match self {
            OperatorSpec::Free { size } => JacobiOperator::free(*size),
            OperatorSpec::Sturmian { size, params } => JacobiOperator::sturmian(*size, params),
            OperatorSpec::LimitPeriodic { size, params } => JacobiOperator::limit_periodic(*size, params),
            OperatorSpec::Explicit { potential, first_site } => JacobiOperator::new(potential.clone(), *first_site),
        }
    }
}
