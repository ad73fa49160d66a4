//! Python bindings: atomic measures, `W(t)`, dimension estimates, the
//! constructors and the experiment runner.

use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

use core::constructors::{self, OscillationPlan, SlowSchedule};
use core::dimensions::{self, EnvelopeConfig, PointwiseOptions, Route, ScaleGrid, ScalingEstimate, UahOptions};
use core::dynamics::{self, ReturnProbabilityOptions};
use core::experiment::{self, Experiment, ExperimentConfig};
use core::operators::{self, JacobiOperator, Rotation, State, SturmianParams};
use core::{AtomicMeasure, BallQuery, MeasureSpec};
use specdyn_core as core;

fn to_py(e: core::Error) -> PyErr {
    match e {
        core::Error::Validation { .. } => PyValueError::new_err(e.to_string()),
        _ => PyRuntimeError::new_err(e.to_string()),
    }
}

fn parse_route(route: &str) -> PyResult<Route> {
    match route {
        "ball" => Ok(Route::Ball),
        "laplace" => Ok(Route::Laplace),
        other => Err(PyValueError::new_err(format!(
            "route must be 'ball' or 'laplace', got {other:?}"
        ))),
    }
}

/// A finite atomic measure on the real line, kept sorted by position.
#[pyclass(name = "Measure", module = "specdyn", frozen)]
pub struct PyMeasure {
    inner: AtomicMeasure,
}

impl From<AtomicMeasure> for PyMeasure {
    fn from(inner: AtomicMeasure) -> Self {
        PyMeasure { inner }
    }
}

#[pymethods]
impl PyMeasure {
    /// Build from `(position, weight)` pairs; nearly equal positions merge.
    #[new]
    fn new(atoms: Vec<(f64, f64)>) -> PyResult<Self> {
        AtomicMeasure::from_atoms(atoms).map(Into::into).map_err(to_py)
    }

    /// Middle-thirds Cantor measure refined to `2^level` atoms.
    #[staticmethod]
    fn cantor(level: u32) -> PyResult<Self> {
        core::refine(&MeasureSpec::cantor(), level)
            .map(Into::into)
            .map_err(to_py)
    }

    /// Lebesgue measure on `[a, b]` with unit mass, as `2^level` midpoint atoms.
    #[staticmethod]
    #[pyo3(signature = (level, a = 0.0, b = 1.0))]
    fn uniform(level: u32, a: f64, b: f64) -> PyResult<Self> {
        core::refine(&MeasureSpec::uniform(a, b), level)
            .map(Into::into)
            .map_err(to_py)
    }

    /// Spectral measure of `δ_site` for the free Laplacian on `size` sites around 0.
    #[staticmethod]
    #[pyo3(signature = (size, site = 0))]
    fn free_laplacian(size: usize, site: i64) -> PyResult<Self> {
        let op = JacobiOperator::free(size).map_err(to_py)?;
        operators::spectral_measure(&op, &State::Site { site })
            .map(Into::into)
            .map_err(to_py)
    }

    /// Spectral measure of `δ_site` for the Sturmian operator with golden-mean rotation.
    #[staticmethod]
    #[pyo3(signature = (size, coupling, phase = 0.0, site = 0))]
    fn sturmian(size: usize, coupling: f64, phase: f64, site: i64) -> PyResult<Self> {
        let params = SturmianParams {
            coupling,
            rotation: Rotation::GoldenMean,
            phase,
        };
        let op = JacobiOperator::sturmian(size, &params).map_err(to_py)?;
        operators::spectral_measure(&op, &State::Site { site })
            .map(Into::into)
            .map_err(to_py)
    }

    fn __len__(&self) -> usize {
        self.inner.len()
    }

    fn __repr__(&self) -> String {
        format!("Measure(atoms={}, mass={})", self.inner.len(), self.inner.total_mass())
    }

    fn positions(&self) -> Vec<f64> {
        self.inner.positions().to_vec()
    }

    fn weights(&self) -> Vec<f64> {
        self.inner.weights().to_vec()
    }

    fn atoms(&self) -> Vec<(f64, f64)> {
        self.inner.atoms().collect()
    }

    #[getter]
    fn total_mass(&self) -> f64 {
        self.inner.total_mass()
    }

    fn min_gap(&self) -> Option<f64> {
        self.inner.min_gap()
    }

    /// Mass of the open ball `|y - x| < radius`.
    fn ball_mass(&self, x: f64, radius: f64) -> PyResult<f64> {
        Ok(self.inner.ball_mass(BallQuery::new(x, radius).map_err(to_py)?))
    }

    /// `∫ exp(-2t|x - y|) dμ(y)`.
    fn laplace(&self, x: f64, t: f64) -> f64 {
        self.inner.laplace_transform(x, t)
    }

    /// Drops the atoms inside the given open intervals.
    fn restrict(&self, excluded: Vec<(f64, f64)>) -> PyResult<Self> {
        self.inner.restrict(&excluded).map(Into::into).map_err(to_py)
    }

    fn save_csv(&self, path: std::path::PathBuf) -> PyResult<()> {
        self.inner.save_csv(&path).map_err(to_py)
    }
}

fn estimate_dict<'py>(py: Python<'py>, e: &ScalingEstimate) -> PyResult<Bound<'py, PyDict>> {
    let d = PyDict::new(py);
    d.set_item("lower", e.lower)?;
    d.set_item("upper", e.upper)?;
    d.set_item("window", e.window)?;
    d.set_item("slopes", e.slopes.clone())?;
    Ok(d)
}

/// Time-averaged return probability `W(t)`.
#[pyfunction]
fn return_probability(mu: &PyMeasure, t: f64) -> PyResult<f64> {
    dynamics::return_probability_avg(&mu.inner, t).map_err(to_py)
}

/// `W(t)` at each time, evaluated in parallel.
#[pyfunction]
fn sample_w(py: Python<'_>, mu: &PyMeasure, times: Vec<f64>) -> PyResult<Vec<f64>> {
    let series = py
        .detach(|| dynamics::sample_w_on(&mu.inner, times, &ReturnProbabilityOptions::default()))
        .map_err(to_py)?;
    Ok(series.values().to_vec())
}

/// `Σ_j w_j μ(B(x_j; ε))`.
#[pyfunction]
fn correlation_integral(mu: &PyMeasure, eps: f64) -> f64 {
    dimensions::correlation_integral(&mu.inner, eps)
}

/// Windowed lower/upper `D(q)` over the given scales.
#[pyfunction]
#[pyo3(signature = (mu, scales, q = 2.0))]
fn generalized_dimension<'py>(
    py: Python<'py>,
    mu: &PyMeasure,
    scales: Vec<f64>,
    q: f64,
) -> PyResult<Bound<'py, PyDict>> {
    let grid = ScaleGrid::Explicit { scales };
    let est = py
        .detach(|| dimensions::generalized_dimension(&mu.inner, q, &grid, &EnvelopeConfig::default()))
        .map_err(to_py)?;
    estimate_dict(py, &est)
}

/// Lower/upper local exponents at `x` from ball masses or Laplace values.
#[pyfunction]
#[pyo3(signature = (mu, x, scales, route = "ball"))]
fn pointwise_exponents<'py>(
    py: Python<'py>,
    mu: &PyMeasure,
    x: f64,
    scales: Vec<f64>,
    route: &str,
) -> PyResult<Bound<'py, PyDict>> {
    let opts = PointwiseOptions::route(parse_route(route)?);
    let est = dimensions::pointwise_exponents(&mu.inner, x, &ScaleGrid::Explicit { scales }, &opts).map_err(to_py)?;
    estimate_dict(py, &est)
}

/// Sup of `μ(I)/|I|^alpha` over intervals of each length in `scales` (decreasing).
#[pyfunction]
fn uah_modulus<'py>(py: Python<'py>, mu: &PyMeasure, alpha: f64, scales: Vec<f64>) -> PyResult<Bound<'py, PyDict>> {
    let r = py
        .detach(|| dimensions::uah_modulus(&mu.inner, alpha, &scales, &UahOptions::default()))
        .map_err(to_py)?;
    let d = PyDict::new(py);
    d.set_item("alpha", r.alpha)?;
    d.set_item("samples", r.samples)?;
    d.set_item("bounded", r.verdict == dimensions::UahVerdict::BoundedAtTestedScales)?;
    d.set_item("growth_exponent", r.growth_exponent)?;
    d.set_item("growth_stderr", r.growth_stderr)?;
    Ok(d)
}

/// Atoms at `center + exp(-2^j)` with weights `2^-j` for `j = start..=depth`.
#[pyfunction]
#[pyo3(signature = (center, depth, start = 1))]
fn slow_measure(center: f64, depth: u32, start: u32) -> PyResult<PyMeasure> {
    constructors::slow_measure(&SlowSchedule::new(center, depth).starting_at(start))
        .map(Into::into)
        .map_err(to_py)
}

/// Weights multiplied by `1 - exp(-n|x - y|^rho)`.
#[pyfunction]
fn smooth_state(mu: &PyMeasure, x: f64, rho: f64, n: f64) -> PyResult<PyMeasure> {
    constructors::smooth_state(&mu.inner, x, rho, n)
        .map(Into::into)
        .map_err(to_py)
}

/// `mu_psi` with the punctured `1/n` neighbourhood of `x` removed, plus `mu_eta / n²`.
#[pyfunction]
fn splice_state(mu_psi: &PyMeasure, mu_eta: &PyMeasure, n: u32, x: f64) -> PyResult<PyMeasure> {
    constructors::splice_state(&mu_psi.inner, &mu_eta.inner, n, x)
        .map(Into::into)
        .map_err(to_py)
}

/// Ladder whose local exponent at `center` alternates between 0 and `high`.
#[pyfunction]
#[pyo3(signature = (center = 0.0, high = 3.0))]
fn oscillating_measure(center: f64, high: f64) -> PyResult<PyMeasure> {
    constructors::oscillating_measure(&OscillationPlan::alternating(center, high))
        .map(Into::into)
        .map_err(to_py)
}

/// Names of the runnable experiments.
#[pyfunction]
fn experiments() -> Vec<&'static str> {
    Experiment::NAMES.to_vec()
}

/// Default configuration document of a named experiment, as JSON.
#[pyfunction]
fn default_config(name: &str) -> PyResult<String> {
    let e =
        Experiment::default_for(name).ok_or_else(|| PyValueError::new_err(format!("unknown experiment {name:?}")))?;
    serde_json::to_string_pretty(&ExperimentConfig::new(e)).map_err(|e| PyRuntimeError::new_err(e.to_string()))
}

/// Violations of a configuration document, as `"path: message"` strings.
#[pyfunction]
fn validate_config(text: &str) -> Vec<String> {
    experiment::validate_document(text)
        .iter()
        .map(|v| v.to_string())
        .collect()
}

/// Runs an experiment document and returns its report as JSON; writes the
/// artifacts to `out` when given.
#[pyfunction]
#[pyo3(signature = (config, out = None))]
fn run_experiment(py: Python<'_>, config: &str, out: Option<std::path::PathBuf>) -> PyResult<String> {
    let cfg = experiment::parse_config(config).map_err(|v| {
        let listed: Vec<String> = v.iter().map(|v| v.to_string()).collect();
        PyValueError::new_err(listed.join("; "))
    })?;
    let outcome = py.detach(|| experiment::run(&cfg)).map_err(to_py)?;
    if let Some(dir) = out {
        outcome.write_to(&dir, None).map_err(to_py)?;
    }
    serde_json::to_string(&outcome.report).map_err(|e| PyRuntimeError::new_err(e.to_string()))
}

#[pymodule]
fn specdyn(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyMeasure>()?;
    m.add_function(wrap_pyfunction!(return_probability, m)?)?;
    m.add_function(wrap_pyfunction!(sample_w, m)?)?;
    m.add_function(wrap_pyfunction!(correlation_integral, m)?)?;
    m.add_function(wrap_pyfunction!(generalized_dimension, m)?)?;
    m.add_function(wrap_pyfunction!(pointwise_exponents, m)?)?;
    m.add_function(wrap_pyfunction!(uah_modulus, m)?)?;
    m.add_function(wrap_pyfunction!(slow_measure, m)?)?;
    m.add_function(wrap_pyfunction!(smooth_state, m)?)?;
    m.add_function(wrap_pyfunction!(splice_state, m)?)?;
    m.add_function(wrap_pyfunction!(oscillating_measure, m)?)?;
    m.add_function(wrap_pyfunction!(experiments, m)?)?;
    m.add_function(wrap_pyfunction!(default_config, m)?)?;
    m.add_function(wrap_pyfunction!(validate_config, m)?)?;
    m.add_function(wrap_pyfunction!(run_experiment, m)?)?;
    Ok(())
}
