use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::constructors::{oscillating_measure, slow_measure, OscillationPlan, SlowSchedule};
use crate::dimensions::{EnvelopeConfig, Estimator, Route, ScaleGrid};
use crate::dynamics::DEFAULT_PAIR_BUDGET;
use crate::error::{Error, Origin, Result, Violation};
use crate::measure::{refine_with_cap, AtomicMeasure, MeasureSpec, DEFAULT_ATOM_CAP};
use crate::operators::{spectral_measure, OperatorSpec, State};

/// ln 2 / ln 3, the dimension of the middle-thirds Cantor measure.
pub fn cantor_dimension() -> f64 {
    2f64.ln() / 3f64.ln()
}

/// A complete experiment document.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub budget: Budget,
    #[serde(flatten)]
    pub experiment: Experiment,
}

impl ExperimentConfig {
    pub fn new(experiment: Experiment) -> Self {
        ExperimentConfig {
            seed: 0,
            budget: Budget::default(),
            experiment,
        }
    }

    pub fn name(&self) -> &'static str {
        self.experiment.name()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Budget {
    /// Largest `n²` for one closed-form `W(t)` evaluation.
    pub pair_budget: u64,
    /// Largest atom count produced by a refinement.
    pub atom_cap: usize,
}

impl Default for Budget {
    fn default() -> Self {
        Budget {
            pair_budget: DEFAULT_PAIR_BUDGET,
            atom_cap: DEFAULT_ATOM_CAP,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "experiment", rename_all = "kebab-case")]
pub enum Experiment {
    Spectrum(SpectrumConfig),
    Dynamics(DynamicsConfig),
    Dims(DimsConfig),
    Construct(ConstructConfig),
    VerifyLast(VerifyLastConfig),
    VerifyIdentities(VerifyIdentitiesConfig),
    DemoOscillation(DemoOscillationConfig),
    WienerLimit(WienerLimitConfig),
    CantorD2(CantorD2Config),
}

impl Experiment {
    pub const NAMES: [&'static str; 9] = [
        "spectrum",
        "dynamics",
        "dims",
        "construct",
        "verify-last",
        "verify-identities",
        "demo-oscillation",
        "wiener-limit",
        "cantor-d2",
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Experiment::Spectrum(_) => "spectrum",
            Experiment::Dynamics(_) => "dynamics",
            Experiment::Dims(_) => "dims",
            Experiment::Construct(_) => "construct",
            Experiment::VerifyLast(_) => "verify-last",
            Experiment::VerifyIdentities(_) => "verify-identities",
            Experiment::DemoOscillation(_) => "demo-oscillation",
            Experiment::WienerLimit(_) => "wiener-limit",
            Experiment::CantorD2(_) => "cantor-d2",
        }
    }

    /// The default configuration of a named experiment.
    pub fn default_for(name: &str) -> Option<Experiment> {
        Some(match name {
            "spectrum" => Experiment::Spectrum(SpectrumConfig::default()),
            "dynamics" => Experiment::Dynamics(DynamicsConfig::default()),
            "dims" => Experiment::Dims(DimsConfig::default()),
            "construct" => Experiment::Construct(ConstructConfig::default()),
            "verify-last" => Experiment::VerifyLast(VerifyLastConfig::default()),
            "verify-identities" => Experiment::VerifyIdentities(VerifyIdentitiesConfig::default()),
            "demo-oscillation" => Experiment::DemoOscillation(DemoOscillationConfig::default()),
            "wiener-limit" => Experiment::WienerLimit(WienerLimitConfig::default()),
            "cantor-d2" => Experiment::CantorD2(CantorD2Config::default()),
            _ => return None,
        })
    }
}

/// Where an experiment's measure comes from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "source", rename_all = "snake_case", deny_unknown_fields)]
pub enum MeasureSource {
    Refined {
        spec: MeasureSpec,
        level: u32,
    },
    Operator {
        operator: OperatorSpec,
        #[serde(default = "site_zero")]
        state: State,
    },
    Slow {
        schedule: SlowSchedule,
    },
    Oscillating {
        plan: OscillationPlan,
    },
    /// `atoms` uniform positions in `interval` with weights uniform in
    /// `[0.1, 1)`, drawn from the experiment seed.
    Random {
        atoms: usize,
        #[serde(default = "default_random_interval")]
        interval: (f64, f64),
    },
}

fn site_zero() -> State {
    State::Site { site: 0 }
}

fn default_random_interval() -> (f64, f64) {
    (-2.0, 2.0)
}

impl MeasureSource {
    pub fn cantor(level: u32) -> Self {
        MeasureSource::Refined {
            spec: MeasureSpec::cantor(),
            level,
        }
    }

    pub fn uniform(level: u32) -> Self {
        MeasureSource::Refined {
            spec: MeasureSpec::uniform(0.0, 1.0),
            level,
        }
    }

    pub fn validate(&self) -> Vec<Violation> {
        match self {
            MeasureSource::Refined { spec, level } => {
                let mut out: Vec<Violation> = spec.validate().into_iter().map(|v| v.nested("spec")).collect();
                if *level == 0 {
                    out.push(Violation::new("level", "must be at least 1"));
                }
                out
            }
            MeasureSource::Operator { operator, .. } => {
                operator.validate().into_iter().map(|v| v.nested("operator")).collect()
            }
            MeasureSource::Slow { schedule } => schedule.validate().into_iter().map(|v| v.nested("schedule")).collect(),
            MeasureSource::Oscillating { plan } => plan.validate().into_iter().map(|v| v.nested("plan")).collect(),
            MeasureSource::Random { atoms, interval } => {
                let mut out = Vec::new();
                if *atoms == 0 {
                    out.push(Violation::new("atoms", "must be positive"));
                }
                if !(interval.0 < interval.1) || !interval.0.is_finite() || !interval.1.is_finite() {
                    out.push(Violation::new("interval", "must be a finite interval with a < b"));
                }
                out
            }
        }
    }

    pub fn build(&self, seed: u64, budget: &Budget) -> Result<AtomicMeasure> {
        match self {
            MeasureSource::Refined { spec, level } => refine_with_cap(spec, *level, budget.atom_cap),
            MeasureSource::Operator { operator, state } => spectral_measure(&operator.build()?, state),
            MeasureSource::Slow { schedule } => slow_measure(schedule),
            MeasureSource::Oscillating { plan } => oscillating_measure(plan),
            MeasureSource::Random { atoms, interval } => Ok(random_measure(seed, *atoms, *interval)),
        }
    }
}

/// Random atomic measure used by the quadrature and Wiener fixtures.
pub fn random_measure(seed: u64, atoms: usize, interval: (f64, f64)) -> AtomicMeasure {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let pairs: Vec<(f64, f64)> = (0..atoms)
        .map(|_| (rng.random_range(interval.0..interval.1), rng.random_range(0.1..1.0)))
        .collect();
    AtomicMeasure::from_atoms(pairs).expect("finite positive atoms")
}

/// Closed interval check `min ≤ value ≤ max`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Bounds {
    pub min: f64,
    pub max: f64,
}

impl Bounds {
    pub fn new(min: f64, max: f64) -> Self {
        Bounds { min, max }
    }

    fn validate(&self, path: &str) -> Vec<Violation> {
        if self.min <= self.max {
            Vec::new()
        } else {
            vec![Violation::new(
                path,
                format!("min {} exceeds max {}", self.min, self.max),
            )]
        }
    }
}

fn grid_violations(grid: &ScaleGrid, path: &str) -> Vec<Violation> {
    match grid.scales() {
        Ok(_) => Vec::new(),
        Err(e) => vec![Violation::new(path, e.to_string())],
    }
}

fn envelope_violations(env: &EnvelopeConfig, path: &str) -> Vec<Violation> {
    if env.window_points < 2 {
        vec![Violation::new(format!("{path}.window_points"), "must be at least 2")]
    } else {
        Vec::new()
    }
}

fn nested(prefix: &str, v: Vec<Violation>) -> impl Iterator<Item = Violation> + '_ {
    v.into_iter().map(move |v| v.nested(prefix))
}

// ---------------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpectrumConfig {
    pub operator: OperatorSpec,
    #[serde(default = "default_states")]
    pub states: Vec<State>,
    /// Keep only eigenvalues in this window.
    #[serde(default)]
    pub energy_window: Option<(f64, f64)>,
    /// Compare the CDF of the first state's measure against the arcsine law.
    #[serde(default)]
    pub arcsine_tolerance: Option<f64>,
    /// Sup distance allowed between the CDFs of site-state measures at sizes
    /// `N` and `2N`.
    #[serde(default)]
    pub convergence_tolerance: Option<f64>,
}

fn default_states() -> Vec<State> {
    vec![site_zero()]
}

impl Default for SpectrumConfig {
    fn default() -> Self {
        SpectrumConfig {
            operator: OperatorSpec::Free { size: 4096 },
            states: default_states(),
            energy_window: None,
            arcsine_tolerance: Some(0.02),
            convergence_tolerance: Some(0.01),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DynamicsConfig {
    pub measure: MeasureSource,
    pub time_grid: ScaleGrid,
    #[serde(default)]
    pub envelope: EnvelopeConfig,
    #[serde(default)]
    pub truncate_beyond: Option<f64>,
    /// Required range of the least-squares slope of `ln W` against `ln t`.
    #[serde(default)]
    pub fit_slope: Option<Bounds>,
}

impl Default for DynamicsConfig {
    fn default() -> Self {
        DynamicsConfig {
            measure: MeasureSource::cantor(12),
            time_grid: ScaleGrid::geometric(10.0, 1e4, 40),
            envelope: EnvelopeConfig::default(),
            truncate_beyond: None,
            fit_slope: Some(Bounds::new(-cantor_dimension() - 0.05, -cantor_dimension() + 0.05)),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CorrelationTask {
    #[serde(default = "two")]
    pub q: f64,
    pub grid: ScaleGrid,
    #[serde(default)]
    pub envelope: EnvelopeConfig,
    /// Both envelopes must fall in this range.
    #[serde(default)]
    pub expected: Option<Bounds>,
}

fn two() -> f64 {
    2.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PointwiseTask {
    pub x: f64,
    pub grid: ScaleGrid,
    #[serde(default = "both_routes")]
    pub routes: Vec<Route>,
    #[serde(default)]
    pub estimator: Estimator,
    #[serde(default)]
    pub envelope: EnvelopeConfig,
    #[serde(default = "yes")]
    pub enforce_resolution: bool,
    #[serde(default)]
    pub expected: Option<Bounds>,
}

fn both_routes() -> Vec<Route> {
    vec![Route::Ball, Route::Laplace]
}

fn yes() -> bool {
    true
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExpectedVerdict {
    Bounded,
    Diverging,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct UahTask {
    pub alpha: f64,
    /// Interval lengths; sorted decreasing before use.
    pub scales: ScaleGrid,
    #[serde(default)]
    pub options: crate::dimensions::UahOptions,
    #[serde(default)]
    pub expected: Option<ExpectedVerdict>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DimsConfig {
    pub measure: MeasureSource,
    #[serde(default)]
    pub correlation: Option<CorrelationTask>,
    #[serde(default)]
    pub pointwise: Vec<PointwiseTask>,
    #[serde(default)]
    pub uah: Vec<UahTask>,
}

pub(crate) fn cantor_d2_grid() -> ScaleGrid {
    ScaleGrid::Lattice {
        base: 3.0,
        per_factor: 2,
        min: 3f64.powi(-9),
        max: 3f64.powi(-3),
    }
}

pub(crate) fn cantor_uah_scales() -> ScaleGrid {
    ScaleGrid::Lattice {
        base: 3.0,
        per_factor: 1,
        min: 3f64.powi(-10),
        max: 3f64.powi(-1),
    }
}

impl Default for DimsConfig {
    fn default() -> Self {
        let d = cantor_dimension();
        DimsConfig {
            measure: MeasureSource::cantor(14),
            correlation: Some(CorrelationTask {
                q: 2.0,
                grid: cantor_d2_grid(),
                envelope: EnvelopeConfig::default(),
                expected: Some(Bounds::new(d - 0.02, d + 0.02)),
            }),
            pointwise: vec![PointwiseTask {
                x: 0.0,
                grid: cantor_d2_grid(),
                routes: both_routes(),
                estimator: Estimator::Slope,
                envelope: EnvelopeConfig::default(),
                enforce_resolution: true,
                expected: Some(Bounds::new(d - 0.03, d + 0.03)),
            }],
            uah: vec![
                UahTask {
                    alpha: d,
                    scales: cantor_uah_scales(),
                    options: Default::default(),
                    expected: Some(ExpectedVerdict::Bounded),
                },
                UahTask {
                    alpha: d + 0.1,
                    scales: cantor_uah_scales(),
                    options: Default::default(),
                    expected: Some(ExpectedVerdict::Diverging),
                },
            ],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "construction", rename_all = "snake_case", deny_unknown_fields)]
pub enum Construction {
    Slow {
        schedule: SlowSchedule,
    },
    Smooth {
        base: MeasureSource,
        x: f64,
        rho: f64,
        n: f64,
        /// Times at which the Laplace bound is checked.
        time_grid: ScaleGrid,
    },
    Splice {
        base: MeasureSource,
        eta: SlowSchedule,
        n: u32,
    },
    Oscillation {
        plan: OscillationPlan,
        /// Per-band slopes must match targets within this tolerance.
        #[serde(default = "band_tolerance")]
        band_tolerance: f64,
    },
}

fn band_tolerance() -> f64 {
    0.2
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConstructConfig {
    pub construction: Construction,
}

impl Default for ConstructConfig {
    fn default() -> Self {
        ConstructConfig {
            construction: Construction::Splice {
                base: MeasureSource::cantor(10),
                eta: SlowSchedule::new(0.5, 8).starting_at(2),
                n: 10,
            },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VerifyLastConfig {
    /// Measure whose `W(t)` is sampled.
    pub measure: MeasureSource,
    /// Finer refinement of the same measure for the Hölder modulus.
    pub modulus_measure: MeasureSource,
    pub alpha: f64,
    pub time_grid: ScaleGrid,
    pub scales: ScaleGrid,
    /// `|slope of t^α W|` must stay below this.
    #[serde(default = "growth_tolerance")]
    pub growth_tolerance: f64,
    #[serde(default)]
    pub uah_options: crate::dimensions::UahOptions,
}

fn growth_tolerance() -> f64 {
    0.05
}

/// `3^{k/2}` inside `[min, max]`.
pub(crate) fn cantor_time_grid(min: f64, max: f64) -> ScaleGrid {
    ScaleGrid::Lattice {
        base: 3.0,
        per_factor: 2,
        min,
        max,
    }
}

impl Default for VerifyLastConfig {
    fn default() -> Self {
        VerifyLastConfig {
            measure: MeasureSource::cantor(12),
            modulus_measure: MeasureSource::cantor(14),
            alpha: cantor_dimension(),
            time_grid: cantor_time_grid(10.0, 1e4),
            scales: cantor_uah_scales(),
            growth_tolerance: growth_tolerance(),
            uah_options: Default::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IdentityFixture {
    pub name: String,
    /// Measure for the correlation dimension.
    pub d2_measure: MeasureSource,
    pub d2_grid: ScaleGrid,
    /// Measure for `W(t)` (usually a coarser refinement).
    pub w_measure: MeasureSource,
    pub time_grid: ScaleGrid,
    #[serde(default)]
    pub envelope: EnvelopeConfig,
    #[serde(default = "identity_tolerance")]
    pub tolerance: f64,
    /// Ball and Laplace routes at `x` on the D2 grid.
    #[serde(default)]
    pub pointwise_x: Option<f64>,
    #[serde(default = "route_tolerance")]
    pub route_tolerance: f64,
}

fn identity_tolerance() -> f64 {
    0.07
}

fn route_tolerance() -> f64 {
    0.05
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SandwichConfig {
    pub samples: usize,
    #[serde(default = "sandwich_atoms")]
    pub max_atoms: usize,
}

fn sandwich_atoms() -> usize {
    64
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VerifyIdentitiesConfig {
    pub fixtures: Vec<IdentityFixture>,
    #[serde(default)]
    pub sandwich: Option<SandwichConfig>,
}

impl Default for VerifyIdentitiesConfig {
    fn default() -> Self {
        VerifyIdentitiesConfig {
            fixtures: vec![
                IdentityFixture {
                    name: "cantor".into(),
                    d2_measure: MeasureSource::cantor(14),
                    d2_grid: cantor_d2_grid(),
                    w_measure: MeasureSource::cantor(12),
                    time_grid: cantor_time_grid(10.0, 1e4),
                    envelope: EnvelopeConfig::default(),
                    tolerance: identity_tolerance(),
                    pointwise_x: Some(0.0),
                    route_tolerance: route_tolerance(),
                },
                IdentityFixture {
                    name: "uniform".into(),
                    d2_measure: MeasureSource::uniform(16),
                    d2_grid: ScaleGrid::geometric(1e-3, 1e-1, 41),
                    w_measure: MeasureSource::uniform(12),
                    time_grid: ScaleGrid::geometric(10.0, 1e3, 41),
                    envelope: EnvelopeConfig::default(),
                    tolerance: identity_tolerance(),
                    pointwise_x: Some(0.5),
                    route_tolerance: route_tolerance(),
                },
            ],
            sandwich: Some(SandwichConfig {
                samples: 1000,
                max_atoms: sandwich_atoms(),
            }),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DemoOscillationConfig {
    pub plan: OscillationPlan,
    pub scale_grid: ScaleGrid,
    pub time_grid: ScaleGrid,
    #[serde(default)]
    pub envelope: EnvelopeConfig,
    #[serde(default = "demo_lower_max")]
    pub lower_max: f64,
    #[serde(default = "demo_upper_min")]
    pub upper_min: f64,
    /// The W envelope must reach `−w_slope_factor · min(1, upper)` ...
    #[serde(default = "w_slope_factor")]
    pub w_slope_factor: f64,
    /// ... and `w_slope_ceiling`.
    #[serde(default = "w_slope_ceiling")]
    pub w_slope_ceiling: f64,
}

fn demo_lower_max() -> f64 {
    0.2
}
fn demo_upper_min() -> f64 {
    2.5
}
fn w_slope_factor() -> f64 {
    0.8
}
fn w_slope_ceiling() -> f64 {
    -0.1
}

impl Default for DemoOscillationConfig {
    fn default() -> Self {
        DemoOscillationConfig {
            plan: OscillationPlan::alternating(0.0, 3.0),
            scale_grid: ScaleGrid::geometric(1e-7, 1e-1, 121),
            time_grid: ScaleGrid::geometric(1e2, 1e8, 121),
            envelope: EnvelopeConfig::default(),
            lower_max: demo_lower_max(),
            upper_min: demo_upper_min(),
            w_slope_factor: w_slope_factor(),
            w_slope_ceiling: w_slope_ceiling(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WienerLimitConfig {
    pub measure: MeasureSource,
    /// `T = time_factor / min_gap`.
    #[serde(default = "time_factor")]
    pub time_factor: f64,
}

fn time_factor() -> f64 {
    1e3
}

impl Default for WienerLimitConfig {
    fn default() -> Self {
        WienerLimitConfig {
            measure: MeasureSource::Random {
                atoms: 10,
                interval: default_random_interval(),
            },
            time_factor: time_factor(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CantorD2Config {
    pub level: u32,
    pub grid: ScaleGrid,
    #[serde(default)]
    pub envelope: EnvelopeConfig,
    #[serde(default = "d2_tolerance")]
    pub tolerance: f64,
}

fn d2_tolerance() -> f64 {
    0.02
}

impl Default for CantorD2Config {
    fn default() -> Self {
        CantorD2Config {
            level: 14,
            grid: cantor_d2_grid(),
            envelope: EnvelopeConfig::default(),
            tolerance: d2_tolerance(),
        }
    }
}

// ---------------------------------------------------------------------------

impl ExperimentConfig {
    /// Every violated constraint, with paths into the document.
    pub fn validate(&self) -> Vec<Violation> {
        let mut out = Vec::new();
        if self.budget.pair_budget == 0 {
            out.push(Violation::new("budget.pair_budget", "must be positive"));
        }
        if self.budget.atom_cap == 0 {
            out.push(Violation::new("budget.atom_cap", "must be positive"));
        }
        match &self.experiment {
            Experiment::Spectrum(c) => {
                out.extend(nested("operator", c.operator.validate()));
                if c.states.is_empty() {
                    out.push(Violation::new("states", "at least one state is required"));
                }
                if let Some((a, b)) = c.energy_window {
                    if !(a < b) {
                        out.push(Violation::new(
                            "energy_window",
                            format!("[{a}, {b}] is not well formed"),
                        ));
                    }
                }
                if let Some(t) = c.arcsine_tolerance {
                    if !(t > 0.0) {
                        out.push(Violation::new("arcsine_tolerance", "must be positive"));
                    }
                    if !matches!(c.operator, OperatorSpec::Free { .. }) {
                        out.push(Violation::new(
                            "arcsine_tolerance",
                            "the arcsine law applies to the free operator only",
                        ));
                    }
                }
                if let Some(t) = c.convergence_tolerance {
                    if !(t > 0.0) {
                        out.push(Violation::new("convergence_tolerance", "must be positive"));
                    }
                    if c.operator.doubled().is_none() {
                        out.push(Violation::new(
                            "convergence_tolerance",
                            "an explicit potential cannot be doubled",
                        ));
                    }
                }
            }
            Experiment::Dynamics(c) => {
                out.extend(nested("measure", c.measure.validate()));
                out.extend(grid_violations(&c.time_grid, "time_grid"));
                out.extend(envelope_violations(&c.envelope, "envelope"));
                if let Some(u) = c.truncate_beyond {
                    if !(u > 0.0) {
                        out.push(Violation::new("truncate_beyond", "must be positive"));
                    }
                }
                if let Some(b) = &c.fit_slope {
                    out.extend(b.validate("fit_slope"));
                }
            }
            Experiment::Dims(c) => {
                out.extend(nested("measure", c.measure.validate()));
                if let Some(t) = &c.correlation {
                    if !(t.q > 0.0) || t.q == 1.0 {
                        out.push(Violation::new("correlation.q", "must be positive and different from 1"));
                    }
                    out.extend(grid_violations(&t.grid, "correlation.grid"));
                    out.extend(envelope_violations(&t.envelope, "correlation.envelope"));
                    if let Some(b) = &t.expected {
                        out.extend(b.validate("correlation.expected"));
                    }
                }
                for (i, t) in c.pointwise.iter().enumerate() {
                    let p = format!("pointwise[{i}]");
                    out.extend(grid_violations(&t.grid, &format!("{p}.grid")));
                    if t.routes.is_empty() {
                        out.push(Violation::new(format!("{p}.routes"), "at least one route is required"));
                    }
                    if !t.x.is_finite() {
                        out.push(Violation::new(format!("{p}.x"), "must be finite"));
                    }
                }
                for (i, t) in c.uah.iter().enumerate() {
                    let p = format!("uah[{i}]");
                    if !(0.0..=1.0).contains(&t.alpha) {
                        out.push(Violation::new(format!("{p}.alpha"), "must lie in [0, 1]"));
                    }
                    out.extend(grid_violations(&t.scales, &format!("{p}.scales")));
                    if let Ok(s) = t.scales.scales() {
                        if s.iter().any(|&h| h >= 1.0) {
                            out.push(Violation::new(
                                format!("{p}.scales"),
                                "interval lengths must be below 1",
                            ));
                        }
                    }
                }
            }
            Experiment::Construct(c) => out.extend(nested("construction", construction_violations(&c.construction))),
            Experiment::VerifyLast(c) => {
                out.extend(nested("measure", c.measure.validate()));
                out.extend(nested("modulus_measure", c.modulus_measure.validate()));
                if !(0.0..=1.0).contains(&c.alpha) {
                    out.push(Violation::new("alpha", "must lie in [0, 1]"));
                }
                out.extend(grid_violations(&c.time_grid, "time_grid"));
                out.extend(grid_violations(&c.scales, "scales"));
                if !(c.growth_tolerance > 0.0) {
                    out.push(Violation::new("growth_tolerance", "must be positive"));
                }
            }
            Experiment::VerifyIdentities(c) => {
                for (i, f) in c.fixtures.iter().enumerate() {
                    let p = format!("fixtures[{i}]");
                    out.extend(nested(&format!("{p}.d2_measure"), f.d2_measure.validate()));
                    out.extend(nested(&format!("{p}.w_measure"), f.w_measure.validate()));
                    out.extend(grid_violations(&f.d2_grid, &format!("{p}.d2_grid")));
                    out.extend(grid_violations(&f.time_grid, &format!("{p}.time_grid")));
                }
                if let Some(s) = &c.sandwich {
                    if s.samples == 0 || s.max_atoms == 0 {
                        out.push(Violation::new("sandwich", "samples and max_atoms must be positive"));
                    }
                }
                if c.fixtures.is_empty() && c.sandwich.is_none() {
                    out.push(Violation::new("fixtures", "nothing to verify"));
                }
            }
            Experiment::DemoOscillation(c) => {
                out.extend(nested("plan", c.plan.validate()));
                out.extend(grid_violations(&c.scale_grid, "scale_grid"));
                out.extend(grid_violations(&c.time_grid, "time_grid"));
                out.extend(envelope_violations(&c.envelope, "envelope"));
            }
            Experiment::WienerLimit(c) => {
                out.extend(nested("measure", c.measure.validate()));
                if !(c.time_factor > 0.0) {
                    out.push(Violation::new("time_factor", "must be positive"));
                }
            }
            Experiment::CantorD2(c) => {
                if c.level == 0 {
                    out.push(Violation::new("level", "must be at least 1"));
                }
                out.extend(grid_violations(&c.grid, "grid"));
                out.extend(envelope_violations(&c.envelope, "envelope"));
                if !(c.tolerance > 0.0) {
                    out.push(Violation::new("tolerance", "must be positive"));
                }
            }
        }
        out
    }
}

fn construction_violations(c: &Construction) -> Vec<Violation> {
    let mut out = Vec::new();
    match c {
        Construction::Slow { schedule } => out.extend(nested("schedule", schedule.validate())),
        Construction::Smooth {
            base,
            x,
            rho,
            n,
            time_grid,
        } => {
            out.extend(nested("base", base.validate()));
            if !x.is_finite() {
                out.push(Violation::new("x", "must be finite"));
            }
            if !(*rho > 0.0) {
                out.push(Violation::new("rho", "smooth_state: must be positive"));
            }
            if !(*n > 0.0) {
                out.push(Violation::new("n", "smooth_state: must be positive"));
            }
            out.extend(grid_violations(time_grid, "time_grid"));
        }
        Construction::Splice { base, eta, n } => {
            out.extend(nested("base", base.validate()));
            out.extend(nested("eta", eta.validate()));
            if *n == 0 {
                out.push(Violation::new("n", "splice_state: must be positive"));
            } else if eta.start >= 1 && eta.start <= eta.depth {
                let radius = 1.0 / *n as f64;
                let outer = eta.outer_scale();
                if outer >= radius {
                    out.push(Violation::new(
                        "eta.start",
                        format!(
                            "splice_state precondition: outermost ladder scale e^(-2^{}) = {outer:e} must be below 1/n = {radius:e}",
                            eta.start
                        ),
                    ));
                }
            }
        }
        Construction::Oscillation { plan, band_tolerance } => {
            out.extend(nested("plan", plan.validate()));
            if !(*band_tolerance > 0.0) {
                out.push(Violation::new("band_tolerance", "must be positive"));
            }
        }
    }
    out
}

/// Parses and validates a JSON configuration document.
pub fn parse_config(text: &str) -> std::result::Result<ExperimentConfig, Vec<Violation>> {
    let value: serde_json::Value =
        serde_json::from_str(text).map_err(|e| vec![Violation::new("", format!("not valid JSON: {e}"))])?;
    config_from_value(value)
}

pub fn config_from_value(value: serde_json::Value) -> std::result::Result<ExperimentConfig, Vec<Violation>> {
    let config: ExperimentConfig = serde_path_to_error::deserialize(value).map_err(|e| {
        let path = e.path().to_string();
        let path = if path == "." { String::new() } else { path };
        vec![Violation::new(path, e.into_inner().to_string())]
    })?;
    let violations = config.validate();
    if violations.is_empty() {
        Ok(config)
    } else {
        Err(violations)
    }
}

/// The violations of a document; empty when it describes a runnable experiment.
pub fn validate_document(text: &str) -> Vec<Violation> {
    match parse_config(text) {
        Ok(_) => Vec::new(),
        Err(v) => v,
    }
}

pub(crate) fn ensure_valid(config: &ExperimentConfig) -> Result<()> {
    let v = config.validate();
    if v.is_empty() {
        return Ok(());
    }
    let listed: Vec<String> = v.iter().map(|v| v.to_string()).collect();
    Err(Error::validation(Origin::Experiment, listed.join("; ")))
}
