//! Acceptance criteria. Each criterion prints one PASS/FAIL line; the binary
//! exits non-zero when any criterion fails.

mod common;

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use common::*;
use specdyn::constructors::*;
use specdyn::dimensions::*;
use specdyn::dynamics::*;
use specdyn::experiment::random_measure;
use specdyn::numeric::geometric_grid;
use specdyn::operators::*;
use specdyn::{refine, AtomicMeasure, BallQuery, MeasureSpec};

const SEED: u64 = 20_240_917;
const ROUNDING: f64 = 4.0 * f64::EPSILON;

struct Verdict {
    passed: bool,
    detail: String,
}

fn verdict(passed: bool, detail: String) -> Verdict {
    Verdict { passed, detail }
}

fn cantor_alpha() -> f64 {
    2f64.ln() / 3f64.ln()
}

fn cantor(level: u32) -> AtomicMeasure {
    refine(&MeasureSpec::cantor(), level).unwrap()
}

fn uniform(level: u32) -> AtomicMeasure {
    refine(&MeasureSpec::uniform(0.0, 1.0), level).unwrap()
}

fn atoms_of(mu: &AtomicMeasure) -> Vec<(f64, f64)> {
    mu.atoms().collect()
}

fn ball(mu: &AtomicMeasure, x: f64, r: f64) -> f64 {
    mu.ball_mass(BallQuery::new(x, r).unwrap())
}

/// `3^{k/2}` lattice between `min` and `max`.
fn lattice(min: f64, max: f64) -> ScaleGrid {
    ScaleGrid::Lattice {
        base: 3.0,
        per_factor: 2,
        min,
        max,
    }
}

fn cantor_d2_grid() -> ScaleGrid {
    lattice(3f64.powi(-9), 3f64.powi(-3))
}

fn random_fixtures() -> Vec<AtomicMeasure> {
    (0..20u64)
        .map(|i| random_measure(SEED + i, 7 + 3 * i as usize, (-2.0, 2.0)))
        .collect()
}

fn w_series(mu: &AtomicMeasure, grid: Vec<f64>) -> LogSeries {
    sample_w_on(mu, grid, &ReturnProbabilityOptions::default()).unwrap()
}

fn c1_quadrature() -> Verdict {
    let times = geometric_grid(1.0, 1e4, 10);
    let fixtures = random_fixtures();
    let worst = fixtures
        .par_iter()
        .map(|mu| {
            let atoms = atoms_of(mu);
            times
                .iter()
                .map(|&t| rel_err(return_probability_avg(mu, t).unwrap(), w_by_quadrature(&atoms, t)))
                .fold(0.0, f64::max)
        })
        .reduce(|| 0.0, f64::max);
    let max_atoms = fixtures.iter().map(|m| m.len()).max().unwrap();
    verdict(
        worst <= 1e-6 && max_atoms <= 64,
        format!("max relative error {worst:.2e} <= 1e-6 over 20 measures (<= {max_atoms} atoms) x 10 times"),
    )
}

fn c2_wiener() -> Verdict {
    let mut worst_ratio = 0.0f64;
    for mu in random_fixtures() {
        let atoms = atoms_of(&mu);
        let sq: f64 = atoms.iter().map(|a| a.1 * a.1).sum();
        let mass: f64 = atoms.iter().map(|a| a.1).sum();
        let gap = atoms.windows(2).map(|p| p[1].0 - p[0].0).fold(f64::INFINITY, f64::min);
        let gap = if gap.is_finite() { gap } else { 1.0 };
        let t = 1e3 / gap;
        let w = return_probability_avg(&mu, t).unwrap();
        let bound = 2.0 * mass * mass / (t * gap);
        worst_ratio = worst_ratio.max((w - sq).abs() / bound);
    }
    verdict(
        worst_ratio <= 1.0,
        format!("max |W(T) - sum w^2| / bound = {worst_ratio:.3} <= 1 at T = 1e3/min-gap"),
    )
}

fn c3_cantor_d2() -> Verdict {
    let alpha = cantor_alpha();
    let mu = cantor(14);
    let oracle_atoms = cantor_atoms(14);
    let position_err = mu
        .positions()
        .iter()
        .zip(&oracle_atoms)
        .map(|(a, b)| (a - b.0).abs())
        .fold(0.0, f64::max);
    let grid = cantor_d2_grid();
    let scales = grid.scales().unwrap();
    let lib: Vec<f64> = scales.iter().map(|&e| correlation_integral(&mu, e)).collect();
    let oracle: Vec<f64> = scales.iter().map(|&e| cantor_correlation(14, e)).collect();
    let value_err = lib
        .iter()
        .zip(&oracle)
        .map(|(a, b)| rel_err(*a, *b))
        .fold(0.0, f64::max);
    let oracle_slope = log_slope(&scales, &oracle);
    let est = generalized_dimension(&mu, 2.0, &grid, &EnvelopeConfig::default()).unwrap();
    let ok = mu.len() == oracle_atoms.len()
        && position_err <= 1e-15
        && scales.len() == 13
        && value_err <= 1e-12
        && (oracle_slope - alpha).abs() <= 0.02
        && (est.lower - alpha).abs() <= 0.02
        && (est.upper - alpha).abs() <= 0.02;
    verdict(
        ok,
        format!(
            "D2 in [{:.4}, {:.4}], oracle fit {oracle_slope:.4}, target {alpha:.4} +/- 0.02; \
             correlation vs IFS recursion {value_err:.1e}",
            est.lower, est.upper
        ),
    )
}

/// Exact correlation integral of `cells` equal midpoint atoms on `[0, 1]`.
fn uniform_correlation(cells: u64, eps: f64) -> f64 {
    let n = cells as f64;
    let dmax = ((eps * n).ceil() as u64).saturating_sub(1).min(cells - 1);
    let pairs = cells + 2 * (1..=dmax).map(|d| cells - d).sum::<u64>();
    pairs as f64 / (n * n)
}

fn c4_identity() -> Verdict {
    let mut lines = Vec::new();
    let mut ok = true;
    let fixtures: [(&str, AtomicMeasure, ScaleGrid, AtomicMeasure, Vec<f64>); 2] = [
        (
            "cantor",
            cantor(14),
            cantor_d2_grid(),
            cantor(12),
            lattice(10.0, 1e4).scales().unwrap(),
        ),
        (
            "uniform",
            uniform(16),
            ScaleGrid::geometric(1e-3, 1e-1, 41),
            uniform(12),
            geometric_grid(10.0, 1e3, 41),
        ),
    ];
    for (name, d2_mu, grid, w_mu, times) in fixtures {
        let scales = grid.scales().unwrap();
        let oracle_err = scales
            .iter()
            .map(|&e| {
                let exact = if name == "cantor" {
                    cantor_correlation(14, e)
                } else {
                    uniform_correlation(1 << 16, e)
                };
                rel_err(correlation_integral(&d2_mu, e), exact)
            })
            .fold(0.0, f64::max);
        let d2 = generalized_dimension(&d2_mu, 2.0, &grid, &EnvelopeConfig::default()).unwrap();
        let w = envelope_slopes(&w_series(&w_mu, times), &EnvelopeConfig::default()).unwrap();
        let gap_a = (-w.upper - d2.lower).abs();
        let gap_b = (-w.lower - d2.upper).abs();
        ok &= gap_a <= 0.07 && gap_b <= 0.07 && oracle_err <= 1e-12;
        lines.push(format!(
            "{name}: -W+ {:.3} vs D2- {:.3}, -W- {:.3} vs D2+ {:.3}",
            -w.upper, d2.lower, -w.lower, d2.upper
        ));
    }
    verdict(ok, format!("{} (tolerance 0.07)", lines.join("; ")))
}

fn c5_last_theorem() -> Verdict {
    let alpha = cantor_alpha();
    let w = w_series(&cantor(12), lattice(10.0, 1e4).scales().unwrap());
    let scaled: Vec<f64> = w
        .grid()
        .iter()
        .zip(w.values())
        .map(|(t, v)| t.powf(alpha) * v)
        .collect();
    let slope = log_slope(w.grid(), &scaled);
    let sup = scaled.iter().copied().fold(0.0, f64::max);
    verdict(
        slope.abs() <= 0.05,
        format!("log-log slope of t^a W(t) = {slope:.4} within 0 +/- 0.05 (sup {sup:.3})"),
    )
}

/// Sup of the open-interval mass over anchors `first - h + i·h/4`, by the IFS recursion.
fn oracle_modulus(level: u32, h: f64) -> f64 {
    let first = 0.5 * 3f64.powi(-(level as i32));
    let stride = h / 4.0;
    let anchors = ((1.0 + h) / stride).ceil() as usize + 1;
    (0..anchors)
        .into_par_iter()
        .map(|i| {
            let a = first - h + i as f64 * stride;
            cantor_interval_mass(level, a, a + h)
        })
        .reduce(|| 0.0, f64::max)
}

fn c6_uah() -> Verdict {
    let alpha = cantor_alpha();
    let mu = cantor(14);
    let scales: Vec<f64> = (1..=10).map(|m| 3f64.powi(-m)).collect();
    let opts = UahOptions::default();
    let at = uah_modulus(&mu, alpha, &scales, &opts).unwrap();
    let above = uah_modulus(&mu, alpha + 0.1, &scales, &opts).unwrap();
    let oracle: Vec<f64> = scales.iter().map(|&h| oracle_modulus(14, h)).collect();
    // edges may land on atoms; allow one atom on each side
    let mass_err = at
        .samples
        .iter()
        .zip(&oracle)
        .map(|(&(h, m), o)| (m * h.powf(alpha) - o).abs())
        .fold(0.0, f64::max);
    let inv: Vec<f64> = scales.iter().map(|h| 1.0 / h).collect();
    let growth = |a: f64| {
        log_slope(
            &inv,
            &scales
                .iter()
                .zip(&oracle)
                .map(|(h, o)| o / h.powf(a))
                .collect::<Vec<_>>(),
        )
    };
    let (g_at, g_above) = (growth(alpha), growth(alpha + 0.1));
    let ok = at.verdict == UahVerdict::BoundedAtTestedScales
        && above.verdict == UahVerdict::Diverging
        && above.growth_exponent > 3.0 * above.growth_stderr
        && mass_err <= 2.0 * 0.5f64.powi(14)
        && g_at.abs() <= 0.03
        && g_above > 0.07;
    verdict(
        ok,
        format!(
            "growth at a {:.4} (bounded), at a+0.1 {:.4} > 3 x {:.1e} (diverging); \
             IFS oracle growth {g_at:.4} / {g_above:.4}, interval-mass error {mass_err:.1e}",
            at.growth_exponent, above.growth_exponent, above.growth_stderr
        ),
    )
}

fn c7_sandwich() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let mut violations = 0usize;
    let mut mismatch = 0.0f64;
    for _ in 0..1000 {
        let count = rng.random_range(1..=64);
        let mu =
            AtomicMeasure::from_atoms((0..count).map(|_| (rng.random_range(-2.0..2.0), rng.random_range(0.1..1.0))))
                .unwrap();
        let x = rng.random_range(-2.5..2.5);
        let t = 10f64.powf(rng.random_range(-1.0..4.0));
        let delta = rng.random_range(0.01..0.99);
        let atoms = atoms_of(&mu);
        let mass: f64 = atoms.iter().map(|a| a.1).sum();
        let lower = (-2.0f64).exp() * brute_ball(&atoms, x, 1.0 / t);
        let upper = brute_ball(&atoms, x, t.powf(delta - 1.0)) + (-t.powf(delta)).exp() * mass;
        let laplace = brute_laplace(&atoms, x, t);
        let lib_laplace = mu.laplace_transform(x, t);
        let lib_lower = (-2.0f64).exp() * ball(&mu, x, 1.0 / t);
        let lib_upper = ball(&mu, x, t.powf(delta - 1.0)) + (-t.powf(delta)).exp() * mu.total_mass();
        mismatch = mismatch
            .max(rel_err(laplace, lib_laplace))
            .max(rel_err(lower, lib_lower))
            .max(rel_err(upper, lib_upper));
        for (lo, mid, hi) in [(lower, laplace, upper), (lib_lower, lib_laplace, lib_upper)] {
            if lo > mid * (1.0 + ROUNDING) || mid > hi * (1.0 + ROUNDING) {
                violations += 1;
            }
        }
    }
    verdict(
        violations == 0 && mismatch <= 1e-12,
        format!("{violations} violations in 1000 samples; library vs direct sums {mismatch:.1e}"),
    )
}

fn c8_routes() -> Verdict {
    let mut ok = true;
    let mut lines = Vec::new();
    let fixtures = [
        ("cantor", cantor(14), 0.0, cantor_d2_grid()),
        ("uniform", uniform(16), 0.5, ScaleGrid::geometric(1e-3, 1e-1, 41)),
    ];
    for (name, mu, x, grid) in fixtures {
        let scales = grid.scales().unwrap();
        let balls = route_profile(&mu, x, &scales, Route::Ball);
        let laplace = route_profile(&mu, x, &scales, Route::Laplace);
        // ball masses are exact; Laplace values carry the midpoint-rule error of the refinement
        let (ball_err, laplace_err) = if name == "cantor" {
            // B(0, 3^-m) holds exactly the level-m cylinder at 0
            let err = scales
                .iter()
                .zip(&balls)
                .filter_map(|(e, b)| {
                    let m = -e.ln() / 3f64.ln();
                    ((m - m.round()).abs() < 1e-9).then(|| rel_err(*b, 0.5f64.powi(m.round() as i32)))
                })
                .fold(0.0, f64::max);
            (err, 0.0)
        } else {
            let cells = (1u64 << 16) as f64;
            scales
                .iter()
                .zip(balls.iter().zip(&laplace))
                .map(|(&e, (&b, &l))| {
                    // atoms (k + 1/2)/N with |k + 1/2 - N/2| < εN
                    let inside = 2.0 * (e * cells + 0.5).ceil() - 2.0;
                    let t = 1.0 / e;
                    (rel_err(b, inside / cells), rel_err(l, -(-t).exp_m1() / t))
                })
                .fold((0.0f64, 0.0f64), |a, b| (a.0.max(b.0), a.1.max(b.1)))
        };
        let est: Vec<ScalingEstimate> = [Route::Ball, Route::Laplace]
            .into_iter()
            .map(|r| pointwise_exponents(&mu, x, &grid, &PointwiseOptions::route(r)).unwrap())
            .collect();
        let gap = (est[0].lower - est[1].lower)
            .abs()
            .max((est[0].upper - est[1].upper).abs());
        ok &= gap <= 0.05 && ball_err <= 1e-12 && laplace_err <= 1e-4;
        lines.push(format!(
            "{name} at x={x}: ball [{:.3}, {:.3}] laplace [{:.3}, {:.3}] gap {gap:.3}",
            est[0].lower, est[0].upper, est[1].lower, est[1].upper
        ));
    }
    verdict(ok, format!("{} (tolerance 0.05)", lines.join("; ")))
}

fn c9_constructive() -> Verdict {
    // slow ladder: tail sums from every level, exact in binary
    let schedule = SlowSchedule::new(0.0, MAX_SLOW_DEPTH);
    let slow = slow_measure(&schedule).unwrap();
    let mut tail_failures = 0;
    for j in 1..=MAX_SLOW_DEPTH {
        let exact: f64 = (j..=MAX_SLOW_DEPTH).map(|k| 0.5f64.powi(k as i32)).sum();
        let seen = ball(&slow, 0.0, slow_scale(j).next_up());
        if !(exact >= 0.5f64.powi(j as i32) && seen == exact) {
            tail_failures += 1;
        }
    }
    tail_failures += schedule.validate().len();

    // splice: the ball at x sees only the spliced measure
    let x = 0.5;
    let base = cantor(10);
    let mut splice_checks = 0usize;
    let mut splice_failures = 0usize;
    for n in [2u32, 4, 8, 10, 16, 64, 100, 1000] {
        let r = 1.0 / n as f64;
        let start = (1..).find(|&j| slow_scale(j) < r).unwrap();
        let ladder = slow_measure(&SlowSchedule::new(x, MAX_SLOW_DEPTH).starting_at(start)).unwrap();
        let spread =
            AtomicMeasure::from_atoms([(x - 0.5 * r, 0.25), (x + 0.25 * r, 0.5), (x + 0.9 * r, 0.25)]).unwrap();
        for eta in [ladder, spread] {
            let out = splice_state(&base, &eta, n, x).unwrap();
            let scaled = eta.scaled(r * r).unwrap();
            let mut radii = geometric_grid(1e-12 * r, r * (1.0 - 1e-9), 60);
            radii.extend((1..=MAX_SLOW_DEPTH).map(|j| slow_scale(j).next_up()).filter(|&e| e < r));
            for e in radii {
                splice_checks += 1;
                let got = ball(&out, x, e);
                let mut exact = got.to_bits() == ball(&scaled, x, e).to_bits();
                if n.is_power_of_two() {
                    exact &= got.to_bits() == (ball(&eta, x, e) / (n as f64 * n as f64)).to_bits();
                }
                if !exact {
                    splice_failures += 1;
                }
            }
        }
    }

    // smoothing: Laplace at x bounded by nρ/(2^ρ t^ρ)·mass
    let slow_far = slow_measure(&SlowSchedule::new(0.25, 6)).unwrap();
    let bases: [(AtomicMeasure, f64); 4] = [
        (cantor(10), 0.5),
        (cantor(10), 0.0),
        (uniform(10), 0.5),
        (slow_far, 0.25),
    ];
    let mut smooth_checks = 0usize;
    let mut smooth_failures = 0usize;
    for (mu, x) in &bases {
        let mass = mu.total_mass();
        for rho in [0.25, 0.5, 1.0, 2.0] {
            for n in [10.0, 1e2, 1e3, 1e4] {
                let s = smooth_state(mu, *x, rho, n).unwrap();
                let atoms = atoms_of(&s);
                for t in geometric_grid(1.0, 1e6, 25) {
                    smooth_checks += 1;
                    let bound = n * rho / (2f64.powf(rho) * t.powf(rho)) * mass;
                    let lib = s.laplace_transform(*x, t);
                    let direct = brute_laplace(&atoms, *x, t);
                    if lib.max(direct) > bound * (1.0 + ROUNDING) {
                        smooth_failures += 1;
                    }
                }
            }
        }
    }
    verdict(
        tail_failures == 0 && splice_failures == 0 && smooth_failures == 0,
        format!(
            "slow tails {} of {MAX_SLOW_DEPTH} failing; splice {splice_failures} of {splice_checks} \
             not bitwise; smooth bound {smooth_failures} of {smooth_checks} violated",
            tail_failures
        ),
    )
}

fn c10_oscillation() -> Verdict {
    let plan = OscillationPlan::alternating(0.0, 3.0);
    let slopes: Vec<f64> = plan.blocks.iter().map(|b| b.slope).collect();
    let mu = oscillating_measure(&plan).unwrap();
    let grid = ScaleGrid::geometric(1e-7, 1e-1, 121);
    let scales = grid.scales().unwrap();
    let atoms = atoms_of(&mu);
    let ball_err = route_profile(&mu, plan.center, &scales, Route::Ball)
        .iter()
        .zip(&scales)
        .map(|(b, &e)| rel_err(*b, brute_ball(&atoms, plan.center, e)))
        .fold(0.0, f64::max);
    let est = pointwise_exponents(&mu, plan.center, &grid, &PointwiseOptions::default()).unwrap();
    let w = envelope_slopes(
        &w_series(&mu, geometric_grid(1e2, 1e8, 121)),
        &EnvelopeConfig::default(),
    )
    .unwrap();
    let w_needed = -0.8 * est.upper.min(1.0);
    let ok = slopes == [0.0, 3.0, 0.0, 3.0]
        && ball_err <= 1e-12
        && est.lower <= 0.2
        && est.upper >= 2.5
        && w.lower <= w_needed
        && w.upper >= -0.1;
    verdict(
        ok,
        format!(
            "pointwise [{:.3}, {:.3}] (need <= 0.2, >= 2.5); W slopes span [{:.3}, {:.3}] \
             (need [{w_needed:.3}, -0.1]); {} atoms",
            est.lower,
            est.upper,
            w.lower,
            w.upper,
            mu.len()
        ),
    )
}

fn c11_free() -> Verdict {
    let size = 4096;
    let op = JacobiOperator::free(size).unwrap();
    let mu = spectral_measure(&op, &State::Site { site: 0 }).unwrap();
    let exact = free_spectral_weights(size, (-op.first_site()) as usize);
    let exact: Vec<(f64, f64)> = exact.into_iter().filter(|a| a.1 > 1e-20).collect();
    let spectral_err = if exact.len() == mu.len() {
        mu.atoms()
            .zip(&exact)
            .map(|((x, w), e)| (x - e.0).abs().max((w - e.1).abs()))
            .fold(0.0, f64::max)
    } else {
        f64::INFINITY
    };
    let mut cum = 0.0;
    let mut sup = 0.0f64;
    for (x, w) in mu.atoms() {
        let f = arcsine_cdf(x);
        sup = sup.max((cum - f).abs());
        cum += w;
        sup = sup.max((cum - f).abs());
    }
    let w = w_series(&mu, geometric_grid(10.0, 1e3, 41));
    let slope = log_slope(w.grid(), w.values());
    verdict(
        sup <= 0.02 && (slope + 1.0).abs() <= 0.1 && spectral_err <= 1e-12,
        format!(
            "arcsine sup error {sup:.2e} <= 0.02; W slope {slope:.4} vs -1 +/- 0.1; \
             eigenpairs vs closed form {spectral_err:.1e}"
        ),
    )
}

fn c12_sturmian() -> Verdict {
    let size = 2048;
    let params = SturmianParams {
        coupling: 2.0,
        rotation: Rotation::GoldenMean,
        phase: 0.0,
    };
    let op = JacobiOperator::sturmian(size, &params).unwrap();
    let mu = spectral_measure(&op, &State::Site { site: 0 }).unwrap();

    // dense eigendecomposition as a cross-check of the Laplace transform
    let dense = nalgebra::DMatrix::from_fn(size, size, |i, j| {
        if i == j {
            op.potential()[i]
        } else if i.abs_diff(j) == 1 {
            1.0
        } else {
            0.0
        }
    });
    let eig = nalgebra::SymmetricEigen::new(dense);
    let row = (-op.first_site()) as usize;
    let mut laplace_err = 0.0f64;
    for (x, t) in [(0.0, 1.0), (-1.3, 10.0), (1.7, 100.0), (0.4, 1e3)] {
        let direct: f64 = (0..size)
            .map(|k| eig.eigenvectors[(row, k)].powi(2) * (-2.0 * t * (eig.eigenvalues[k] - x).abs()).exp())
            .sum();
        laplace_err = laplace_err.max((mu.laplace_transform(x, t) - direct).abs());
    }

    let d2 = generalized_dimension(
        &mu,
        2.0,
        &ScaleGrid::geometric(1e-4, 1e-1, 61),
        &EnvelopeConfig::default(),
    )
    .unwrap();
    let w = w_series(&mu, geometric_grid(10.0, 1e3, 41));
    let slope = log_slope(w.grid(), w.values());
    let inside = |v: f64, lo: f64, hi: f64| lo < v && v < hi;
    let ok = inside(d2.lower, 0.05, 0.95)
        && inside(d2.upper, 0.05, 0.95)
        && inside(slope, -0.95, -0.05)
        && (mu.total_mass() - 1.0).abs() <= 1e-10
        && laplace_err <= 1e-10;
    verdict(
        ok,
        format!(
            "D2 in [{:.3}, {:.3}] inside (0.05, 0.95); W slope {slope:.4} inside (-0.95, -0.05); \
             Laplace vs dense eigensolver {laplace_err:.1e}",
            d2.lower, d2.upper
        ),
    )
}

/// Name, wall-clock limit in seconds, check.
type Criterion = (&'static str, f64, fn() -> Verdict);

fn main() {
    let criteria: [Criterion; 12] = [
        ("quadrature oracle equivalence", 60.0, c1_quadrature),
        ("Wiener limit", f64::INFINITY, c2_wiener),
        ("Cantor correlation dimension", 120.0, c3_cantor_d2),
        ("W envelopes vs D2 envelopes", f64::INFINITY, c4_identity),
        ("t^a W(t) without growth", f64::INFINITY, c5_last_theorem),
        ("UaH modulus", f64::INFINITY, c6_uah),
        ("ball/Laplace sandwich", f64::INFINITY, c7_sandwich),
        ("pointwise route agreement", f64::INFINITY, c8_routes),
        ("constructive identities", f64::INFINITY, c9_constructive),
        ("oscillation witness", 300.0, c10_oscillation),
        ("free Laplacian", f64::INFINITY, c11_free),
        ("Sturmian smoke check", f64::INFINITY, c12_sturmian),
    ];
    let mut failed = 0;
    for (i, (name, limit, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let v = catch_unwind(AssertUnwindSafe(run)).unwrap_or_else(|e| {
            let msg = e
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            verdict(false, format!("panicked: {msg}"))
        });
        let secs = start.elapsed().as_secs_f64();
        let in_time = secs < *limit;
        let passed = v.passed && in_time;
        if !passed {
            failed += 1;
        }
        let budget = if limit.is_finite() {
            format!(", limit {limit:.0} s{}", if in_time { "" } else { " EXCEEDED" })
        } else {
            String::new()
        };
        println!(
            "criterion {:>2} [{}] {name}: {} ({secs:.1} s{budget})",
            i + 1,
            if passed { "PASS" } else { "FAIL" },
            v.detail
        );
    }
    println!(
        "acceptance: {} of {} criteria passed",
        criteria.len() - failed,
        criteria.len()
    );
    if failed > 0 {
        std::process::exit(1);
    }
}
