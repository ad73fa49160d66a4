//! Independent reference computations shared by the integration tests.
//! Nothing here calls into the library under test.
#![allow(dead_code, clippy::excessive_precision)]

use std::f64::consts::PI;

// Gauss–Kronrod 7/15 on [-1, 1]: abscissae of the 15-point rule (non-negative half).
const XGK: [f64; 8] = [
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144845693013,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.000000000000000000000000000000000,
];
const WGK: [f64; 8] = [
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
];
// 7-point Gauss weights for XGK[1], XGK[3], XGK[5], XGK[7].
const WG: [f64; 4] = [
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
];

fn kahan(values: impl IntoIterator<Item = f64>) -> f64 {
    let (mut s, mut c) = (0.0f64, 0.0f64);
    for v in values {
        let t = s + v;
        c += if s.abs() >= v.abs() { (s - t) + v } else { (v - t) + s };
        s = t;
    }
    s + c
}

fn gk15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut k = WGK[7] * fc;
    let mut g = WG[3] * fc;
    for i in 0..7 {
        let s = f(c - h * XGK[i]) + f(c + h * XGK[i]);
        k += WGK[i] * s;
        if i % 2 == 1 {
            g += WG[i / 2] * s;
        }
    }
    (k * h, ((k - g) * h).abs())
}

/// Adaptive Gauss–Kronrod integral of `f` over `[a, b]`, starting from
/// `panels` equal pieces; a piece is accepted once its error estimate falls
/// below `abs_tol` scaled by its share of the interval.
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, panels: usize, abs_tol: f64) -> f64 {
    let width = b - a;
    let mut stack: Vec<(f64, f64, u32)> = (0..panels)
        .map(|i| {
            let lo = a + width * i as f64 / panels as f64;
            let hi = a + width * (i + 1) as f64 / panels as f64;
            (lo, hi, 0)
        })
        .collect();
    let mut parts = Vec::new();
    while let Some((lo, hi, depth)) = stack.pop() {
        let (v, err) = gk15(&f, lo, hi);
        if err <= abs_tol * (hi - lo) / width || depth >= 40 {
            parts.push(v);
        } else {
            let mid = 0.5 * (lo + hi);
            stack.push((lo, mid, depth + 1));
            stack.push((mid, hi, depth + 1));
        }
    }
    kahan(parts)
}

/// `(1/t) ∫₀ᵗ |Σ w e^{-isx}|² ds` by quadrature of the integrand itself.
pub fn w_by_quadrature(atoms: &[(f64, f64)], t: f64) -> f64 {
    let sq: f64 = atoms.iter().map(|a| a.1 * a.1).sum();
    let span = atoms.iter().map(|a| a.0).fold(f64::NEG_INFINITY, f64::max)
        - atoms.iter().map(|a| a.0).fold(f64::INFINITY, f64::min);
    let integrand = |s: f64| {
        let (mut re, mut im) = (0.0, 0.0);
        for &(x, w) in atoms {
            let (sn, cs) = (s * x).sin_cos();
            re += w * cs;
            im -= w * sn;
        }
        re * re + im * im
    };
    // about three radians of the fastest phase per starting panel
    let panels = ((t * span.max(1e-300) / 3.0).ceil() as usize).clamp(4, 1 << 20);
    integrate(integrand, 0.0, t, panels, 1e-12 * t * sq) / t
}

/// Level-`level` middle-thirds Cantor atoms: cylinder midpoints
/// `(2n + 1) / (2·3^level)` with `n` having ternary digits in {0, 2}.
pub fn cantor_atoms(level: u32) -> Vec<(f64, f64)> {
    let denom = 2.0 * 3f64.powi(level as i32);
    let w = 0.5f64.powi(level as i32);
    (0u64..1 << level)
        .map(|bits| {
            let mut n = 0u64;
            for i in 0..level {
                n = 3 * n + 2 * ((bits >> (level - 1 - i)) & 1);
            }
            ((2 * n + 1) as f64 / denom, w)
        })
        .collect()
}

pub fn brute_ball(atoms: &[(f64, f64)], x: f64, r: f64) -> f64 {
    kahan(atoms.iter().filter(|a| (a.0 - x).abs() < r).map(|a| a.1))
}

pub fn brute_laplace(atoms: &[(f64, f64)], x: f64, t: f64) -> f64 {
    kahan(atoms.iter().map(|a| a.1 * (-2.0 * t * (a.0 - x).abs()).exp()))
}

pub fn brute_correlation(atoms: &[(f64, f64)], eps: f64) -> f64 {
    kahan(atoms.iter().map(|a| a.1 * brute_ball(atoms, a.0, eps)))
}

/// Correlation integral `Σ_j w_j μ(B(x_j, ε))` of the level-`level` Cantor
/// atoms by self-similarity: cross pairs between the two halves are at least
/// `1/3` apart, so `C_L(ε) = C_{L-1}(3ε) / 2` while `ε ≤ 1/3`.
pub fn cantor_correlation(level: u32, eps: f64) -> f64 {
    if level == 0 {
        return 1.0;
    }
    if eps <= 1.0 / 3.0 {
        return 0.5 * cantor_correlation(level - 1, 3.0 * eps);
    }
    brute_correlation(&cantor_atoms(level), eps)
}

/// Mass of the open interval `(a, b)` under the level-`level` Cantor atoms,
/// by recursion through the two similitudes.
pub fn cantor_interval_mass(level: u32, a: f64, b: f64) -> f64 {
    if b <= 0.0 || a >= 1.0 {
        return 0.0;
    }
    if a < 0.0 && b > 1.0 {
        return 1.0;
    }
    if level == 0 {
        return if a < 0.5 && 0.5 < b { 1.0 } else { 0.0 };
    }
    0.5 * cantor_interval_mass(level - 1, 3.0 * a, 3.0 * b)
        + 0.5 * cantor_interval_mass(level - 1, 3.0 * a - 2.0, 3.0 * b - 2.0)
}

/// Uniform measure on `[0, 1]` as `cells` equal atoms at cell midpoints.
pub fn uniform_atoms(cells: usize) -> Vec<(f64, f64)> {
    let w = 1.0 / cells as f64;
    (0..cells).map(|k| ((k as f64 + 0.5) * w, w)).collect()
}

/// Eigenpairs of the free Jacobi matrix with Dirichlet ends:
/// `2cos(kπ/(N+1))` and the squared amplitude of the eigenvector at `site`
/// (0-based).
pub fn free_spectral_weights(size: usize, site: usize) -> Vec<(f64, f64)> {
    let m = (size + 1) as f64;
    let mut out: Vec<(f64, f64)> = (1..=size)
        .map(|k| {
            let theta = k as f64 * PI / m;
            let s = (theta * (site + 1) as f64).sin();
            (2.0 * theta.cos(), 2.0 / m * s * s)
        })
        .collect();
    out.sort_by(|a, b| a.0.total_cmp(&b.0));
    out
}

pub fn arcsine_cdf(x: f64) -> f64 {
    0.5 + (x.clamp(-2.0, 2.0) / 2.0).asin() / PI
}

/// Ordinary least-squares slope of `y` against `x`.
pub fn ls_slope(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    sxy / sxx
}

pub fn log_slope(x: &[f64], y: &[f64]) -> f64 {
    let lx: Vec<f64> = x.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = y.iter().map(|v| v.ln()).collect();
    ls_slope(&lx, &ly)
}

/// Relative distance, treating two zeros as equal.
pub fn rel_err(a: f64, b: f64) -> f64 {
    if a == b {
        0.0
    } else {
        (a - b).abs() / a.abs().max(b.abs())
    }
}
