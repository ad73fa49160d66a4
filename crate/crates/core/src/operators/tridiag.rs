//! Implicit QL with Wilkinson shifts for symmetric tridiagonal matrices.
//!
//! Instead of accumulating the full eigenvector matrix `Z`, the solver applies
//! each Givens rotation to the row vectors `ψᵀZ` of the requested states. On
//! exit `projections[s][k] = ⟨φ_k, ψ_s⟩`, which is all a spectral measure
//! needs, at O(N²) cost per state.

use crate::error::{Error, Origin, Result};

const MAX_SWEEPS: usize = 60;

#[derive(Debug, Clone)]
pub struct Eigensystem {
    /// Eigenvalues, unsorted (in the order the QL sweep deflates them).
    pub values: Vec<f64>,
    /// `projections[s][k]`: component of state `s` along eigenvector `k`.
    pub projections: Vec<Vec<f64>>,
}

/// Diagonalizes the matrix with main diagonal `diag` and off-diagonal `off`
/// (`off.len() == diag.len() − 1`), projecting each of `states` onto the
/// eigenbasis.
pub fn eigen_projections(diag: &[f64], off: &[f64], states: &[Vec<f64>]) -> Result<Eigensystem> {
    let n = diag.len();
    if n == 0 {
        return Err(Error::validation(
            Origin::Operators,
            "matrix dimension must be positive",
        ));
    }
    if off.len() + 1 != n {
        return Err(Error::validation(
            Origin::Operators,
            format!("off-diagonal has length {}, expected {}", off.len(), n - 1),
        ));
    }
    if let Some(bad) = states.iter().position(|s| s.len() != n) {
        return Err(Error::validation(
            Origin::Operators,
            format!("state {bad} has dimension {}, expected {n}", states[bad].len()),
        ));
    }

    let mut d = diag.to_vec();
    let mut e = off.to_vec();
    e.push(0.0);
    let mut rows: Vec<Vec<f64>> = states.to_vec();

    for l in 0..n {
        let mut sweeps = 0;
        loop {
            let mut m = l;
            while m + 1 < n {
                let dd = d[m].abs() + d[m + 1].abs();
                if e[m].abs() <= f64::EPSILON * dd {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            if sweeps == MAX_SWEEPS {
                return Err(Error::numerical(
                    Origin::Operators,
                    format!(
                        "QL iteration did not converge for eigenvalue {l} of {n} after {MAX_SWEEPS} sweeps \
                         (residual off-diagonal {:e}, diagonal {:e})",
                        e[l], d[l]
                    ),
                ));
            }
            sweeps += 1;

            let mut g = (d[l + 1] - d[l]) / (2.0 * e[l]);
            let mut r = g.hypot(1.0);
            g = d[m] - d[l] + e[l] / (g + r.copysign(g));
            let (mut s, mut c, mut p) = (1.0_f64, 1.0_f64, 0.0_f64);
            let mut deflated_early = false;

            for i in (l..m).rev() {
                let f = s * e[i];
                let b = c * e[i];
                r = f.hypot(g);
                e[i + 1] = r;
                if r == 0.0 {
                    d[i + 1] -= p;
                    e[m] = 0.0;
                    deflated_early = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = d[i + 1] - p;
                r = (d[i] - g) * s + 2.0 * c * b;
                p = s * r;
                d[i + 1] = g + p;
                g = c * r - b;
                for row in rows.iter_mut() {
                    let f = row[i + 1];
                    row[i + 1] = s * row[i] + c * f;
                    row[i] = c * row[i] - s * f;
                }
            }
            if deflated_early {
                continue;
            }
            d[l] -= p;
            e[l] = g;
            e[m] = 0.0;
        }
    }

    Ok(Eigensystem {
        values: d,
        projections: rows,
    })
}
