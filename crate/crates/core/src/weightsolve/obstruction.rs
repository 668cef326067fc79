//! Spectral obstructions and cheap lower bounds for similarity constants.
//!
//! An operator is similar to a contraction only if its spectrum lies in the
//! closed unit disc and every eigenvalue on the circle is semisimple; the
//! continuous analogue replaces the disc by a half-plane. These are the only
//! grounds on which the solvers report an unbounded constant.

use num_complex::Complex64;

use crate::error::Result;
use crate::opcore::expm::expm_semigroup;
use crate::opcore::linalg::{powi, ComplexMatrix};
use crate::opcore::spectral::{eigenvalues, operator_norm};

/// Margin by which the spectrum must leave the admissible region.
pub const SPECTRAL_MARGIN: f64 = 1e-10;
/// Distance from the boundary below which eigenvalues are tested for defectiveness.
const BOUNDARY_BAND: f64 = 1e-8;
/// Radius used to group numerically split eigenvalues.
const CLUSTER_RADIUS: f64 = 1e-6;

/// Number of singular values of `m` below `thresh`.
fn null_dim(m: &ComplexMatrix, thresh: f64) -> usize {
    m.clone()
        .singular_values()
        .iter()
        .filter(|&&s| s <= thresh)
        .count()
}

/// Finds a boundary eigenvalue whose geometric multiplicity is below its algebraic one.
fn defective_on_boundary(
    m: &ComplexMatrix,
    eigs: &[Complex64],
    on_boundary: impl Fn(Complex64) -> bool,
) -> Option<Complex64> {
    let n = m.nrows();
    let scale = 1.0 + operator_norm(m);
    for &mu in eigs.iter().filter(|&&z| on_boundary(z)) {
        let cluster: Vec<Complex64> = eigs
            .iter()
            .copied()
            .filter(|z| (z - mu).norm() <= CLUSTER_RADIUS * scale)
            .collect();
        let alg = cluster.len();
        if alg < 2 {
            continue;
        }
        let centre = cluster.iter().sum::<Complex64>() / alg as f64;
        let shifted = m - ComplexMatrix::identity(n, n) * centre;
        if null_dim(&shifted, CLUSTER_RADIUS * scale) < alg {
            return Some(centre);
        }
    }
    None
}

/// Reason a discrete operator cannot be similar to a contraction, if any.
pub fn discrete_obstruction(t: &ComplexMatrix) -> Result<Option<String>> {
    let eigs = eigenvalues(t)?;
    let r = eigs.iter().map(|z| z.norm()).fold(0.0, f64::max);
    if r > 1.0 + SPECTRAL_MARGIN {
        return Ok(Some(format!("spectral radius {r:.12} exceeds 1")));
    }
    if let Some(mu) = defective_on_boundary(t, &eigs, |z| (z.norm() - 1.0).abs() <= BOUNDARY_BAND) {
        return Ok(Some(format!(
            "defective eigenvalue {mu} on the unit circle"
        )));
    }
    Ok(None)
}

/// Reason `e^{-λt} e^{tA}` cannot be similar to a contraction semigroup, if any.
pub fn continuous_obstruction(a: &ComplexMatrix, shift: f64) -> Result<Option<String>> {
    let eigs = eigenvalues(a)?;
    let g = eigs.iter().map(|z| z.re).fold(f64::NEG_INFINITY, f64::max);
    if g > shift + SPECTRAL_MARGIN {
        return Ok(Some(format!("growth bound {g:.12} exceeds shift {shift}")));
    }
    if let Some(mu) = defective_on_boundary(a, &eigs, |z| (z.re - shift).abs() <= BOUNDARY_BAND) {
        return Ok(Some(format!(
            "defective eigenvalue {mu} on the line Re z = {shift}"
        )));
    }
    Ok(None)
}

/// `sup_j ‖T^j‖` over `j ≤ 64` and dyadic powers up to `2^16`; a lower bound for `C(T)`.
pub fn power_norm_bound(t: &ComplexMatrix) -> f64 {
    let n = t.nrows();
    let mut best = 1.0f64;
    let mut p = ComplexMatrix::identity(n, n);
    for _ in 0..64 {
        p = &p * t;
        let v = operator_norm(&p);
        best = best.max(v);
        if v < 1e-300 {
            return best;
        }
    }
    let mut q = powi(t, 64);
    for _ in 0..10 {
        q = &q * &q;
        let v = operator_norm(&q);
        if !v.is_finite() {
            break;
        }
        best = best.max(v);
        if v < 1e-300 {
            break;
        }
    }
    best
}

/// `sup_t e^{-λt}‖e^{tA}‖` over a geometric time grid; a lower bound for the shifted constant.
pub fn orbit_norm_bound(a: &ComplexMatrix, shift: f64) -> Result<f64> {
    let n = a.nrows();
    let m = a - ComplexMatrix::identity(n, n) * Complex64::new(shift, 0.0);
    let scale = operator_norm(&m);
    if scale == 0.0 {
        return Ok(1.0);
    }
    let base = 1.0 / scale;
    let mut best = 1.0f64;
    let mut small = 0;
    for k in -24..160 {
        let t = base * 2f64.powf(k as f64 / 4.0);
        let v = operator_norm(&expm_semigroup(&m, t)?);
        best = best.max(v);
        // Stop once the orbit has decayed for a sustained stretch.
        small = if v < 1e-3 * best { small + 1 } else { 0 };
        if small >= 8 || t > 1e8 {
            break;
        }
    }
    Ok(best)
}
