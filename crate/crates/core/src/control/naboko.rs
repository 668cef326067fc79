//! Resolvent-integral and Cesàro-mean criteria for similarity to isometries.
//!
//! For `ε > 0` the quadratic form `h ↦ ε ∫ ‖C(ε + iξ - A)^{-1}h‖² dξ` equals
//! `2πε ∫₀^∞ e^{-2εt} ‖Ce^{tA}h‖² dt` by Plancherel. The right side is a
//! shifted Lyapunov solve, the left side is integrated numerically on
//! `[-ξ_max, ξ_max]`; the two are reported side by side.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::quad::integrate;
use crate::criteria::is_bounded_group;
use crate::error::{Result, SimError};
use crate::opcore::equations::{integral_gramian, solve_lyapunov};
use crate::opcore::linalg::{herm, herm_eigenvalues, validate, ComplexMatrix};
use crate::opcore::spectral::{eigenvalues, growth_bound, resolvent};

/// Quadrature and probe settings.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct NabokoOptions {
    /// Half-width of the frequency window.
    pub xi_max: f64,
    /// Relative error target of the adaptive quadrature.
    pub tol: f64,
    /// Subinterval budget before the quadrature gives up.
    pub max_pieces: usize,
    /// Random unit probes added to the basis sweep.
    pub random_probes: usize,
    pub seed: u64,
}

impl Default for NabokoOptions {
    fn default() -> Self {
        Self {
            xi_max: 200.0,
            tol: 1e-10,
            max_pieces: 4000,
            random_probes: 32,
            seed: 7,
        }
    }
}

/// Both forms of the resolvent integral at one `ε`.
#[derive(Clone, Debug, PartialEq)]
pub struct NabokoReport {
    pub eps: f64,
    pub xi_max: f64,
    /// Hermitian form of the truncated frequency integral.
    pub quadrature: ComplexMatrix,
    /// Hermitian form `2πε X` with `(A - ε)*X + X(A - ε) = -C*C`.
    pub plancherel: ComplexMatrix,
    /// Extremes over unit `h` of the quadrature form.
    pub quad_min: f64,
    pub quad_max: f64,
    pub plancherel_min: f64,
    pub plancherel_max: f64,
    /// `(quadrature, plancherel)` values at the basis vectors followed by the random probes.
    pub probes: Vec<(f64, f64)>,
    /// Largest relative gap between the two forms over the probes.
    pub max_relative_gap: f64,
    /// Error estimate of the quadrature.
    pub quad_error: f64,
}

fn probes(n: usize, extra: usize, seed: u64) -> Vec<Vec<Complex64>> {
    let mut out: Vec<Vec<Complex64>> = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| Complex64::new(if i == j { 1.0 } else { 0.0 }, 0.0))
                .collect()
        })
        .collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..extra {
        let v: Vec<Complex64> = (0..n)
            .map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
            .collect();
        let nrm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        out.push(v.into_iter().map(|z| z / nrm).collect());
    }
    out
}

fn form_value(q: &ComplexMatrix, h: &[Complex64]) -> f64 {
    let mut acc = Complex64::new(0.0, 0.0);
    for i in 0..h.len() {
        for j in 0..h.len() {
            acc += h[i].conj() * q[(i, j)] * h[j];
        }
    }
    acc.re
}

/// Resolvent integral of `(A, C)` at `ε`; `C` defaults to the identity.
pub fn naboko_integral(
    a: &ComplexMatrix,
    c: Option<&ComplexMatrix>,
    eps: f64,
    opts: &NabokoOptions,
) -> Result<NabokoReport> {
    validate(a)?;
    let n = a.nrows();
    let c = c.cloned().unwrap_or_else(|| ComplexMatrix::identity(n, n));
    if c.ncols() != n {
        return Err(SimError::DimensionMismatch {
            expected: n,
            found: c.ncols(),
        });
    }
    if !(eps > 0.0) || !eps.is_finite() || !(opts.xi_max > 0.0) {
        return Err(SimError::Domain(format!(
            "need eps > 0 and xi_max > 0, got {eps} and {}",
            opts.xi_max
        )));
    }
    let g = growth_bound(a)?;
    if g > 1e-10 {
        return Err(SimError::Precondition(format!(
            "spectrum must lie in the closed left half-plane (growth bound {g:.3e})"
        )));
    }
    let cc = herm(&(c.adjoint() * &c));
    let z = |xi: f64| Complex64::new(eps, xi);
    let breaks: Vec<f64> = eigenvalues(a)?.iter().map(|l| l.im).collect();
    let (sum, quad_error) = integrate(
        |xi| {
            let r = resolvent(a, z(xi))?;
            Ok(r.adjoint() * &cc * r)
        },
        -opts.xi_max,
        opts.xi_max,
        &breaks,
        opts.tol,
        opts.max_pieces,
    )?;
    let quadrature = herm(&(sum * Complex64::new(eps, 0.0)));
    let shifted = a - ComplexMatrix::identity(n, n) * Complex64::new(eps, 0.0);
    let plancherel = herm(
        &(solve_lyapunov(&shifted, &cc)? * Complex64::new(2.0 * std::f64::consts::PI * eps, 0.0)),
    );
    let (qe, pe) = (herm_eigenvalues(&quadrature), herm_eigenvalues(&plancherel));
    let probe_values: Vec<(f64, f64)> = probes(n, opts.random_probes, opts.seed)
        .iter()
        .map(|h| (form_value(&quadrature, h), form_value(&plancherel, h)))
        .collect();
    let max_relative_gap = probe_values
        .iter()
        .map(|&(q, p)| {
            if p.abs() > 0.0 {
                (q - p).abs() / p.abs()
            } else {
                q.abs()
            }
        })
        .fold(0.0, f64::max);
    Ok(NabokoReport {
        eps,
        xi_max: opts.xi_max,
        quad_min: qe[0],
        quad_max: qe[n - 1],
        plancherel_min: pe[0],
        plancherel_max: pe[n - 1],
        quadrature,
        plancherel,
        probes: probe_values,
        max_relative_gap,
        quad_error,
    })
}

/// Cesàro means `(1/t) ∫₀ᵗ ‖Ce^{sA}h‖² ds` on a dyadic grid ending at `t_max`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CesaroReport {
    pub t_max: f64,
    /// `(t, min_h, max_h)` over unit `h`, for `t = t_max 2^{-7}, …, t_max`.
    pub means: Vec<(f64, f64, f64)>,
    /// Smallest and largest mean at `t_max`.
    pub alpha: f64,
    pub beta: f64,
    /// Extremes over the upper half of the grid.
    pub liminf_estimate: f64,
    pub limsup_estimate: f64,
    pub positive: bool,
}

/// Two-sided Cesàro bounds of the output energy.
///
/// A finite horizon cannot separate a positive limit from `1/t` decay, so a
/// positive verdict also requires the semigroup to extend to a bounded group.
pub fn cesaro_orbit_mean(a: &ComplexMatrix, c: &ComplexMatrix, t_max: f64) -> Result<CesaroReport> {
    validate(a)?;
    if c.ncols() != a.nrows() {
        return Err(SimError::DimensionMismatch {
            expected: a.nrows(),
            found: c.ncols(),
        });
    }
    if !(t_max > 0.0) || !t_max.is_finite() {
        return Err(SimError::Domain(format!(
            "t_max must be positive, got {t_max}"
        )));
    }
    let cc = herm(&(c.adjoint() * c));
    let means = (0..=7)
        .rev()
        .map(|k| {
            let t = t_max / 2f64.powi(k);
            let ev =
                herm_eigenvalues(&(integral_gramian(a, &cc, t)? * Complex64::new(1.0 / t, 0.0)));
            Ok((t, ev[0], ev[ev.len() - 1]))
        })
        .collect::<Result<Vec<_>>>()?;
    let tail = &means[4..];
    let liminf_estimate = tail.iter().map(|m| m.1).fold(f64::INFINITY, f64::min);
    let limsup_estimate = tail.iter().map(|m| m.2).fold(0.0, f64::max);
    let &(_, alpha, beta) = means.last().expect("eight grid points");
    let positive = liminf_estimate > 1e-8 * limsup_estimate.max(1.0) && is_bounded_group(a)?;
    Ok(CesaroReport {
        t_max,
        means,
        alpha,
        beta,
        liminf_estimate,
        limsup_estimate,
        positive,
    })
}
