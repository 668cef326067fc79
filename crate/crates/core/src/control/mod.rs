//! Observation operators: Gramians, finite- and infinite-time observability,
//! defect observation operators, duality and the resolvent-integral criterion.
//!
//! Quadratic forms in the probe vector `h` are assembled as Hermitian
//! matrices, so the two-sided constants `α`, `β` are exact Rayleigh extremes
//! rather than probe samples.

pub mod naboko;
mod quad;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Result, SimError};
use crate::opcore::equations::{integral_gramian, lyapunov_residual, solve_lyapunov};
use crate::opcore::expm::{expm, expm_semigroup};
use crate::opcore::json::MatrixJson;
use crate::opcore::linalg::{
    herm, herm_eigenvalues, lambda_max, norm2, sqrt_psd, validate, ComplexMatrix,
};
use crate::opcore::spectral::{check_weight, growth_bound, numerical_abscissa, weighted_norm};
use crate::weightsolve::{quasi_similarity_constant, SolverOptions};

pub use naboko::{cesaro_orbit_mean, naboko_integral, CesaroReport, NabokoOptions, NabokoReport};
pub use quad::integrate;

/// Generator `A` (`n×n`) with observation operator `C` (`k×n`).
#[derive(Clone, Debug, PartialEq)]
pub struct ObservedSystem {
    pub a: ComplexMatrix,
    pub c: ComplexMatrix,
    pub label: String,
}

#[derive(Deserialize)]
struct SystemJson {
    #[serde(rename = "A")]
    a: MatrixJson,
    #[serde(rename = "C")]
    c: MatrixJson,
    #[serde(default)]
    label: Option<String>,
}

impl ObservedSystem {
    pub fn new(a: ComplexMatrix, c: ComplexMatrix) -> Result<Self> {
        validate(&a)?;
        if c.ncols() != a.nrows() {
            return Err(SimError::DimensionMismatch {
                expected: a.nrows(),
                found: c.ncols(),
            });
        }
        if c.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(SimError::Parse(
                "observation operator has non-finite entries".into(),
            ));
        }
        Ok(Self {
            a,
            c,
            label: String::new(),
        })
    }

    pub fn with_label(mut self, label: &str) -> Self {
        self.label = label.into();
        self
    }

    /// Parses `{"A": matrix, "C": matrix, "label"?: string}`.
    pub fn from_json_str(s: &str) -> Result<Self> {
        let j: SystemJson = serde_json::from_str(s).map_err(|e| SimError::Parse(e.to_string()))?;
        let sys = Self::new(j.a.to_square()?, j.c.to_rect()?)?;
        Ok(match j.label {
            Some(l) => sys.with_label(&l),
            None => sys,
        })
    }

    pub fn dim(&self) -> usize {
        self.a.nrows()
    }

    /// `C*C`.
    pub fn output_form(&self) -> ComplexMatrix {
        herm(&(self.c.adjoint() * &self.c))
    }
}

/// Time horizon of a Gramian.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub enum Horizon {
    Finite(f64),
    Infinite,
}

/// Observability Gramian with the two-sided constants of the energy identity.
#[derive(Clone, Debug, PartialEq)]
pub struct GramianReport {
    pub horizon: Horizon,
    /// `∫₀^τ e^{sA*}C*C e^{sA} ds`.
    pub gramian: ComplexMatrix,
    /// `λmin(T(τ)*T(τ) + G)`; for the infinite horizon, `λmin(G)`.
    pub alpha: f64,
    pub beta: f64,
    /// `λmin(G)`: the constant of `∫₀^τ ‖CT(s)h‖² ds ≥ c‖h‖²` without the `T(τ)` term.
    pub gramian_alpha: f64,
    /// `β < ∞`, always true in finite dimension.
    pub admissible: bool,
    /// `λmin(G) > 1e-10 λmax(G)`: the output alone determines the state.
    pub exactly_observable: bool,
    /// Lyapunov residual `‖A*G + GA + C*C‖_F` (infinite horizon only).
    pub residual: Option<f64>,
    /// `max_t ‖e^{tA}‖_G` over a time grid when `G` is positive definite (infinite horizon only).
    pub contraction_norm: Option<f64>,
}

fn extremes(m: &ComplexMatrix) -> (f64, f64) {
    let ev = herm_eigenvalues(m);
    (ev[0], ev[ev.len() - 1])
}

/// Finite-time Gramian and the constants of `‖T(τ)h‖² + ∫₀^τ ‖CT(s)h‖² ds`.
pub fn observability_gramian(sys: &ObservedSystem, tau: f64) -> Result<GramianReport> {
    if !(tau > 0.0) || !tau.is_finite() {
        return Err(SimError::Domain(format!(
            "horizon must be positive, got {tau}"
        )));
    }
    let g = integral_gramian(&sys.a, &sys.output_form(), tau)?;
    let t = expm_semigroup(&sys.a, tau)?;
    let (alpha, beta) = extremes(&herm(&(t.adjoint() * &t + &g)));
    let (g_lo, g_hi) = extremes(&g);
    Ok(GramianReport {
        horizon: Horizon::Finite(tau),
        gramian: g,
        alpha,
        beta,
        gramian_alpha: g_lo,
        admissible: beta.is_finite(),
        exactly_observable: g_hi > 0.0 && g_lo > 1e-10 * g_hi,
        residual: None,
        contraction_norm: None,
    })
}

/// Finite-time observability verdict with its quasi-contraction witness.
#[derive(Clone, Debug)]
pub struct ObservabilityVerdict {
    pub report: GramianReport,
    pub positive: bool,
    /// Shift inside `[growth_bound, numerical_abscissa]` at which the witness was computed.
    pub quasi_shift: f64,
    /// Similarity constant of `e^{-λt}e^{tA}` at `quasi_shift`.
    pub quasi_constant: f64,
}

/// Positivity of `T(τ)*T(τ) + G_τ`, reported together with a finite
/// quasi-contraction constant, which always exists in finite dimension.
///
/// In finite dimension `T(τ)` is invertible, so the verdict is always
/// positive; the report's `gramian_alpha` carries the output-only constant.
pub fn finite_time_observability_test(
    sys: &ObservedSystem,
    tau: f64,
    opts: &SolverOptions,
) -> Result<ObservabilityVerdict> {
    let report = observability_gramian(sys, tau)?;
    let (lo, hi) = (growth_bound(&sys.a)?, numerical_abscissa(&sys.a));
    let quasi_shift = if hi - lo > 1e-9 { 0.5 * (lo + hi) } else { hi };
    let quasi_constant = quasi_similarity_constant(&sys.a, quasi_shift, opts)?.constant;
    Ok(ObservabilityVerdict {
        positive: report.alpha > 1e-10 * report.beta,
        report,
        quasi_shift,
        quasi_constant,
    })
}

/// Stability margin required by the infinite-horizon operations.
pub const STABILITY_MARGIN: f64 = 1e-10;

/// `P = ∫₀^∞ e^{sA*}C*C e^{sA} ds` from `A*P + PA = -C*C`.
///
/// When `P` is positive definite the semigroup is contractive in its norm;
/// this is checked on the grid `2^{-6}, …, 2^4`.
pub fn infinite_gramian(sys: &ObservedSystem) -> Result<GramianReport> {
    let g = growth_bound(&sys.a)?;
    if !(g < -STABILITY_MARGIN) {
        return Err(SimError::Precondition(format!(
            "infinite horizon needs growth bound < 0, got {g:.3e}"
        )));
    }
    let q = sys.output_form();
    let p = herm(&solve_lyapunov(&sys.a, &q)?);
    let residual = lyapunov_residual(&sys.a, &p, &q);
    let (alpha, beta) = extremes(&p);
    let pd = check_weight(&p).is_ok() && alpha > 0.0;
    let contraction_norm = if pd {
        let mut worst = 0.0f64;
        for k in -6..=4 {
            worst = worst.max(weighted_norm(&expm_semigroup(&sys.a, 2f64.powi(k))?, &p)?);
        }
        Some(worst)
    } else {
        None
    };
    Ok(GramianReport {
        horizon: Horizon::Infinite,
        gramian: p,
        alpha,
        beta,
        gramian_alpha: alpha,
        admissible: true,
        exactly_observable: pd && alpha > 1e-10 * beta,
        residual: Some(residual),
        contraction_norm,
    })
}

/// Observation operator `C = (-(A*P + PA))^{1/2}` of the defect of a dissipative weight.
pub fn defect_observation(a: &ComplexMatrix, p: &ComplexMatrix) -> Result<ComplexMatrix> {
    validate(a)?;
    validate(p)?;
    check_weight(p)?;
    let p = herm(p);
    let lyap = herm(&(a.adjoint() * &p + &p * a));
    let top = lambda_max(&lyap);
    if top > 1e-10 * (1.0 + norm2(a) * norm2(&p)) {
        return Err(SimError::Precondition(format!(
            "A is not dissipative for the weight: lambda_max(A*P + PA) = {top:.3e}"
        )));
    }
    Ok(sqrt_psd(&(-lyap)))
}

/// `‖∫₀ᵗ e^{sA*}C*Ce^{sA} ds - (P - e^{tA*}Pe^{tA})‖_F`, zero for the defect observation of `P`.
pub fn defect_identity_residual(
    a: &ComplexMatrix,
    p: &ComplexMatrix,
    c: &ComplexMatrix,
    t: f64,
) -> Result<f64> {
    let sys = ObservedSystem::new(a.clone(), c.clone())?;
    let g = integral_gramian(a, &sys.output_form(), t)?;
    let e = expm_semigroup(a, t)?;
    Ok((g - (p - e.adjoint() * p * e)).norm())
}

/// `∫₀^τ e^{sA}BB*e^{sA*} ds` via the block exponential of `[[A, BB*], [0, -A*]]`.
///
/// Kept separate from the observability routine so that duality checks
/// compare two independent computations.
pub fn controllability_gramian(
    a: &ComplexMatrix,
    b: &ComplexMatrix,
    tau: f64,
) -> Result<ComplexMatrix> {
    validate(a)?;
    let n = a.nrows();
    if b.nrows() != n {
        return Err(SimError::DimensionMismatch {
            expected: n,
            found: b.nrows(),
        });
    }
    if !(tau >= 0.0) || !tau.is_finite() {
        return Err(SimError::Domain(format!(
            "horizon must be finite and non-negative, got {tau}"
        )));
    }
    let mut k = 0;
    while norm2(a) * tau / 2f64.powi(k) > 2.0 && k < 60 {
        k += 1;
    }
    let s = Complex64::new(tau / 2f64.powi(k), 0.0);
    let mut big = ComplexMatrix::zeros(2 * n, 2 * n);
    big.view_mut((0, 0), (n, n)).copy_from(&(a * s));
    big.view_mut((0, n), (n, n))
        .copy_from(&(b * b.adjoint() * s));
    big.view_mut((n, n), (n, n)).copy_from(&(-a.adjoint() * s));
    let e = expm(&big)?;
    let mut step = e.view((0, 0), (n, n)).into_owned();
    let mut w = herm(&(e.view((0, n), (n, n)) * step.adjoint()));
    for _ in 0..k {
        w = herm(&(&w + &step * &w * step.adjoint()));
        step = &step * &step;
    }
    Ok(w)
}

/// Spectra of the observability Gramian of `(A, C)` and the controllability Gramian of `(A*, C*)`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DualityReport {
    pub tau: f64,
    pub observability: Vec<f64>,
    pub controllability: Vec<f64>,
    pub max_difference: f64,
    /// `max_difference ≤ 1e-10 · max(1, λmax)`.
    pub agree: bool,
}

/// Compares the two Gramian spectra at horizon `tau`.
pub fn duality_check(sys: &ObservedSystem, tau: f64) -> Result<DualityReport> {
    let obs = herm_eigenvalues(&observability_gramian(sys, tau)?.gramian);
    let ctrl = herm_eigenvalues(&controllability_gramian(
        &sys.a.adjoint(),
        &sys.c.adjoint(),
        tau,
    )?);
    let max_difference = obs
        .iter()
        .zip(&ctrl)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max);
    let scale = obs.last().copied().unwrap_or(0.0).abs().max(1.0);
    Ok(DualityReport {
        tau,
        agree: max_difference <= 1e-10 * scale,
        observability: obs,
        controllability: ctrl,
        max_difference,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::opcore::linalg::{diag_real, from_real_rows};

    fn sys(a: ComplexMatrix, c: ComplexMatrix) -> ObservedSystem {
        ObservedSystem::new(a, c).unwrap()
    }

    #[test]
    fn gramian_examples() {
        let r = observability_gramian(
            &sys(ComplexMatrix::zeros(2, 2), ComplexMatrix::identity(2, 2)),
            2.0,
        )
        .unwrap();
        assert!(
            (r.gramian.clone() - ComplexMatrix::identity(2, 2) * Complex64::new(2.0, 0.0)).norm()
                < 1e-14
        );
        assert!((r.alpha - 3.0).abs() < 1e-13 && (r.beta - 3.0).abs() < 1e-13);
        let a = from_real_rows(&[&[-1.0, 4.0], &[0.0, -1.0]]);
        let r = observability_gramian(&sys(a.clone(), ComplexMatrix::zeros(1, 2)), 1.5).unwrap();
        assert_eq!(r.gramian.norm(), 0.0);
        let t = expm_semigroup(&a, 1.5).unwrap();
        assert!((r.alpha - herm_eigenvalues(&(t.adjoint() * &t))[0]).abs() < 1e-14);
        let r = observability_gramian(&sys(diag_real(&[-1.0]), diag_real(&[1.0])), 40.0).unwrap();
        assert!((r.gramian[(0, 0)].re - 0.5).abs() < 1e-14);
    }

    #[test]
    fn observability_verdicts() {
        let opts = SolverOptions::default();
        let jordan = from_real_rows(&[&[0.0, 1.0], &[0.0, 0.0]]);
        let e1 = from_real_rows(&[&[1.0, 0.0]]);
        let v = finite_time_observability_test(&sys(jordan, e1.clone()), 1.0, &opts).unwrap();
        assert!(v.positive && v.report.exactly_observable && v.quasi_constant.is_finite());
        // G_1 = [[1, 1/2], [1/2, 1/3]], determinant 1/12.
        let g = &v.report.gramian;
        let det = (g[(0, 0)] * g[(1, 1)] - g[(0, 1)] * g[(1, 0)]).re;
        assert!((det - 1.0 / 12.0).abs() < 1e-13);
        let unobs =
            finite_time_observability_test(&sys(ComplexMatrix::zeros(2, 2), e1), 1.0, &opts)
                .unwrap();
        assert_eq!(unobs.report.gramian_alpha, 0.0);
        assert!(!unobs.report.exactly_observable);
        assert!((unobs.report.alpha - 1.0).abs() < 1e-14);
        let v = finite_time_observability_test(
            &sys(diag_real(&[-3.0, 2.0]), ComplexMatrix::identity(2, 2)),
            0.5,
            &opts,
        )
        .unwrap();
        assert!(v.positive);
    }

    #[test]
    fn infinite_gramian_examples() {
        let r = infinite_gramian(&sys(diag_real(&[-1.0]), diag_real(&[2f64.sqrt()]))).unwrap();
        assert!((r.gramian[(0, 0)].re - 1.0).abs() < 1e-14 && r.residual.unwrap() < 1e-10);
        let r =
            infinite_gramian(&sys(diag_real(&[-1.0, -2.0]), ComplexMatrix::zeros(1, 2))).unwrap();
        assert!(!r.exactly_observable && r.contraction_norm.is_none());
        assert!(matches!(
            infinite_gramian(&sys(diag_real(&[0.0]), diag_real(&[1.0]))),
            Err(SimError::Precondition(_))
        ));
    }

    #[test]
    fn defect_round_trip() {
        let a = from_real_rows(&[&[-1.0, 4.0], &[0.0, -1.0]]);
        let p = diag_real(&[1.0, 4.0]);
        let c = defect_observation(&a, &p).unwrap();
        let cc = c.adjoint() * &c;
        assert!((cc - from_real_rows(&[&[2.0, -4.0], &[-4.0, 8.0]])).norm() < 1e-12);
        let r = infinite_gramian(&sys(a.clone(), c.clone())).unwrap();
        assert!((r.gramian - &p).norm() < 1e-8);
        assert!(defect_identity_residual(&a, &p, &c, 0.7).unwrap() < 1e-10);
        assert!(
            defect_observation(
                &from_real_rows(&[&[0.0, 1.0], &[-1.0, 0.0]]),
                &ComplexMatrix::identity(2, 2)
            )
            .unwrap()
            .norm()
                < 1e-7
        );
        assert!(defect_observation(&diag_real(&[0.5]), &diag_real(&[1.0])).is_err());
    }

    #[test]
    fn duality_examples() {
        let a = from_real_rows(&[&[-0.3, 2.0, 0.0], &[0.0, -0.5, 1.0], &[0.1, 0.0, -2.0]]);
        let c = from_real_rows(&[&[1.0, 0.0, 1.0]]);
        let r = duality_check(&sys(a, c), 3.0).unwrap();
        assert!(r.agree, "{r:?}");
        let r = duality_check(
            &sys(ComplexMatrix::zeros(2, 2), ComplexMatrix::identity(2, 2)),
            1.0,
        )
        .unwrap();
        assert!(r.agree && (r.observability[0] - 1.0).abs() < 1e-14);
    }

    #[test]
    fn parses_system_json() {
        let s =
            r#"{"A": {"n": 1, "re": [[-1.0]]}, "C": {"n": 1, "re": [[1.0]]}, "label": "scalar"}"#;
        let sys = ObservedSystem::from_json_str(s).unwrap();
        assert_eq!(sys.label, "scalar");
        assert!(ObservedSystem::from_json_str(
            r#"{"A": {"n": 1, "re": [[1.0]]}, "C": {"n": 1, "re": [[1.0, 2.0]]}}"#
        )
        .is_err());
    }
}
