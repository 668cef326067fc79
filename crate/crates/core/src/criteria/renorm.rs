//! Explicit renormings: Post-Widder approximants, time-averaged weights,
//! shifted Lyapunov weights and the isometric-similarity test.

use num_complex::Complex64;

use crate::error::{Result, SimError};
use crate::opcore::equations::integral_gramian;
use crate::opcore::expm::expm_semigroup;
use crate::opcore::linalg::{inverse, lambda_max, normalize_weight, powi, validate, ComplexMatrix};
use crate::opcore::semigroup::MatrixSemigroup;
use crate::opcore::spectral::{
    check_weight, growth_bound, min_singular_value, operator_norm, weight_kappa, weight_roots,
    weighted_norm,
};
use crate::weightsolve::obstruction::continuous_obstruction;
use crate::weightsolve::{
    certificate_check, quasi_similarity_constant, SolverOptions, Target, WeightCertificate,
};

/// Number of uniform intervals used to estimate `sup_{[0,τ]} ‖T(t)‖`.
pub const SUP_GRID: usize = 64;

/// `sup_{t ∈ [0, τ]} ‖T(t)‖`.
///
/// Generator-backed semigroups are sampled on a uniform grid and the best
/// cell is refined by golden-section search; sampled semigroups are scanned
/// exactly on their grid.
pub fn orbit_sup(sem: &MatrixSemigroup, tau: f64) -> Result<f64> {
    if !(tau >= 0.0) || !tau.is_finite() {
        return Err(SimError::Domain(format!(
            "horizon must be finite and non-negative, got {tau}"
        )));
    }
    if let Some(h) = sem.step() {
        let steps = (tau / h + 1e-9).floor() as u64;
        let mut best = 0.0f64;
        for k in 0..=steps {
            best = best.max(operator_norm(&sem.eval_steps(k)?));
        }
        return Ok(best);
    }
    let norm_at = |t: f64| -> Result<f64> { Ok(operator_norm(&sem.eval(t)?)) };
    let h = tau / SUP_GRID as f64;
    let mut best = (0.0, norm_at(0.0)?);
    for i in 1..=SUP_GRID {
        let t = i as f64 * h;
        let v = norm_at(t)?;
        if v > best.1 {
            best = (t, v);
        }
    }
    if h > 0.0 {
        let golden = 0.5 * (5f64.sqrt() - 1.0);
        let (mut lo, mut hi) = ((best.0 - h).max(0.0), (best.0 + h).min(tau));
        for _ in 0..40 {
            let x1 = hi - golden * (hi - lo);
            let x2 = lo + golden * (hi - lo);
            let (f1, f2) = (norm_at(x1)?, norm_at(x2)?);
            best.1 = best.1.max(f1).max(f2);
            if f1 >= f2 {
                hi = x2;
            } else {
                lo = x1;
            }
        }
    }
    Ok(best.1)
}

/// `(I - (t/n)A)^{-n}`, the `n`-th Post-Widder approximant of `e^{tA}`.
pub fn post_widder(a: &ComplexMatrix, t: f64, n: u64) -> Result<ComplexMatrix> {
    validate(a)?;
    if n == 0 {
        return Err(SimError::Domain(
            "Post-Widder order must be at least 1".into(),
        ));
    }
    if !(t >= 0.0) || !t.is_finite() {
        return Err(SimError::Domain(format!(
            "time must be finite and non-negative, got {t}"
        )));
    }
    let d = a.nrows();
    let x = ComplexMatrix::identity(d, d) - a * Complex64::new(t / n as f64, 0.0);
    if min_singular_value(&x) <= 1e-12 * (1.0 + operator_norm(&x)) {
        return Err(SimError::NearSingular(format!(
            "n/t = {} is in the spectrum",
            n as f64 / t
        )));
    }
    Ok(powi(&inverse(&x)?, n))
}

/// Time-averaged weight and the operator bounds of its construction.
#[derive(Clone, Debug)]
pub struct AverageRenorm {
    /// Normalised averaged weight; checked against `A*P + PA ⪯ 0`.
    pub certificate: WeightCertificate,
    /// `M = sup_{[0,τ₁]} ‖e^{tA}‖`.
    pub m_sup: f64,
    /// `√cond` of the normalised input weight.
    pub kappa_eq: f64,
    /// Norm of the embedding `h ↦ h` from the original norm into the averaged one.
    pub embedding_norm: f64,
    /// Norm of `e^{τ₁A}` from the averaged norm back into the original one.
    pub transfer_norm: f64,
    /// `kappa_eq · M²`, the bound for `embedding_norm · transfer_norm`.
    pub product_bound: f64,
}

/// Averages an input weight along the orbit: `P_avg = (M²τ₁)^{-1} ∫₀^{τ₁} e^{sA*} P_eq e^{sA} ds`.
///
/// When `e^{τ₁A}` is a contraction for `P_eq`, the semigroup is a contraction
/// semigroup for `P_avg` at every time. With `P_eq = I` this is the plain time
/// average used for semigroups bounded below.
pub fn average_renorm(a: &ComplexMatrix, p_eq: &ComplexMatrix, tau1: f64) -> Result<AverageRenorm> {
    validate(a)?;
    validate(p_eq)?;
    if !(tau1 > 0.0) || !tau1.is_finite() {
        return Err(SimError::Domain(format!(
            "tau1 must be positive, got {tau1}"
        )));
    }
    check_weight(p_eq)?;
    let p_eq = normalize_weight(p_eq);
    let t1 = expm_semigroup(a, tau1)?;
    let contr = weighted_norm(&t1, &p_eq)?;
    if contr > 1.0 + 1e-8 {
        return Err(SimError::Precondition(format!(
            "input weight does not make T(tau1) a contraction (norm {contr:.12})"
        )));
    }
    let m_sup = orbit_sup(&MatrixSemigroup::from_generator(a.clone())?, tau1)?;
    let raw = integral_gramian(a, &p_eq, tau1)? * Complex64::new(1.0 / (m_sup * m_sup * tau1), 0.0);
    let (_, raw_inv_root) = weight_roots(&raw)?;
    let p = normalize_weight(&raw);
    let mut certificate = WeightCertificate {
        kappa: weight_kappa(&p)?,
        p,
        residual: 0.0,
    };
    certificate.residual = certificate_check(
        &certificate,
        &Target::Lyapunov {
            a: a.clone(),
            shift: 0.0,
        },
    )?
    .residual;
    Ok(AverageRenorm {
        certificate,
        m_sup,
        kappa_eq: weight_kappa(&p_eq)?,
        embedding_norm: lambda_max(&raw).sqrt(),
        transfer_norm: operator_norm(&(&t1 * raw_inv_root)),
        product_bound: weight_kappa(&p_eq)? * m_sup * m_sup,
    })
}

/// Weight making `e^{-at}e^{tA}` a contraction semigroup, with a time sweep.
#[derive(Clone, Debug)]
pub struct LiapunovRenorm {
    pub certificate: WeightCertificate,
    /// `max_t ‖e^{tA}‖_P e^{-at}` over the sweep grid.
    pub max_ratio: f64,
}

/// Sweep grid for [`liapunov_renorm`]: `2^{-6}, …, 2^4`.
fn sweep_grid() -> Vec<f64> {
    (-6..=4).map(|k| 2f64.powi(k)).collect()
}

/// Certificate for `‖e^{tA}‖_P ≤ e^{at}`, valid for any `a` above the growth bound.
pub fn liapunov_renorm(
    a: &ComplexMatrix,
    shift: f64,
    opts: &SolverOptions,
) -> Result<LiapunovRenorm> {
    validate(a)?;
    let g = growth_bound(a)?;
    if !(shift > g) {
        return Err(SimError::Precondition(format!(
            "shift {shift} does not exceed the growth bound {g}"
        )));
    }
    let v = quasi_similarity_constant(a, shift, opts)?;
    let certificate = v.certificate.ok_or_else(|| {
        SimError::Precondition(format!(
            "no certificate with kappa <= {} at shift {shift} ({})",
            opts.kappa_max,
            v.status.as_str()
        ))
    })?;
    let mut max_ratio = 0.0f64;
    for t in sweep_grid() {
        max_ratio = max_ratio
            .max(weighted_norm(&expm_semigroup(a, t)?, &certificate.p)? * (-shift * t).exp());
    }
    Ok(LiapunovRenorm {
        certificate,
        max_ratio,
    })
}

/// Evidence for similarity to a semigroup of isometries.
#[derive(Clone, Debug)]
pub struct NagyReport {
    /// `min_t σmin(e^{tA})` over the grid.
    pub alpha: f64,
    /// `max_t ‖e^{tA}‖` over the grid.
    pub beta: f64,
    pub positive: bool,
    /// Time-averaged weight `(1/T)∫₀^T e^{tA*}e^{tA} dt`, present when positive.
    pub weight: Option<ComplexMatrix>,
    pub kappa: Option<f64>,
    /// `max_t max_h |‖e^{tA}h‖_P/‖h‖_P - 1|` over the grid, exact in `h`.
    pub isometry_defect: Option<f64>,
}

/// `sup_{t ∈ ℝ} ‖e^{tA}‖ < ∞`: imaginary-axis spectrum with semisimple eigenvalues.
pub fn is_bounded_group(a: &ComplexMatrix) -> Result<bool> {
    Ok(continuous_obstruction(a, 0.0)?.is_none() && continuous_obstruction(&(-a), 0.0)?.is_none())
}

/// Grid test for similarity of `e^{tA}` to an isometric semigroup.
///
/// The grid supplies `α` and `β`. A finite grid cannot see growth at infinity,
/// so a positive verdict also needs the spectrum on the imaginary axis with
/// semisimple eigenvalues there, which is exactly boundedness of the group.
pub fn nagy_isometry_test(a: &ComplexMatrix, t_grid: &[f64]) -> Result<NagyReport> {
    validate(a)?;
    if t_grid.is_empty() || t_grid.iter().any(|&t| !(t >= 0.0) || !t.is_finite()) {
        return Err(SimError::Domain(
            "time grid must be non-empty, finite and non-negative".into(),
        ));
    }
    let mut alpha = f64::INFINITY;
    let mut beta = 0.0f64;
    let mut orbit = Vec::with_capacity(t_grid.len());
    for &t in t_grid {
        let e = expm_semigroup(a, t)?;
        alpha = alpha.min(min_singular_value(&e));
        beta = beta.max(operator_norm(&e));
        orbit.push(e);
    }
    let positive = alpha > 1e-8 && beta < 1e8 && is_bounded_group(a)?;
    if !positive {
        return Ok(NagyReport {
            alpha,
            beta,
            positive,
            weight: None,
            kappa: None,
            isometry_defect: None,
        });
    }
    let horizon = t_grid.iter().copied().fold(0.0, f64::max);
    let n = a.nrows();
    let p = if horizon > 0.0 {
        integral_gramian(a, &ComplexMatrix::identity(n, n), horizon)?
            * Complex64::new(1.0 / horizon, 0.0)
    } else {
        ComplexMatrix::identity(n, n)
    };
    let (r, rinv) = weight_roots(&p)?;
    let mut defect = 0.0f64;
    for e in &orbit {
        let s = &r * e * &rinv;
        defect = defect
            .max(operator_norm(&s) - 1.0)
            .max(1.0 - min_singular_value(&s));
    }
    Ok(NagyReport {
        alpha,
        beta,
        positive,
        kappa: Some(weight_kappa(&p)?),
        weight: Some(p),
        isometry_defect: Some(defect),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::opcore::linalg::{diag_real, from_real_rows};
    use crate::opcore::spectral::weighted_norm;

    #[test]
    fn post_widder_scalar_rate() {
        let a = diag_real(&[-1.0]);
        let err = |n| (post_widder(&a, 1.0, n).unwrap()[(0, 0)].re - (-1f64).exp()).abs();
        assert!((post_widder(&a, 1.0, 4).unwrap()[(0, 0)].re - 1.25f64.powi(-4)).abs() < 1e-15);
        assert!(err(64) < err(8) && err(8) < err(1));
        assert!(err(1024) * 1000.0 < 1.0);
        assert_eq!(
            post_widder(&ComplexMatrix::zeros(2, 2), 3.0, 5).unwrap(),
            ComplexMatrix::identity(2, 2)
        );
        assert!(post_widder(&diag_real(&[1.0]), 2.0, 2).is_err());
    }

    #[test]
    fn averaged_weight_certifies_every_time() {
        let a = from_real_rows(&[&[-1.0, 4.0], &[0.0, -1.0]]);
        let r = average_renorm(&a, &diag_real(&[1.0, 4.0]), 1.0).unwrap();
        assert!(
            r.certificate.residual <= 1e-10,
            "{}",
            r.certificate.residual
        );
        for t in [0.1, 0.5, 1.0, 2.0, 5.0] {
            let n = weighted_norm(&expm_semigroup(&a, t).unwrap(), &r.certificate.p).unwrap();
            assert!(n <= 1.0 + 1e-6, "t = {t}: {n}");
        }
        assert!(r.embedding_norm * r.transfer_norm <= r.product_bound * (1.0 + 1e-8));
        assert!(average_renorm(&a, &ComplexMatrix::identity(2, 2), 0.1).is_err());
    }

    #[test]
    fn skew_average_is_scalar() {
        let a = from_real_rows(&[&[0.0, 1.5], &[-1.5, 0.0]]);
        let r = average_renorm(&a, &ComplexMatrix::identity(2, 2), 1.0).unwrap();
        assert!((r.certificate.p - ComplexMatrix::identity(2, 2)).norm() < 1e-10);
    }

    #[test]
    fn liapunov_weight_for_the_jordan_group() {
        let a = from_real_rows(&[&[0.0, 1.0], &[0.0, 0.0]]);
        let r = liapunov_renorm(&a, 0.5, &SolverOptions::default()).unwrap();
        assert!(r.max_ratio <= 1.0 + 1e-6, "{}", r.max_ratio);
        assert!(liapunov_renorm(&diag_real(&[0.3]), 0.2, &SolverOptions::default()).is_err());
        let n = liapunov_renorm(&diag_real(&[-1.0, -2.0]), 0.1, &SolverOptions::default()).unwrap();
        assert!((n.certificate.kappa - 1.0).abs() < 1e-6);
    }

    #[test]
    fn isometry_test_cases() {
        let grid: Vec<f64> = (0..=40).map(|k| k as f64 * 0.25).collect();
        let skew = from_real_rows(&[&[0.0, 2.0], &[-2.0, 0.0]]);
        let r = nagy_isometry_test(&skew, &grid).unwrap();
        assert!(r.positive && (r.alpha - 1.0).abs() < 1e-12 && (r.beta - 1.0).abs() < 1e-12);
        assert!(r.isometry_defect.unwrap() <= 1e-10);
        let jordan = from_real_rows(&[&[0.0, 1.0], &[0.0, 0.0]]);
        assert!(!nagy_isometry_test(&jordan, &grid).unwrap().positive);
        let s = from_real_rows(&[&[1.0, 2.0], &[0.0, 1.0]]);
        let sim = &s * &skew * inverse(&s).unwrap();
        let r = nagy_isometry_test(&sim, &grid).unwrap();
        let ss = weight_kappa(&(s.adjoint() * &s)).unwrap();
        assert!(r.positive);
        assert!(
            r.kappa.unwrap() <= ss * (1.0 + 1e-8),
            "{} vs {}",
            r.kappa.unwrap(),
            ss
        );
    }
}
