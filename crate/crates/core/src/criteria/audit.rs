//! Audits of the quantitative similarity bounds and of the local commutation rate.

use num_complex::Complex64;
use serde::Serialize;

use super::renorm::orbit_sup;
use crate::error::{Result, SimError};
use crate::gallery::HolbrookFactorization;
use crate::opcore::linalg::{validate, ComplexMatrix};
use crate::opcore::semigroup::MatrixSemigroup;
use crate::opcore::spectral::{operator_norm, weight_roots};
use crate::weightsolve::{
    discrete_similarity_constant, quasi_similarity_constant, semigroup_similarity_constant,
    SimilarityVerdict, SolverOptions, VerdictStatus, WeightCertificate,
};

/// Relative slack of an audit comparison; it exceeds the bisection tolerance of the solvers.
pub const AUDIT_TOL: f64 = 1e-4;

/// Safety inflation applied to grid estimates of `sup ‖T(t)‖`.
pub const SUP_INFLATION: f64 = 1.01;

/// Defect below which a truncated Holbrook sum counts as converged.
pub const TAIL_TOL: f64 = 1e-10;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum AuditStatus {
    Satisfied,
    Violated,
    /// Some ingredient is infinite, so the bound says nothing.
    Vacuous,
    /// The computation could not settle the comparison.
    Inconclusive,
}

impl AuditStatus {
    pub fn as_str(self) -> &'static str {
        match self {
            AuditStatus::Satisfied => "Satisfied",
            AuditStatus::Violated => "Violated",
            AuditStatus::Vacuous => "Vacuous",
            AuditStatus::Inconclusive => "Inconclusive",
        }
    }
}

/// Ingredients of an audited bound; fields unused by a bound stay `None`.
#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct AuditInputs {
    pub lambda: Option<f64>,
    pub tau: Option<f64>,
    /// `sup_{[0,τ]} ‖T(t)‖` before inflation.
    pub m_sup: Option<f64>,
    /// `C(T(τ))`.
    pub c_tau: Option<f64>,
    /// Constant of the rescaled semigroup `e^{-λt}T(t)`.
    pub c_shifted: Option<f64>,
    pub horizon: Option<usize>,
    pub norm_a: Option<f64>,
    pub norm_b: Option<f64>,
    /// Last defect `‖T^N - A S^N B‖` of a truncated sum.
    pub tail: Option<f64>,
}

/// A checked inequality `lhs ≤ rhs`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BoundAudit {
    pub name: String,
    pub lhs: f64,
    pub rhs: f64,
    pub inputs: AuditInputs,
    pub status: AuditStatus,
    /// `lhs ≤ rhs·(1 + AUDIT_TOL)`.
    pub satisfied: bool,
}

impl BoundAudit {
    fn new(
        name: &str,
        lhs: f64,
        rhs: f64,
        inputs: AuditInputs,
        status: Option<AuditStatus>,
    ) -> Self {
        let satisfied = lhs <= rhs * (1.0 + AUDIT_TOL);
        let status = status.unwrap_or(if satisfied {
            AuditStatus::Satisfied
        } else {
            AuditStatus::Violated
        });
        Self {
            name: name.into(),
            lhs,
            rhs,
            inputs,
            status,
            satisfied,
        }
    }

    /// An audit fails only when it was decidable and came out false.
    pub fn failed(&self) -> bool {
        self.status == AuditStatus::Violated
    }
}

/// `√2 C_λ (e^{2λ}-1)/(2λ) + 2√2 C_τ M² max{1, √τ}`.
pub fn simconst_rhs(c_shifted: f64, lambda: f64, c_tau: f64, m_sup: f64, tau: f64) -> f64 {
    let s2 = 2f64.sqrt();
    s2 * c_shifted * (2.0 * lambda).exp_m1() / (2.0 * lambda)
        + 2.0 * s2 * c_tau * m_sup * m_sup * tau.sqrt().max(1.0)
}

/// Audits the joint constant against small-time and large-time ingredients.
///
/// Generator-backed semigroups use the rescaled generator `A - λ`; sampled
/// semigroups use the grid operator `e^{-λΔ}T(Δ)`. `M` is inflated by 1%.
pub fn semigroup_simconst_audit(
    sem: &MatrixSemigroup,
    lambda: f64,
    tau: f64,
    opts: &SolverOptions,
) -> Result<BoundAudit> {
    if !(lambda > 0.0) || !(tau > 0.0) || !lambda.is_finite() || !tau.is_finite() {
        return Err(SimError::Domain(format!(
            "lambda and tau must be positive, got {lambda} and {tau}"
        )));
    }
    let joint = semigroup_similarity_constant(sem, opts)?;
    let shifted = match (sem.generator(), sem.step()) {
        (Some(a), _) => quasi_similarity_constant(a, lambda, opts)?,
        (None, Some(h)) => discrete_similarity_constant(
            &(sem.eval_steps(1)? * Complex64::new((-lambda * h).exp(), 0.0)),
            opts,
        )?,
        (None, None) => unreachable!("sampled semigroups carry a step"),
    };
    let c_tau = discrete_similarity_constant(&sem.eval(tau)?, opts)?;
    let m_sup = orbit_sup(sem, tau)?;
    let rhs = simconst_rhs(
        shifted.constant,
        lambda,
        c_tau.constant,
        SUP_INFLATION * m_sup,
        tau,
    );
    let inputs = AuditInputs {
        lambda: Some(lambda),
        tau: Some(tau),
        m_sup: Some(m_sup),
        c_tau: Some(c_tau.constant),
        c_shifted: Some(shifted.constant),
        ..AuditInputs::default()
    };
    let status =
        if !shifted.is_finite() || !c_tau.is_finite() || joint.status == VerdictStatus::Unbounded {
            Some(AuditStatus::Vacuous)
        } else if joint.status == VerdictStatus::Infeasible && rhs >= joint.searched_kappa_max {
            Some(AuditStatus::Inconclusive)
        } else {
            None
        };
    Ok(BoundAudit::new(
        "simconst",
        joint.constant,
        rhs,
        inputs,
        status,
    ))
}

/// [`semigroup_simconst_audit`] for `e^{tA}`.
pub fn simconst_bound_audit(
    a: &ComplexMatrix,
    lambda: f64,
    tau: f64,
    opts: &SolverOptions,
) -> Result<BoundAudit> {
    semigroup_simconst_audit(
        &MatrixSemigroup::from_generator(a.clone())?,
        lambda,
        tau,
        opts,
    )
}

/// Audits `C(T) ≤ ‖A‖‖B‖ + (Σ_{k≤N} ‖T^k - A S^k B‖²)^{1/2}`.
///
/// The sum includes `k = 0`; it is trusted only when the last defect is below
/// [`TAIL_TOL`], otherwise the audit is inconclusive.
pub fn holbrook_bound_audit(
    t: &ComplexMatrix,
    fact: &HolbrookFactorization,
    opts: &SolverOptions,
) -> Result<BoundAudit> {
    validate(t)?;
    let lhs = discrete_similarity_constant(t, opts)?;
    holbrook_audit_with(t, fact, &lhs)
}

fn holbrook_audit_with(
    t: &ComplexMatrix,
    fact: &HolbrookFactorization,
    lhs: &SimilarityVerdict,
) -> Result<BoundAudit> {
    let defects = fact.defects(t)?;
    let tail = *defects.last().expect("horizon 0 still has one defect");
    let (na, nb) = (operator_norm(&fact.amap), operator_norm(&fact.bmap));
    let rhs = na * nb + defects.iter().map(|d| d * d).sum::<f64>().sqrt();
    let inputs = AuditInputs {
        horizon: Some(fact.horizon),
        norm_a: Some(na),
        norm_b: Some(nb),
        tail: Some(tail),
        ..AuditInputs::default()
    };
    let status = if tail > TAIL_TOL {
        Some(AuditStatus::Inconclusive)
    } else if lhs.status == VerdictStatus::Unbounded {
        Some(AuditStatus::Vacuous)
    } else {
        None
    };
    Ok(BoundAudit::new(
        "holbrook",
        lhs.constant,
        rhs,
        inputs,
        status,
    ))
}

/// Factorisation `T^k = P^{-1/2} S^k P^{1/2}` through a certificate, `S = P^{1/2} T P^{-1/2}`.
///
/// `S` is rescaled onto the unit ball when the certificate's residual lets its
/// norm exceed 1 by rounding.
pub fn certificate_factorization(
    t: &ComplexMatrix,
    cert: &WeightCertificate,
    horizon: usize,
) -> Result<HolbrookFactorization> {
    let (r, rinv) = weight_roots(&cert.p)?;
    let s = &r * t * &rinv;
    let nrm = operator_norm(&s);
    let s = if nrm > 1.0 {
        s * Complex64::new(1.0 / nrm, 0.0)
    } else {
        s
    };
    HolbrookFactorization::new(rinv, r, s, horizon, "certificate")
}

/// Holbrook audit of `T` through its own optimal certificate.
pub fn holbrook_certificate_audit(
    t: &ComplexMatrix,
    horizon: usize,
    opts: &SolverOptions,
) -> Result<Option<BoundAudit>> {
    validate(t)?;
    let lhs = discrete_similarity_constant(t, opts)?;
    let Some(cert) = lhs.certificate.as_ref() else {
        return Ok(None);
    };
    let fact = certificate_factorization(t, cert, horizon)?;
    holbrook_audit_with(t, &fact, &lhs).map(Some)
}

/// Least-squares fit of `‖T(t)A - AS(t)‖` against `t` near zero.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SlopeReport {
    /// `(t, ‖T(t)A - AS(t)‖)` in grid order.
    pub values: Vec<(f64, f64)>,
    pub slope: f64,
    pub intercept: f64,
    /// The intercept is negligible, consistent with an `O(t)` defect.
    pub linear: bool,
}

/// Commutation defect `‖T(t)·amap - amap·S(t)‖` on a grid in `(0, 1]` with its linear fit.
pub fn local_commutation_slope(
    t_sem: &MatrixSemigroup,
    s_sem: &MatrixSemigroup,
    amap: &ComplexMatrix,
    t_grid: &[f64],
) -> Result<SlopeReport> {
    if t_grid.is_empty()
        || t_grid.iter().any(|&t| !(t > 0.0 && t <= 1.0))
        || t_grid.windows(2).any(|w| w[1] <= w[0])
    {
        return Err(SimError::Domain(
            "commutation grid must be sorted inside (0, 1]".into(),
        ));
    }
    if amap.nrows() != t_sem.dim() || amap.ncols() != s_sem.dim() {
        return Err(SimError::DimensionMismatch {
            expected: t_sem.dim(),
            found: amap.nrows(),
        });
    }
    let values = t_grid
        .iter()
        .map(|&t| {
            Ok((
                t,
                operator_norm(&(t_sem.eval(t)? * amap - amap * s_sem.eval(t)?)),
            ))
        })
        .collect::<Result<Vec<_>>>()?;
    let n = values.len() as f64;
    let (mx, my) = (
        values.iter().map(|v| v.0).sum::<f64>() / n,
        values.iter().map(|v| v.1).sum::<f64>() / n,
    );
    let sxx: f64 = values.iter().map(|v| (v.0 - mx).powi(2)).sum();
    let sxy: f64 = values.iter().map(|v| (v.0 - mx) * (v.1 - my)).sum();
    let (slope, intercept) = if sxx > 0.0 {
        (sxy / sxx, my - sxy / sxx * mx)
    } else {
        (0.0, my)
    };
    let scale = values.iter().map(|v| v.1).fold(0.0, f64::max);
    Ok(SlopeReport {
        linear: intercept.abs() <= 1e-3 * scale + 1e-12,
        values,
        slope,
        intercept,
    })
}
