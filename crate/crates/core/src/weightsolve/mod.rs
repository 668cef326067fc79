//! Similarity constants as condition-number-minimal Hermitian weights.
//!
//! An operator `T` is a contraction in the norm `⟨Ph, h⟩^{1/2}` exactly when
//! `T*PT ⪯ P`; a generator `A` yields a quasi-contraction `‖e^{tA}‖_P ≤ e^{λt}`
//! exactly when `A*P + PA ⪯ 2λP`. Normalising `I ⪯ P ⪯ κ²I`, the similarity
//! constant is the least feasible `κ`.
//!
//! Both inequalities are reduced to Stein form before solving. Discrete
//! operators go through a disc automorphism chosen to balance the spectrum, and
//! generators through a scaled Cayley transform; both maps preserve the
//! feasible set of `P` exactly. Reported residuals are always recomputed on the
//! original inequality.

mod engine;
pub mod obstruction;
pub mod peripheral;

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Result, SimError};
use crate::opcore::linalg::{
    herm, herm_eigenvalues, inverse, is_real, lambda_max, norm2, real_part, validate, widen,
    ComplexMatrix, Scalar,
};
use crate::opcore::semigroup::{MatrixSemigroup, SemigroupKind};
use crate::opcore::spectral::{growth_bound, numerical_abscissa, symmetrize};

pub use engine::EngineOptions;
use engine::{minimize_kappa, run, Minimized, Problem, RunOutcome};

/// Tolerances and budgets shared by all weight solvers.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SolverOptions {
    /// Largest admissible constraint violation of a certificate.
    pub feas_tol: f64,
    /// Relative width at which a bisection on `κ` stops.
    pub rel_tol: f64,
    /// Upper end of the `κ` search; larger constants are reported as infeasible.
    pub kappa_max: f64,
    /// Iteration cap per feasibility run.
    pub max_iter: usize,
    /// Relative `κ` overshoot accepted by a feasibility run.
    pub kappa_slack: f64,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            feas_tol: 1e-8,
            rel_tol: 1e-5,
            kappa_max: 1e6,
            max_iter: 5000,
            kappa_slack: 1e-6,
        }
    }
}

impl SolverOptions {
    fn check(&self) -> Result<()> {
        let ok = self.feas_tol > 0.0
            && self.rel_tol > 0.0
            && self.kappa_max >= 1.0
            && self.kappa_slack >= 0.0
            && self.max_iter > 0;
        if ok {
            Ok(())
        } else {
            Err(SimError::Domain(format!("invalid solver options {self:?}")))
        }
    }

    fn engine(&self, tol: f64) -> EngineOptions {
        EngineOptions {
            max_iter: self.max_iter,
            tol,
            kappa_slack: self.kappa_slack,
            ..EngineOptions::default()
        }
    }
}

/// Hermitian weight `P` with `λmin(P) = 1`, its `κ = √cond(P)` and worst constraint violation.
#[derive(Clone, Debug, PartialEq)]
pub struct WeightCertificate {
    pub p: ComplexMatrix,
    pub kappa: f64,
    pub residual: f64,
}

/// Result of a feasibility query at fixed `κ`.
#[derive(Clone, Debug)]
pub struct FeasibilityOutcome {
    pub certificate: Option<WeightCertificate>,
    /// Smallest residual seen (original constraint units).
    pub best_residual: f64,
    pub iterations: usize,
    /// Infeasibility was established (spectrally or by a dual bound), not merely failed to converge.
    pub proven_infeasible: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum VerdictStatus {
    Finite,
    Infeasible,
    Unbounded,
}

impl VerdictStatus {
    pub fn as_str(self) -> &'static str {
        match self {
            VerdictStatus::Finite => "Finite",
            VerdictStatus::Infeasible => "Infeasible",
            VerdictStatus::Unbounded => "Unbounded",
        }
    }
}

/// Outcome of a similarity-constant computation.
#[derive(Clone, Debug)]
pub struct SimilarityVerdict {
    pub status: VerdictStatus,
    /// The certificate's `κ` when finite, `+∞` otherwise.
    pub constant: f64,
    pub certificate: Option<WeightCertificate>,
    /// Largest `κ` the search attempted.
    pub searched_kappa_max: f64,
    /// Certified lower bound for the constant.
    pub lower_bound: f64,
    /// Spectral reason for an unbounded verdict.
    pub reason: Option<String>,
}

impl SimilarityVerdict {
    fn unbounded(reason: String) -> Self {
        Self {
            status: VerdictStatus::Unbounded,
            constant: f64::INFINITY,
            certificate: None,
            searched_kappa_max: 0.0,
            lower_bound: f64::INFINITY,
            reason: Some(reason),
        }
    }

    pub fn is_finite(&self) -> bool {
        self.status == VerdictStatus::Finite
    }

    /// Residual of the attached certificate, `NaN` when absent.
    pub fn residual(&self) -> f64 {
        self.certificate.as_ref().map_or(f64::NAN, |c| c.residual)
    }
}

/// Inequality a weight is checked against.
#[derive(Clone, Debug)]
pub enum Target {
    /// `T_i* P T_i ⪯ P` for every operator.
    Stein(Vec<ComplexMatrix>),
    /// `A*P + PA ⪯ 2λP`.
    Lyapunov { a: ComplexMatrix, shift: f64 },
}

/// Independent recomputation of a certificate's quality.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CheckReport {
    /// Largest eigenvalue of the constraint defect, maximised over constraints.
    pub residual: f64,
    pub kappa: f64,
    pub lambda_min: f64,
    pub lambda_max: f64,
    /// `‖P - P*‖_F` before symmetrisation.
    pub hermitian_defect: f64,
}

/// Recomputes constraint violations and `κ` of `cert` without trusting the solver.
pub fn certificate_check(cert: &WeightCertificate, target: &Target) -> Result<CheckReport> {
    let n = cert.p.nrows();
    let hermitian_defect = (&cert.p - cert.p.adjoint()).norm();
    let p = symmetrize(&cert.p);
    let residual = match target {
        Target::Stein(ops) => {
            let mut worst = f64::NEG_INFINITY;
            for t in ops {
                if t.nrows() != n || t.ncols() != n {
                    return Err(SimError::DimensionMismatch {
                        expected: n,
                        found: t.nrows(),
                    });
                }
                worst = worst.max(lambda_max(&(t.adjoint() * &p * t - &p)));
            }
            worst
        }
        Target::Lyapunov { a, shift } => {
            if a.nrows() != n {
                return Err(SimError::DimensionMismatch {
                    expected: n,
                    found: a.nrows(),
                });
            }
            lambda_max(&(a.adjoint() * &p + &p * a - &p * Complex64::new(2.0 * shift, 0.0)))
        }
    };
    let vals = herm_eigenvalues(&p);
    let (lo, hi) = (vals[0], vals[n - 1]);
    let kappa = if lo > 0.0 {
        (hi / lo).sqrt()
    } else {
        f64::INFINITY
    };
    Ok(CheckReport {
        residual,
        kappa,
        lambda_min: lo,
        lambda_max: hi,
        hermitian_defect,
    })
}

/// Stein operators equivalent to the original inequality, with the tolerance in transformed units.
struct Reduced {
    ops: Vec<ComplexMatrix>,
    tol: f64,
    target: Target,
}

/// Disc automorphism `T ↦ (T + b)(I + bT)^{-1}` balancing the Cayley image of `T`.
fn mobius(t: &ComplexMatrix) -> (ComplexMatrix, f64) {
    let n = t.nrows();
    let eye = ComplexMatrix::identity(n, n);
    let identity_map = (t.clone(), 1.0);
    let Ok(inv) = inverse(&(t + &eye)) else {
        return identity_map;
    };
    let g = (t - &eye) * inv;
    let gn = norm2(&g);
    if !(gn < 1.0) || gn < 1e-12 {
        return identity_map;
    }
    let h = 1.0 / gn;
    let b = ((1.0 - h) / (1.0 + h)).clamp(-0.999, 0.999);
    let den = &eye + t * Complex64::new(b, 0.0);
    let Ok(den_inv) = inverse(&den) else {
        return identity_map;
    };
    let mapped = (t + &eye * Complex64::new(b, 0.0)) * den_inv;
    // Transformed defect = (1 - b²) D^{-*} (original defect) D^{-1} with D = I + bT.
    let factor = (1.0 - b * b) / norm2(&den).powi(2);
    (mapped, factor)
}

fn reduce_stein(ops: &[ComplexMatrix], tol: f64) -> Reduced {
    let mut out = Vec::with_capacity(ops.len());
    let mut factor = 1.0f64;
    for t in ops {
        let (m, f) = mobius(t);
        out.push(m);
        factor = factor.min(f);
    }
    Reduced {
        ops: out,
        tol: tol * factor,
        target: Target::Stein(ops.to_vec()),
    }
}

/// Scaled Cayley transform of `M = A - λI`.
fn reduce_lyapunov(a: &ComplexMatrix, shift: f64, tol: f64) -> Result<Reduced> {
    let n = a.nrows();
    let eye = ComplexMatrix::identity(n, n);
    let m = a - &eye * Complex64::new(shift, 0.0);
    let sv = m.clone().singular_values();
    let smax = sv.max();
    let smin = sv.min();
    let h = if smax > 0.0 {
        1.0 / (smax * smin.max(1e-3 * smax)).sqrt()
    } else {
        1.0
    };
    let den = &eye - &m * Complex64::new(h, 0.0);
    let inv = inverse(&den)?;
    let tc = (&eye + &m * Complex64::new(h, 0.0)) * inv;
    // Stein defect of the transform = 2h (I - hM)^{-*} (M*P + PM) (I - hM)^{-1}.
    let factor = 2.0 * h / norm2(&den).powi(2);
    Ok(Reduced {
        ops: vec![tc],
        tol: tol * factor,
        target: Target::Lyapunov {
            a: a.clone(),
            shift,
        },
    })
}

fn widen_run<F: Scalar>(r: RunOutcome<F>) -> RunOutcome<Complex64> {
    RunOutcome {
        p: widen(&r.p),
        kappa: r.kappa,
        residual: r.residual,
        feasible: r.feasible,
        proven_infeasible: r.proven_infeasible,
        iterations: r.iterations,
    }
}

fn widen_min<F: Scalar>(m: Minimized<F>) -> Minimized<Complex64> {
    Minimized {
        best: m.best.map(widen_run),
        searched_max: m.searched_max,
        lower: m.lower,
    }
}

/// Runs the engine in real arithmetic when every operator is real.
fn with_problem<R>(
    ops: &[ComplexMatrix],
    real: impl FnOnce(&Problem<f64>) -> R,
    complex: impl FnOnce(&Problem<Complex64>) -> R,
) -> R {
    if ops.iter().all(is_real) {
        real(&Problem::new(ops.iter().map(real_part).collect()))
    } else {
        complex(&Problem::new(ops.to_vec()))
    }
}

fn run_once(red: &Reduced, kappa: f64, opts: &SolverOptions) -> RunOutcome<Complex64> {
    let eo = opts.engine(red.tol);
    with_problem(
        &red.ops,
        |pb| widen_run(run(pb, kappa, None, &eo)),
        |pb| run(pb, kappa, None, &eo),
    )
}

fn minimize(red: &Reduced, lower: f64, opts: &SolverOptions) -> Minimized<Complex64> {
    let eo = opts.engine(red.tol);
    with_problem(
        &red.ops,
        |pb| widen_min(minimize_kappa(pb, lower, opts.kappa_max, opts.rel_tol, &eo)),
        |pb| minimize_kappa(pb, lower, opts.kappa_max, opts.rel_tol, &eo),
    )
}

/// Turns an engine weight into a certificate if it passes the original inequality.
fn certify(
    p: &ComplexMatrix,
    target: &Target,
    tol: f64,
) -> Result<(Option<WeightCertificate>, f64)> {
    let cand = WeightCertificate {
        p: herm(p),
        kappa: 0.0,
        residual: 0.0,
    };
    let rep = certificate_check(&cand, target)?;
    if rep.residual <= tol && rep.kappa.is_finite() {
        Ok((
            Some(WeightCertificate {
                p: cand.p,
                kappa: rep.kappa,
                residual: rep.residual,
            }),
            rep.residual,
        ))
    } else {
        Ok((None, rep.residual))
    }
}

fn feasibility(red: Reduced, kappa: f64, opts: &SolverOptions) -> Result<FeasibilityOutcome> {
    let out = run_once(&red, kappa, opts);
    let (cert, residual) = certify(&out.p, &red.target, opts.feas_tol)?;
    let cert = cert.filter(|c| c.kappa <= kappa * (1.0 + opts.kappa_slack) * (1.0 + 1e-12));
    Ok(FeasibilityOutcome {
        proven_infeasible: out.proven_infeasible && cert.is_none(),
        certificate: cert,
        best_residual: residual,
        iterations: out.iterations,
    })
}

fn check_kappa(kappa: f64) -> Result<()> {
    if kappa >= 1.0 && kappa.is_finite() {
        Ok(())
    } else {
        Err(SimError::Domain(format!(
            "kappa must be finite and at least 1, got {kappa}"
        )))
    }
}

fn infeasible_by_spectrum() -> FeasibilityOutcome {
    FeasibilityOutcome {
        certificate: None,
        best_residual: f64::INFINITY,
        iterations: 0,
        proven_infeasible: true,
    }
}

/// Searches `P` with `I ⪯ P ⪯ κ²I` and `T_i* P T_i ⪯ P` for every operator.
pub fn stein_feasible(
    ops: &[ComplexMatrix],
    kappa: f64,
    opts: &SolverOptions,
) -> Result<FeasibilityOutcome> {
    opts.check()?;
    check_kappa(kappa)?;
    let first = ops
        .first()
        .ok_or_else(|| SimError::Domain("empty operator list".into()))?;
    let n = first.nrows();
    for t in ops {
        validate(t)?;
        if t.nrows() != n {
            return Err(SimError::DimensionMismatch {
                expected: n,
                found: t.nrows(),
            });
        }
    }
    for t in ops {
        if obstruction::discrete_obstruction(t)?.is_some() {
            return Ok(infeasible_by_spectrum());
        }
    }
    feasibility(reduce_stein(ops, opts.feas_tol), kappa, opts)
}

/// Searches `P` with `I ⪯ P ⪯ κ²I` and `A*P + PA ⪯ 2λP`.
pub fn lyapunov_feasible(
    a: &ComplexMatrix,
    shift: f64,
    kappa: f64,
    opts: &SolverOptions,
) -> Result<FeasibilityOutcome> {
    opts.check()?;
    check_kappa(kappa)?;
    validate(a)?;
    if obstruction::continuous_obstruction(a, shift)?.is_some() {
        return Ok(infeasible_by_spectrum());
    }
    feasibility(reduce_lyapunov(a, shift, opts.feas_tol)?, kappa, opts)
}

fn verdict(red: Reduced, lower: f64, opts: &SolverOptions) -> Result<SimilarityVerdict> {
    let min = minimize(&red, lower, opts);
    let lower_bound = min.lower.max(lower);
    let cert = match &min.best {
        Some(b) => certify(&b.p, &red.target, opts.feas_tol)?.0,
        None => None,
    };
    let within = |c: &WeightCertificate| c.kappa <= opts.kappa_max * (1.0 + opts.kappa_slack);
    Ok(match cert {
        Some(c) if within(&c) => SimilarityVerdict {
            status: VerdictStatus::Finite,
            constant: c.kappa,
            searched_kappa_max: min.searched_max,
            lower_bound: lower_bound.min(c.kappa),
            certificate: Some(c),
            reason: None,
        },
        _ => SimilarityVerdict {
            status: VerdictStatus::Infeasible,
            constant: f64::INFINITY,
            certificate: None,
            searched_kappa_max: min.searched_max.max(opts.kappa_max),
            lower_bound,
            reason: None,
        },
    })
}

/// `C(T)`: the least `κ` such that `T` is a contraction in some norm `κ`-equivalent to the original.
pub fn discrete_similarity_constant(
    t: &ComplexMatrix,
    opts: &SolverOptions,
) -> Result<SimilarityVerdict> {
    opts.check()?;
    validate(t)?;
    if let Some(reason) = obstruction::discrete_obstruction(t)? {
        return Ok(SimilarityVerdict::unbounded(reason));
    }
    let lower = obstruction::power_norm_bound(t);
    verdict(
        reduce_stein(std::slice::from_ref(t), opts.feas_tol),
        lower,
        opts,
    )
}

/// Similarity constant of `(e^{-λt} e^{tA})_{t ≥ 0}` to a contraction semigroup.
pub fn quasi_similarity_constant(
    a: &ComplexMatrix,
    shift: f64,
    opts: &SolverOptions,
) -> Result<SimilarityVerdict> {
    opts.check()?;
    validate(a)?;
    if !shift.is_finite() {
        return Err(SimError::Domain(format!(
            "shift must be finite, got {shift}"
        )));
    }
    if let Some(reason) = obstruction::continuous_obstruction(a, shift)? {
        return Ok(SimilarityVerdict::unbounded(reason));
    }
    let lower = obstruction::orbit_norm_bound(a, shift)?;
    verdict(reduce_lyapunov(a, shift, opts.feas_tol)?, lower, opts)
}

/// Similarity constant of `(e^{tA})_{t ≥ 0}` to a contraction semigroup.
pub fn joint_similarity_constant(
    a: &ComplexMatrix,
    opts: &SolverOptions,
) -> Result<SimilarityVerdict> {
    quasi_similarity_constant(a, 0.0, opts)
}

/// Joint constant of a semigroup value.
///
/// Generator-backed semigroups use the Lyapunov formulation. Sampled semigroups
/// live on the grid `{kΔ}`, where the family is `{T(Δ)^k}` and the joint
/// constant is `C(T(Δ))`.
pub fn semigroup_similarity_constant(
    sem: &MatrixSemigroup,
    opts: &SolverOptions,
) -> Result<SimilarityVerdict> {
    match sem.kind() {
        SemigroupKind::FromGenerator(a) => joint_similarity_constant(a, opts),
        SemigroupKind::Sampled(_) => discrete_similarity_constant(&sem.eval_steps(1)?, opts),
    }
}

/// Smallest `λ` for which `e^{-λt}e^{tA}` admits a certificate with `κ ≤ kappa_budget`.
///
/// Bisection over `[growth_bound(A), numerical_abscissa(A)]`; the upper end is
/// always attainable with `P = I`. `tol` is an absolute tolerance on `λ`.
pub fn min_quasi_shift(
    a: &ComplexMatrix,
    kappa_budget: f64,
    tol: f64,
    opts: &SolverOptions,
) -> Result<f64> {
    opts.check()?;
    check_kappa(kappa_budget)?;
    validate(a)?;
    if !(tol > 0.0) {
        return Err(SimError::Domain(format!(
            "tolerance must be positive, got {tol}"
        )));
    }
    let mut lo = growth_bound(a)?;
    let mut hi = numerical_abscissa(a);
    if hi - lo <= tol {
        return Ok(hi);
    }
    let feasible = |shift: f64| -> Result<bool> {
        Ok(lyapunov_feasible(a, shift, kappa_budget, opts)?
            .certificate
            .is_some())
    };
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        if feasible(mid)? {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(hi)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::opcore::linalg::{diag_real, from_real_rows};

    #[test]
    fn analytic_nilpotent_constant() {
        let v = discrete_similarity_constant(
            &from_real_rows(&[&[0.0, 2.0], &[0.0, 0.0]]),
            &SolverOptions::default(),
        )
        .unwrap();
        assert_eq!(v.status, VerdictStatus::Finite);
        assert!((v.constant - 2.0).abs() < 1e-4, "{}", v.constant);
    }

    #[test]
    fn lyapunov_jordan_constant() {
        let v = joint_similarity_constant(
            &from_real_rows(&[&[-1.0, 4.0], &[0.0, -1.0]]),
            &SolverOptions::default(),
        )
        .unwrap();
        assert_eq!(v.status, VerdictStatus::Finite);
        assert!((v.constant - 2.0).abs() < 1e-3, "{}", v.constant);
    }

    #[test]
    fn unbounded_cases() {
        let o = SolverOptions::default();
        assert_eq!(
            discrete_similarity_constant(&diag_real(&[1.1, 0.0]), &o)
                .unwrap()
                .status,
            VerdictStatus::Unbounded
        );
        let j = from_real_rows(&[&[0.0, 1.0], &[0.0, 0.0]]);
        assert_eq!(
            joint_similarity_constant(&j, &o).unwrap().status,
            VerdictStatus::Unbounded
        );
        let q = quasi_similarity_constant(&j, 1.0, &o).unwrap();
        assert_eq!(q.status, VerdictStatus::Finite);
        assert!(q.constant <= 2.0);
    }

    #[test]
    fn hand_certificates() {
        let p = WeightCertificate {
            p: diag_real(&[1.0, 4.0]),
            kappa: 2.0,
            residual: 0.0,
        };
        let a = from_real_rows(&[&[-1.0, 4.0], &[0.0, -1.0]]);
        let r = certificate_check(&p, &Target::Lyapunov { a, shift: 0.0 }).unwrap();
        assert!(r.residual <= 1e-12 && (r.kappa - 2.0).abs() < 1e-15);
        let eye = WeightCertificate {
            p: diag_real(&[1.0, 1.0]),
            kappa: 1.0,
            residual: 0.0,
        };
        let t = from_real_rows(&[&[0.0, 2.0], &[0.0, 0.0]]);
        assert!(
            (certificate_check(&eye, &Target::Stein(vec![t]))
                .unwrap()
                .residual
                - 3.0)
                .abs()
                < 1e-14
        );
    }

    #[test]
    fn min_shift_examples() {
        let a = from_real_rows(&[&[-1.0, 4.0], &[0.0, -1.0]]);
        let o = SolverOptions::default();
        assert!(min_quasi_shift(&a, 2.0, 1e-4, &o).unwrap().abs() < 1e-3);
        assert!((min_quasi_shift(&a, 1.0, 1e-4, &o).unwrap() - 1.0).abs() < 1e-3);
    }
}
