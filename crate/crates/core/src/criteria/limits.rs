//! Small-time and large-resolvent behaviour of similarity constants, and the
//! trichotomy classifier built on them.

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Result, SimError};
use crate::opcore::linalg::{validate, ComplexMatrix};
use crate::opcore::semigroup::MatrixSemigroup;
use crate::opcore::spectral::resolvent;
use crate::weightsolve::{
    discrete_similarity_constant, semigroup_similarity_constant, SimilarityVerdict, SolverOptions,
    VerdictStatus,
};

/// Outcome class of one curve point.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum PointStatus {
    Finite,
    Infeasible,
    Unbounded,
    /// The operator at this point could not be formed (for instance a pole of the resolvent).
    Error,
}

impl PointStatus {
    pub fn as_str(self) -> &'static str {
        match self {
            PointStatus::Finite => "Finite",
            PointStatus::Infeasible => "Infeasible",
            PointStatus::Unbounded => "Unbounded",
            PointStatus::Error => "Error",
        }
    }
}

impl From<VerdictStatus> for PointStatus {
    fn from(s: VerdictStatus) -> Self {
        match s {
            VerdictStatus::Finite => PointStatus::Finite,
            VerdictStatus::Infeasible => PointStatus::Infeasible,
            VerdictStatus::Unbounded => PointStatus::Unbounded,
        }
    }
}

/// One sample `parameter ↦ C(operator(parameter))`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CurvePoint {
    pub param: f64,
    pub status: PointStatus,
    /// `+∞` unless finite, `NaN` on error.
    pub constant: f64,
    /// Certificate residual, `NaN` when absent.
    pub residual: f64,
    pub lower_bound: f64,
    pub message: Option<String>,
}

impl CurvePoint {
    fn from_verdict(param: f64, v: &SimilarityVerdict) -> Self {
        Self {
            param,
            status: v.status.into(),
            constant: v.constant,
            residual: v.residual(),
            lower_bound: v.lower_bound,
            message: v.reason.clone(),
        }
    }

    fn error(param: f64, e: &SimError) -> Self {
        Self {
            param,
            status: PointStatus::Error,
            constant: f64::NAN,
            residual: f64::NAN,
            lower_bound: f64::NAN,
            message: Some(e.to_string()),
        }
    }
}

/// A sampled curve of similarity constants.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ConstantCurve {
    /// Points in grid order.
    pub points: Vec<CurvePoint>,
    /// Supremum over non-error points (`+∞` if any point is not finite).
    pub sup: f64,
    /// Constant at the limiting end of the grid (smallest `t`, largest `λ`).
    pub limit_estimate: f64,
}

impl ConstantCurve {
    fn assemble(points: Vec<CurvePoint>, limit_at_end: bool) -> Self {
        let sup = points
            .iter()
            .filter(|p| p.status != PointStatus::Error)
            .map(|p| p.constant)
            .fold(f64::NEG_INFINITY, f64::max);
        let sup = if sup == f64::NEG_INFINITY {
            f64::NAN
        } else {
            sup
        };
        let limit = if limit_at_end {
            points.last()
        } else {
            points.first()
        };
        let limit_estimate = limit.map_or(f64::NAN, |p| p.constant);
        Self {
            points,
            sup,
            limit_estimate,
        }
    }

    /// `|limit_estimate - reference| / reference`.
    pub fn limit_gap(&self, reference: f64) -> f64 {
        (self.limit_estimate - reference).abs() / reference
    }

    /// `|sup - reference| / reference`.
    pub fn sup_gap(&self, reference: f64) -> f64 {
        (self.sup - reference).abs() / reference
    }
}

fn check_grid(grid: &[f64], what: &str) -> Result<()> {
    if grid.is_empty() {
        return Err(SimError::Domain(format!("{what} grid is empty")));
    }
    if grid.iter().any(|&x| !(x > 0.0) || !x.is_finite()) {
        return Err(SimError::Domain(format!(
            "{what} grid must be positive and finite"
        )));
    }
    if grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(SimError::Domain(format!(
            "{what} grid must be strictly increasing"
        )));
    }
    Ok(())
}

/// `t ↦ C(T(t))` on `t_grid` for any semigroup (sampled kinds snap to their grid).
pub fn time_constants(
    sem: &MatrixSemigroup,
    t_grid: &[f64],
    opts: &SolverOptions,
) -> Result<ConstantCurve> {
    check_grid(t_grid, "time")?;
    let points = t_grid
        .iter()
        .map(|&t| {
            match sem
                .eval(t)
                .and_then(|m| discrete_similarity_constant(&m, opts))
            {
                Ok(v) => CurvePoint::from_verdict(t, &v),
                Err(e) => CurvePoint::error(t, &e),
            }
        })
        .collect();
    Ok(ConstantCurve::assemble(points, false))
}

/// `t ↦ C(e^{tA})` on a sorted positive grid.
pub fn small_time_constants(
    a: &ComplexMatrix,
    t_grid: &[f64],
    opts: &SolverOptions,
) -> Result<ConstantCurve> {
    time_constants(&MatrixSemigroup::from_generator(a.clone())?, t_grid, opts)
}

/// `λ ↦ C(λ(λ - A)^{-1})` on a sorted positive grid; poles become error points.
pub fn resolvent_constants(
    a: &ComplexMatrix,
    lambda_grid: &[f64],
    opts: &SolverOptions,
) -> Result<ConstantCurve> {
    validate(a)?;
    check_grid(lambda_grid, "lambda")?;
    let points = lambda_grid
        .iter()
        .map(|&l| {
            let op = resolvent(a, Complex64::new(l, 0.0)).map(|r| r * Complex64::new(l, 0.0));
            match op.and_then(|m| discrete_similarity_constant(&m, opts)) {
                Ok(v) => CurvePoint::from_verdict(l, &v),
                Err(e) => CurvePoint::error(l, &e),
            }
        })
        .collect();
    Ok(ConstantCurve::assemble(points, true))
}

/// Which of the three mutually exclusive alternatives the evidence supports.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum TrichotomyCase {
    /// The whole semigroup is similar to a contraction semigroup.
    SimilarContraction,
    /// Every tail `(T(t))_{t ≥ τ}` is jointly similar to contractions, but not the whole family.
    TailOnlySimilar,
    /// No `T(t)`, `t > 0`, is similar to a contraction.
    NeverSimilar,
}

impl TrichotomyCase {
    pub fn as_str(self) -> &'static str {
        match self {
            TrichotomyCase::SimilarContraction => "SimilarContraction",
            TrichotomyCase::TailOnlySimilar => "TailOnlySimilar",
            TrichotomyCase::NeverSimilar => "NeverSimilar",
        }
    }
}

/// Compact, serialisable view of a [`SimilarityVerdict`].
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct VerdictSummary {
    pub status: VerdictStatus,
    pub constant: f64,
    pub lower_bound: f64,
    pub residual: f64,
    pub reason: Option<String>,
}

impl From<&SimilarityVerdict> for VerdictSummary {
    fn from(v: &SimilarityVerdict) -> Self {
        Self {
            status: v.status,
            constant: v.constant,
            lower_bound: v.lower_bound,
            residual: v.residual(),
            reason: v.reason.clone(),
        }
    }
}

/// One member of a truncation family.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FamilyPoint {
    pub label: String,
    pub dim: usize,
    pub verdict: VerdictSummary,
}

/// Constants across a family of truncations, ordered as supplied.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FamilyCurve {
    pub points: Vec<FamilyPoint>,
    /// Constants increase strictly along the family.
    pub strictly_increasing: bool,
}

/// Input to [`classify`].
#[derive(Clone, Debug)]
pub enum ClassifyInput {
    Generator(ComplexMatrix),
    /// Labelled truncations; the last member is the representative.
    Family(Vec<(String, MatrixSemigroup)>),
}

/// Evidence and verdict of the trichotomy classifier.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TrichotomyReport {
    pub case: TrichotomyCase,
    /// Joint constant of the representative.
    pub joint: VerdictSummary,
    /// `t ↦ C(T(t))` for the representative.
    pub t_curve: ConstantCurve,
    /// `λ ↦ C(λ(λ - A)^{-1})`, generator inputs only.
    pub lambda_curve: Option<ConstantCurve>,
    pub family: Option<FamilyCurve>,
}

/// Default time grid `2^{-10}, 2^{-9}, …, 2^3`.
pub fn default_time_grid() -> Vec<f64> {
    (-10..=3).map(|k| 2f64.powi(k)).collect()
}

/// Default resolvent grid `4, 16, …, 4^7`.
pub fn default_lambda_grid() -> Vec<f64> {
    (1..=7).map(|k| 4f64.powi(k)).collect()
}

fn decide(joint: &SimilarityVerdict, t_curve: &ConstantCurve) -> TrichotomyCase {
    if joint.is_finite() {
        TrichotomyCase::SimilarContraction
    } else if t_curve
        .points
        .iter()
        .any(|p| p.status == PointStatus::Finite)
    {
        TrichotomyCase::TailOnlySimilar
    } else {
        TrichotomyCase::NeverSimilar
    }
}

/// Classifies a generator or a truncation family.
///
/// At a fixed finite dimension the case is read off the representative: a
/// finite joint constant gives the first alternative, finite constants at some
/// grid times the second, and none the third. For families the divergence of
/// the constants across truncations is reported separately; it is the only
/// evidence for the infinite-dimensional alternatives.
pub fn classify(
    input: &ClassifyInput,
    t_grid: &[f64],
    opts: &SolverOptions,
) -> Result<TrichotomyReport> {
    match input {
        ClassifyInput::Generator(a) => {
            let sem = MatrixSemigroup::from_generator(a.clone())?;
            let joint = semigroup_similarity_constant(&sem, opts)?;
            let t_curve = time_constants(&sem, t_grid, opts)?;
            let lambda_curve = resolvent_constants(a, &default_lambda_grid(), opts)?;
            Ok(TrichotomyReport {
                case: decide(&joint, &t_curve),
                joint: (&joint).into(),
                t_curve,
                lambda_curve: Some(lambda_curve),
                family: None,
            })
        }
        ClassifyInput::Family(members) => {
            let Some((_, rep)) = members.last() else {
                return Err(SimError::Domain("empty family".into()));
            };
            let mut points = Vec::with_capacity(members.len());
            let mut rep_joint = None;
            for (label, sem) in members {
                let v = semigroup_similarity_constant(sem, opts)?;
                points.push(FamilyPoint {
                    label: label.clone(),
                    dim: sem.dim(),
                    verdict: (&v).into(),
                });
                rep_joint = Some(v);
            }
            let rep_joint = rep_joint.expect("non-empty family");
            let strictly_increasing = points
                .windows(2)
                .all(|w| w[1].verdict.constant > w[0].verdict.constant);
            let t_curve = time_constants(rep, t_grid, opts)?;
            Ok(TrichotomyReport {
                case: decide(&rep_joint, &t_curve),
                joint: (&rep_joint).into(),
                t_curve,
                lambda_curve: None,
                family: Some(FamilyCurve {
                    points,
                    strictly_increasing,
                }),
            })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::opcore::linalg::{diag_real, from_real_rows};

    fn skew() -> ComplexMatrix {
        from_real_rows(&[&[0.0, 2.0], &[-2.0, 0.0]])
    }

    #[test]
    fn skew_curves_are_flat() {
        let opts = SolverOptions::default();
        let c = small_time_constants(&skew(), &[0.1, 1.0, 3.0], &opts).unwrap();
        assert!(c.points.iter().all(|p| (p.constant - 1.0).abs() < 1e-6));
        let r = resolvent_constants(&skew(), &[1.0, 10.0], &opts).unwrap();
        assert!((r.sup - 1.0).abs() < 1e-6);
    }

    #[test]
    fn jordan_small_time_limit() {
        let a = from_real_rows(&[&[-1.0, 4.0], &[0.0, -1.0]]);
        let opts = SolverOptions::default();
        let c = small_time_constants(&a, &[1e-3, 0.1, 1.0], &opts).unwrap();
        assert!(c.sup <= 2.0 * (1.0 + 1e-3), "{}", c.sup);
        assert!(
            (c.limit_estimate - 2.0).abs() < 2e-2,
            "{}",
            c.limit_estimate
        );
        let r = resolvent_constants(&a, &[4.0, 16.0, 64.0, 256.0], &opts).unwrap();
        let k: Vec<f64> = r.points.iter().map(|p| p.constant).collect();
        assert!(k.windows(2).all(|w| w[1] >= w[0] - 1e-4), "{k:?}");
        assert!(k[3] < 2.0 + 1e-3);
    }

    #[test]
    fn unstable_generator_turns_unbounded() {
        let c = small_time_constants(
            &diag_real(&[0.1, -1.0]),
            &[0.5, 2.0],
            &SolverOptions::default(),
        )
        .unwrap();
        assert!(c.points.iter().all(|p| p.status == PointStatus::Unbounded));
        assert_eq!(c.sup, f64::INFINITY);
    }

    #[test]
    fn resolvent_pole_is_local() {
        let c = resolvent_constants(
            &diag_real(&[1.0, -1.0]),
            &[1.0, 2.0],
            &SolverOptions::default(),
        )
        .unwrap();
        assert_eq!(c.points[0].status, PointStatus::Error);
        assert_ne!(c.points[1].status, PointStatus::Error);
    }

    #[test]
    fn classifier_cases() {
        let opts = SolverOptions::default();
        let grid = [0.25, 1.0];
        let r = classify(
            &ClassifyInput::Generator(diag_real(&[-1.0, -2.0])),
            &grid,
            &opts,
        )
        .unwrap();
        assert_eq!(r.case, TrichotomyCase::SimilarContraction);
        assert!((r.joint.constant - 1.0).abs() < 1e-6);
        let r = classify(
            &ClassifyInput::Generator(from_real_rows(&[&[0.0, 1.0], &[0.0, 0.0]])),
            &grid,
            &opts,
        )
        .unwrap();
        assert_eq!(r.case, TrichotomyCase::NeverSimilar);
        assert!(check_grid(&[1.0, 0.5], "t").is_err());
    }
}
