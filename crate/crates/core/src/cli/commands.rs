//! The six subcommands. Each returns the files to write and its exit status.

use serde::Serialize;

use super::config::{Command, HorizonSpec, Mode, RunConfig};
use super::emit::{fmt_f64, to_csv, to_json, Cell};
use super::Exit;
use crate::control::{
    duality_check, infinite_gramian, naboko_integral, observability_gramian, DualityReport,
    GramianReport, Horizon, ObservedSystem,
};
use crate::criteria::{
    classify, holbrook_certificate_audit, semigroup_simconst_audit, BoundAudit, ClassifyInput,
    ConstantCurve, TrichotomyReport,
};
use crate::error::{Result, SimError};
use crate::gallery::{IdentityCheck, SuiteReport};
use crate::opcore::json::{matrix_from_json_str, MatrixJson};
use crate::opcore::linalg::ComplexMatrix;
use crate::opcore::semigroup::{MatrixSemigroup, SnapReport};
use crate::weightsolve::{
    discrete_similarity_constant, joint_similarity_constant, quasi_similarity_constant,
    semigroup_similarity_constant, SimilarityVerdict, VerdictStatus,
};

/// Files produced by a command, its exit status and a one-line summary.
pub struct Outcome {
    pub files: Vec<(String, String)>,
    pub exit: Exit,
    pub summary: String,
}

pub fn dispatch(cfg: &RunConfig) -> Result<Outcome> {
    match cfg.command {
        Command::Constant => cmd_constant(cfg),
        Command::Classify => cmd_classify(cfg),
        Command::Gallery => cmd_gallery(cfg),
        Command::Audit => cmd_audit(cfg),
        Command::Observe => cmd_observe(cfg),
        Command::Naboko => cmd_naboko(cfg),
    }
}

fn read(cfg: &RunConfig, p: &str) -> Result<String> {
    let path = cfg.resolve(p);
    std::fs::read_to_string(&path).map_err(|e| SimError::Io(format!("{}: {e}", path.display())))
}

fn input_matrix(cfg: &RunConfig) -> Result<(String, ComplexMatrix)> {
    let p = cfg
        .input
        .as_deref()
        .ok_or_else(|| SimError::Parse("missing input".into()))?;
    Ok((p.to_string(), matrix_from_json_str(&read(cfg, p)?)?))
}

fn input_system(cfg: &RunConfig) -> Result<(String, ObservedSystem)> {
    let p = cfg
        .system
        .as_deref()
        .ok_or_else(|| SimError::Parse("missing system".into()))?;
    Ok((
        p.to_string(),
        ObservedSystem::from_json_str(&read(cfg, p)?)?,
    ))
}

/// Label and semigroup from either a matrix input (as generator) or a gallery construction.
fn input_semigroup(cfg: &RunConfig) -> Result<(String, MatrixSemigroup)> {
    match &cfg.gallery {
        Some(g) => g.build(),
        None => {
            let (label, a) = input_matrix(cfg)?;
            Ok((label, MatrixSemigroup::from_generator(a)?))
        }
    }
}

#[derive(Serialize)]
struct CertificateOut {
    kappa: f64,
    residual: f64,
    weight: MatrixJson,
}

#[derive(Serialize)]
struct ConstantOut {
    command: &'static str,
    input: String,
    mode: &'static str,
    shift: Option<f64>,
    dim: usize,
    status: VerdictStatus,
    constant: f64,
    lower_bound: f64,
    searched_kappa_max: f64,
    reason: Option<String>,
    certificate: Option<CertificateOut>,
}

fn verdict_exit(v: &SimilarityVerdict) -> Exit {
    match v.status {
        VerdictStatus::Finite => Exit::Ok,
        VerdictStatus::Unbounded => Exit::Unbounded,
        VerdictStatus::Infeasible => Exit::Infeasible,
    }
}

/// Similarity constant of a matrix (discrete, joint or quasi) or of a gallery semigroup.
pub fn cmd_constant(cfg: &RunConfig) -> Result<Outcome> {
    let (label, dim, mode, shift, v) = match &cfg.gallery {
        Some(g) => {
            let (label, sem) = g.build()?;
            let v = semigroup_similarity_constant(&sem, &cfg.solver)?;
            (label, sem.dim(), "semigroup", None, v)
        }
        None => {
            let (label, a) = input_matrix(cfg)?;
            let v = match cfg.mode {
                Mode::Discrete => discrete_similarity_constant(&a, &cfg.solver)?,
                Mode::Joint => joint_similarity_constant(&a, &cfg.solver)?,
                Mode::Quasi => quasi_similarity_constant(&a, cfg.shift, &cfg.solver)?,
            };
            let shift = (cfg.mode == Mode::Quasi).then_some(cfg.shift);
            (label, a.nrows(), cfg.mode.as_str(), shift, v)
        }
    };
    let out = ConstantOut {
        command: "constant",
        input: label,
        mode,
        shift,
        dim,
        status: v.status,
        constant: v.constant,
        lower_bound: v.lower_bound,
        searched_kappa_max: v.searched_kappa_max,
        reason: v.reason.clone(),
        certificate: v.certificate.as_ref().map(|c| CertificateOut {
            kappa: c.kappa,
            residual: c.residual,
            weight: MatrixJson::from_matrix(&c.p),
        }),
    };
    Ok(Outcome {
        files: vec![("constant.json".into(), to_json(&out)?)],
        exit: verdict_exit(&v),
        summary: format!("constant: {} {}", v.status.as_str(), fmt_f64(v.constant)),
    })
}

fn curve_csv(curve: &ConstantCurve) -> String {
    let rows: Vec<Vec<Cell>> = curve
        .points
        .iter()
        .map(|p| {
            vec![
                Cell::Num(p.param),
                Cell::Num(p.constant),
                Cell::Text(p.status.as_str().into()),
                Cell::Num(p.residual),
            ]
        })
        .collect();
    to_csv(&["parameter", "constant", "status", "residual"], &rows)
}

#[derive(Serialize)]
struct ClassifyOut<'a> {
    command: &'static str,
    input: String,
    report: &'a TrichotomyReport,
}

/// Trichotomy classification with its `t`, `λ` and family curves.
pub fn cmd_classify(cfg: &RunConfig) -> Result<Outcome> {
    let (label, input) = match &cfg.gallery {
        Some(g) => (g.build()?.0, ClassifyInput::Family(g.family()?)),
        None => {
            let (label, a) = input_matrix(cfg)?;
            (label, ClassifyInput::Generator(a))
        }
    };
    let report = classify(&input, &cfg.t_grid, &cfg.solver)?;
    let mut files = vec![
        (
            "classify.json".into(),
            to_json(&ClassifyOut {
                command: "classify",
                input: label,
                report: &report,
            })?,
        ),
        ("t_curve.csv".into(), curve_csv(&report.t_curve)),
    ];
    if let Some(l) = &report.lambda_curve {
        files.push(("lambda_curve.csv".into(), curve_csv(l)));
    }
    if let Some(f) = &report.family {
        let rows: Vec<Vec<Cell>> = f
            .points
            .iter()
            .map(|p| {
                vec![
                    Cell::Text(p.label.clone()),
                    Cell::Num(p.verdict.constant),
                    Cell::Text(p.verdict.status.as_str().into()),
                    Cell::Num(p.verdict.residual),
                ]
            })
            .collect();
        files.push((
            "family.csv".into(),
            to_csv(&["parameter", "constant", "status", "residual"], &rows),
        ));
    }
    Ok(Outcome {
        files,
        exit: Exit::Ok,
        summary: format!("classify: {}", report.case.as_str()),
    })
}

#[derive(Serialize)]
struct SampleOut {
    snap: SnapReport,
    operator: MatrixJson,
}

#[derive(Serialize)]
struct GalleryOut<'a> {
    command: &'static str,
    construction: String,
    dim: usize,
    step: Option<f64>,
    passed: bool,
    checks: &'a [IdentityCheck],
    samples: Vec<SampleOut>,
}

/// Identity suite of a gallery construction plus sampled operators.
pub fn cmd_gallery(cfg: &RunConfig) -> Result<Outcome> {
    let g = cfg
        .gallery
        .as_ref()
        .ok_or_else(|| SimError::Parse("gallery needs kind".into()))?;
    let (label, sem) = g.build()?;
    let suite: SuiteReport = g.suite()?;
    let samples = cfg
        .sample_times
        .iter()
        .map(|&t| {
            let (op, snap) = sem.eval_snapped(t)?;
            Ok(SampleOut {
                snap,
                operator: MatrixJson::from_matrix(&op),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let misaligned = samples.iter().filter(|s| s.snap.distance > 0.0).count();
    let passed = suite.passed();
    let out = GalleryOut {
        command: "gallery",
        construction: label.clone(),
        dim: sem.dim(),
        step: sem.step(),
        passed,
        checks: &suite.checks,
        samples,
    };
    let mut summary = format!(
        "gallery: {label}: {}",
        if passed {
            "all identities hold"
        } else {
            "identity check failed"
        }
    );
    if misaligned > 0 {
        summary.push_str(&format!(" ({misaligned} sample times snapped to the grid)"));
    }
    Ok(Outcome {
        files: vec![("gallery.json".into(), to_json(&out)?)],
        exit: if passed { Exit::Ok } else { Exit::Infeasible },
        summary,
    })
}

#[derive(Serialize)]
struct AuditOut {
    command: &'static str,
    input: String,
    simconst: BoundAudit,
    holbrook: Option<BoundAudit>,
}

/// Bound audits: the similarity-constant bound and the Holbrook certificate bound at `T(τ)`.
pub fn cmd_audit(cfg: &RunConfig) -> Result<Outcome> {
    let (label, sem) = input_semigroup(cfg)?;
    let simconst = semigroup_simconst_audit(&sem, cfg.lambda, cfg.tau, &cfg.solver)?;
    let t = sem.eval(cfg.tau)?;
    let holbrook = holbrook_certificate_audit(&t, cfg.holbrook_horizon, &cfg.solver)?;
    let failed = simconst.failed() || holbrook.as_ref().is_some_and(|h| h.failed());
    let summary = format!(
        "audit: simconst {}, holbrook {}",
        simconst.status.as_str(),
        holbrook
            .as_ref()
            .map_or("not applicable", |h| h.status.as_str())
    );
    let out = AuditOut {
        command: "audit",
        input: label,
        simconst,
        holbrook,
    };
    Ok(Outcome {
        files: vec![("audit.json".into(), to_json(&out)?)],
        exit: if failed { Exit::Infeasible } else { Exit::Ok },
        summary,
    })
}

#[derive(Serialize)]
struct GramianOut {
    horizon: Horizon,
    gramian: MatrixJson,
    alpha: f64,
    beta: f64,
    gramian_alpha: f64,
    admissible: bool,
    exactly_observable: bool,
    residual: Option<f64>,
    contraction_norm: Option<f64>,
}

impl From<&GramianReport> for GramianOut {
    fn from(r: &GramianReport) -> Self {
        Self {
            horizon: r.horizon,
            gramian: MatrixJson::from_matrix(&r.gramian),
            alpha: r.alpha,
            beta: r.beta,
            gramian_alpha: r.gramian_alpha,
            admissible: r.admissible,
            exactly_observable: r.exactly_observable,
            residual: r.residual,
            contraction_norm: r.contraction_norm,
        }
    }
}

#[derive(Serialize)]
struct ObserveOut {
    command: &'static str,
    system: String,
    label: String,
    gramian: GramianOut,
    duality: DualityReport,
}

/// Observability Gramian (finite or infinite horizon) and the duality check at `τ`.
pub fn cmd_observe(cfg: &RunConfig) -> Result<Outcome> {
    let (path, sys) = input_system(cfg)?;
    let report = match cfg.horizon {
        HorizonSpec::Infinite => infinite_gramian(&sys)?,
        HorizonSpec::Finite(t) => observability_gramian(&sys, t)?,
    };
    let duality = duality_check(&sys, cfg.tau)?;
    let summary = format!(
        "observe: alpha {} beta {}",
        fmt_f64(report.alpha),
        fmt_f64(report.beta)
    );
    let out = ObserveOut {
        command: "observe",
        system: path,
        label: sys.label.clone(),
        gramian: (&report).into(),
        duality,
    };
    Ok(Outcome {
        files: vec![("observe.json".into(), to_json(&out)?)],
        exit: Exit::Ok,
        summary,
    })
}

#[derive(Serialize)]
struct NabokoPoint {
    eps: f64,
    quad_min: f64,
    quad_max: f64,
    plancherel_min: f64,
    plancherel_max: f64,
    max_relative_gap: f64,
    quad_error: f64,
}

#[derive(Serialize)]
struct NabokoOut {
    command: &'static str,
    system: String,
    label: String,
    xi_max: f64,
    points: Vec<NabokoPoint>,
}

/// Resolvent-integral curve over `eps_grid`, in quadrature and Plancherel form.
pub fn cmd_naboko(cfg: &RunConfig) -> Result<Outcome> {
    let (path, sys) = input_system(cfg)?;
    let points = cfg
        .eps_grid
        .iter()
        .map(|&eps| {
            let r = naboko_integral(&sys.a, Some(&sys.c), eps, &cfg.naboko)?;
            Ok(NabokoPoint {
                eps,
                quad_min: r.quad_min,
                quad_max: r.quad_max,
                plancherel_min: r.plancherel_min,
                plancherel_max: r.plancherel_max,
                max_relative_gap: r.max_relative_gap,
                quad_error: r.quad_error,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let rows: Vec<Vec<Cell>> = points
        .iter()
        .map(|p| {
            vec![
                Cell::Num(p.eps),
                Cell::Num(p.quad_min),
                Cell::Num(p.quad_max),
                Cell::Num(p.plancherel_min),
                Cell::Num(p.plancherel_max),
                Cell::Num(p.max_relative_gap),
            ]
        })
        .collect();
    let csv = to_csv(
        &[
            "parameter",
            "quad_min",
            "quad_max",
            "plancherel_min",
            "plancherel_max",
            "max_relative_gap",
        ],
        &rows,
    );
    let worst = points
        .iter()
        .map(|p| p.max_relative_gap)
        .fold(0.0, f64::max);
    let out = NabokoOut {
        command: "naboko",
        system: path,
        label: sys.label.clone(),
        xi_max: cfg.naboko.xi_max,
        points,
    };
    Ok(Outcome {
        files: vec![
            ("naboko.json".into(), to_json(&out)?),
            ("naboko.csv".into(), csv),
        ],
        exit: Exit::Ok,
        summary: format!(
            "naboko: {} points, largest quadrature/Plancherel gap {}",
            cfg.eps_grid.len(),
            fmt_f64(worst)
        ),
    })
}
