//! One-parameter matrix semigroups given by a generator or by a grid sampler.

use std::fmt;
use std::sync::Arc;

use serde::Serialize;

use super::expm::expm_semigroup;
use super::linalg::{validate, ComplexMatrix};
use super::spectral::operator_norm;
use crate::error::{Result, SimError};

/// Name and parameter record of a gallery construction.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Descriptor {
    pub name: String,
    pub params: Vec<(String, String)>,
}

impl Descriptor {
    pub fn new(name: &str) -> Self {
        Self {
            name: name.to_string(),
            params: Vec::new(),
        }
    }

    pub fn with(mut self, key: &str, value: impl fmt::Display) -> Self {
        self.params.push((key.to_string(), value.to_string()));
        self
    }
}

#[derive(Clone, Debug)]
pub enum SemigroupKind {
    FromGenerator(ComplexMatrix),
    Sampled(Descriptor),
}

/// Result of aligning a requested time to the sampler's grid.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SnapReport {
    pub requested: f64,
    pub snapped: f64,
    /// Number of grid steps in `snapped` (zero for generator-backed semigroups).
    pub steps: u64,
    pub distance: f64,
}

type Sampler = dyn Fn(u64) -> Result<ComplexMatrix> + Send + Sync;

/// `t ↦ T(t)` on `C^dim`.
///
/// Sampled semigroups are defined on the grid `{kΔ}`; requests off the grid
/// are snapped to the nearest grid time and the snap distance is reported.
#[derive(Clone)]
pub struct MatrixSemigroup {
    dim: usize,
    kind: SemigroupKind,
    step: Option<f64>,
    law_tol: f64,
    sampler: Option<Arc<Sampler>>,
}

impl fmt::Debug for MatrixSemigroup {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("MatrixSemigroup")
            .field("dim", &self.dim)
            .field("kind", &self.kind)
            .field("step", &self.step)
            .field("law_tol", &self.law_tol)
            .finish()
    }
}

/// Semigroup-law tolerance for generator-backed semigroups.
pub const GENERATOR_LAW_TOL: f64 = 1e-10;

impl MatrixSemigroup {
    pub fn from_generator(a: ComplexMatrix) -> Result<Self> {
        validate(&a)?;
        Ok(Self {
            dim: a.nrows(),
            kind: SemigroupKind::FromGenerator(a),
            step: None,
            law_tol: GENERATOR_LAW_TOL,
            sampler: None,
        })
    }

    /// The trivial semigroup `T(t) = I`.
    pub fn identity(dim: usize) -> Self {
        Self::from_generator(ComplexMatrix::zeros(dim, dim)).expect("zero generator is valid")
    }

    /// Grid semigroup; `sampler(k)` must return `T(k·step)`.
    pub fn sampled(
        descriptor: Descriptor,
        dim: usize,
        step: f64,
        law_tol: f64,
        sampler: impl Fn(u64) -> Result<ComplexMatrix> + Send + Sync + 'static,
    ) -> Self {
        Self {
            dim,
            kind: SemigroupKind::Sampled(descriptor),
            step: Some(step),
            law_tol,
            sampler: Some(Arc::new(sampler)),
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn kind(&self) -> &SemigroupKind {
        &self.kind
    }

    /// Grid step of a sampled semigroup.
    pub fn step(&self) -> Option<f64> {
        self.step
    }

    /// Documented tolerance for `‖T(s+t) - T(s)T(t)‖` on aligned times.
    pub fn law_tol(&self) -> f64 {
        self.law_tol
    }

    pub fn generator(&self) -> Option<&ComplexMatrix> {
        match &self.kind {
            SemigroupKind::FromGenerator(a) => Some(a),
            SemigroupKind::Sampled(_) => None,
        }
    }

    /// Aligns `t` to the grid.
    pub fn snap(&self, t: f64) -> Result<SnapReport> {
        if !(t >= 0.0) || !t.is_finite() {
            return Err(SimError::Domain(format!(
                "time must be finite and non-negative, got {t}"
            )));
        }
        Ok(match self.step {
            None => SnapReport {
                requested: t,
                snapped: t,
                steps: 0,
                distance: 0.0,
            },
            Some(h) => {
                let k = (t / h).round();
                let snapped = k * h;
                SnapReport {
                    requested: t,
                    snapped,
                    steps: k as u64,
                    distance: (t - snapped).abs(),
                }
            }
        })
    }

    /// `T(t)` together with the snap report.
    pub fn eval_snapped(&self, t: f64) -> Result<(ComplexMatrix, SnapReport)> {
        let snap = self.snap(t)?;
        let m = match (&self.kind, &self.sampler) {
            (SemigroupKind::FromGenerator(a), _) => expm_semigroup(a, t)?,
            (SemigroupKind::Sampled(_), Some(s)) => s(snap.steps)?,
            (SemigroupKind::Sampled(_), None) => {
                unreachable!("sampled semigroups always carry a sampler")
            }
        };
        Ok((m, snap))
    }

    /// `T(t)`, snapping to the grid for sampled kinds.
    pub fn eval(&self, t: f64) -> Result<ComplexMatrix> {
        Ok(self.eval_snapped(t)?.0)
    }

    /// `T(k·step)` for sampled kinds, `T(k)` for generator-backed ones.
    pub fn eval_steps(&self, k: u64) -> Result<ComplexMatrix> {
        match (&self.kind, &self.sampler) {
            (SemigroupKind::Sampled(_), Some(s)) => s(k),
            _ => self.eval(k as f64),
        }
    }

    /// `‖T(s+t) - T(s)T(t)‖` at (snapped) times.
    pub fn law_residual(&self, s: f64, t: f64) -> Result<f64> {
        let (ts, a) = self.eval_snapped(s)?;
        let (tt, b) = self.eval_snapped(t)?;
        let sum = self.eval(a.snapped + b.snapped)?;
        Ok(operator_norm(&(sum - ts * tt)))
    }
}
