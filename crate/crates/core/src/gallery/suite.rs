//! Identity suites: the algebraic facts each construction must satisfy on its grid.
//!
//! Every check reports the worst residual over a set of aligned times together
//! with the tolerance it is held to, so a suite can be printed, serialised or
//! asserted on without recomputation.

use serde::Serialize;

use super::bhat::{
    bhat_skeide_envelope, bhat_skeide_matrix, bhat_skeide_weight, identity_tensor_power,
};
use super::grid::{left_shift_matrix, right_shift_matrix, GridSpace};
use super::packel::{packel_reflection, DyadicSequence};
use super::wsemi::{
    int_q_exact, int_q_value, lambda_i_weight, periodic_shift, w_matrix, wrap_fill,
};
use crate::error::Result;
use crate::opcore::linalg::ComplexMatrix;
use crate::opcore::semigroup::MatrixSemigroup;
use crate::opcore::spectral::{operator_norm, weighted_norm};

/// One identity: `value ≤ tol` passes.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct IdentityCheck {
    pub name: String,
    /// Worst residual (or bound excess) over the sampled times.
    pub value: f64,
    pub tol: f64,
    /// Number of time points or pairs examined.
    pub samples: usize,
    pub passed: bool,
}

impl IdentityCheck {
    fn new(name: &str, value: f64, tol: f64, samples: usize) -> Self {
        Self {
            name: name.into(),
            value,
            tol,
            samples,
            passed: value <= tol,
        }
    }
}

/// All checks for one construction.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SuiteReport {
    pub construction: String,
    pub checks: Vec<IdentityCheck>,
}

impl SuiteReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn check(&self, name: &str) -> Option<&IdentityCheck> {
        self.checks.iter().find(|c| c.name == name)
    }
}

/// Step counts `0, s, 2s, …, max` with about `count` entries, always including `max`.
fn strided(max: u64, count: u64) -> Vec<u64> {
    let stride = (max / count.max(1)).max(1);
    let mut out: Vec<u64> = (0..=max).step_by(stride as usize).collect();
    if out.last() != Some(&max) {
        out.push(max);
    }
    out
}

fn frobenius_gap(a: &ComplexMatrix, b: &ComplexMatrix) -> f64 {
    (a - b).norm()
}

/// Worst `‖T(s+t) - T(s)T(t)‖_F` over pairs of step counts.
fn law_check(sem: &MatrixSemigroup, steps: &[u64], tol: f64) -> Result<IdentityCheck> {
    let mut worst = 0.0f64;
    let mut n = 0;
    for &s in steps {
        for &t in steps {
            let lhs = sem.eval_steps(s + t)?;
            let rhs = sem.eval_steps(s)? * sem.eval_steps(t)?;
            worst = worst.max(frobenius_gap(&lhs, &rhs));
            n += 1;
        }
    }
    Ok(IdentityCheck::new("semigroup_law", worst, tol, n))
}

/// `W` on `m` cells (step `1/m`), over aligned times in `[0, 3]`.
///
/// * `almost_semigroup`: `V(s+t) = R_p(s)V(t) + V(s)R(t)`;
/// * `lambda_contraction`: `‖W(t)‖` in the `Λ_I` norm minus one;
/// * `int_q`: distance of `Q V(t) χ_{[0,1/2]}` from its three-regime value, held to `2/m`.
pub fn w_suite(m: usize) -> SuiteReport {
    let mu = m as u64;
    let pairs = strided(2 * mu, 16);
    let mut worst = 0.0f64;
    for &s in &pairs {
        for &t in &pairs {
            let rhs =
                periodic_shift(m, s) * wrap_fill(m, t) + wrap_fill(m, s) * right_shift_matrix(m, t);
            worst = worst.max(frobenius_gap(&wrap_fill(m, s + t), &rhs));
        }
    }
    let almost = IdentityCheck::new("almost_semigroup", worst, 1e-12, pairs.len() * pairs.len());

    let g = lambda_i_weight(m, 1);
    let excess = (0..=3 * mu)
        .map(|j| weighted_norm(&w_matrix(m, j), &g).unwrap_or(f64::INFINITY) - 1.0)
        .fold(f64::NEG_INFINITY, f64::max);
    let contraction = IdentityCheck::new("lambda_contraction", excess.max(0.0), 1e-10, 3 * m + 1);

    let q = (0..=mu)
        .map(|j| (int_q_value(m, j) - int_q_exact(j as f64 / m as f64)).abs())
        .fold(0.0, f64::max);
    let int_q = IdentityCheck::new("int_q", q, 2.0 / m as f64, m + 1);

    let mut law_worst = 0.0f64;
    for &s in &pairs {
        for &t in &pairs {
            law_worst = law_worst.max(frobenius_gap(
                &w_matrix(m, s + t),
                &(w_matrix(m, s) * w_matrix(m, t)),
            ));
        }
    }
    let law = IdentityCheck::new("semigroup_law", law_worst, 1e-12, pairs.len() * pairs.len());
    SuiteReport {
        construction: format!("w_semigroup m={m}"),
        checks: vec![almost, contraction, int_q, law],
    }
}

/// Packel reflections on `space`.
///
/// * `reflection_identity`: `V_a(s+t) = L(s)V_a(t) + V_a(s)R(t)`;
/// * `reflection_contraction`: `‖V_a(t)‖ - 1`.
pub fn packel_suite(a: &DyadicSequence, space: &GridSpace) -> Result<SuiteReport> {
    let v = packel_reflection(a, space)?;
    let m = space.m;
    let steps = strided(m as u64, 16);
    let mut worst = 0.0f64;
    let mut norm_excess = 0.0f64;
    for &s in &steps {
        norm_excess = norm_excess.max(operator_norm(&v(s)) - 1.0);
        for &t in &steps {
            let rhs = left_shift_matrix(m, s) * v(t) + v(s) * right_shift_matrix(m, t);
            worst = worst.max(frobenius_gap(&v(s + t), &rhs));
        }
    }
    let n = steps.len();
    Ok(SuiteReport {
        construction: format!(
            "packel {:?} window {}..={} X={} m={m}",
            a.index_set,
            a.start,
            a.end(),
            space.nu
        ),
        checks: vec![
            IdentityCheck::new("reflection_identity", worst, 1e-12, n * n),
            IdentityCheck::new("reflection_contraction", norm_excess.max(0.0), 1e-12, n),
        ],
    })
}

/// Bhat-Skeide interpolation of `I ⊗ T` on a circle of `m` cells.
///
/// * `integer_times`: `T(n) = I ⊗ T^n` for `n = 1, 2, 3`, exactly;
/// * `envelope`: weighted norm at `t = k/m ∈ (0, 1)` above `(1/(1-t) + t‖T‖²)^{1/2}`, held to `4/m`.
pub fn bhat_suite(t: &ComplexMatrix, m: usize) -> SuiteReport {
    let mu = m as u64;
    let exact = (1..=3u64)
        .map(|n| {
            frobenius_gap(
                &bhat_skeide_matrix(t, m, n * mu),
                &identity_tensor_power(t, m, n),
            )
        })
        .fold(0.0, f64::max);
    let p = bhat_skeide_weight(t, m);
    let tn = operator_norm(t);
    let excess = (1..mu)
        .map(|k| {
            weighted_norm(&bhat_skeide_matrix(t, m, k), &p).unwrap_or(f64::INFINITY)
                - bhat_skeide_envelope(tn, k as f64 / m as f64)
        })
        .fold(0.0, f64::max);
    SuiteReport {
        construction: format!("bhat_skeide d={} m={m}", t.nrows()),
        checks: vec![
            IdentityCheck::new("integer_times", exact, 0.0, 3),
            IdentityCheck::new("envelope", excess, 4.0 / m as f64, m.saturating_sub(1)),
        ],
    }
}

/// Semigroup law of any construction over `count` aligned step counts up to `max_steps`.
pub fn law_suite(
    name: &str,
    sem: &MatrixSemigroup,
    max_steps: u64,
    count: u64,
) -> Result<SuiteReport> {
    let tol = sem.law_tol().max(1e-10);
    let steps = strided(max_steps, count);
    Ok(SuiteReport {
        construction: name.into(),
        checks: vec![law_check(sem, &steps, tol)?],
    })
}
