//! Verdict invariants of the weight solvers, and an exhaustive comparison
//! with brute-force weight searches on small integer matrices.

mod common;

use num_complex::Complex64;
use proptest::prelude::*;
use simgroup::opcore::linalg::from_real_rows;
use simgroup::opcore::spectral::{eigenvalues, operator_norm};
use simgroup::opcore::{expm_semigroup, ComplexMatrix};
use simgroup::weightsolve::{
    certificate_check, discrete_similarity_constant, joint_similarity_constant, stein_feasible,
    SimilarityVerdict, SolverOptions, Target, VerdictStatus,
};

fn real_matrix(n: usize, lo: f64, hi: f64) -> impl Strategy<Value = ComplexMatrix> {
    prop::collection::vec(lo..hi, n * n)
        .prop_map(move |v| ComplexMatrix::from_fn(n, n, |i, j| Complex64::new(v[i * n + j], 0.0)))
}

/// Random operator rescaled to spectral radius `rho`.
fn discrete_case() -> impl Strategy<Value = ComplexMatrix> {
    (
        (2..=4usize).prop_flat_map(|n| real_matrix(n, -2.0, 2.0)),
        0.2..0.95f64,
    )
        .prop_map(|(t, rho)| {
            let r = eigenvalues(&t)
                .unwrap()
                .iter()
                .map(|z| z.norm())
                .fold(0.0, f64::max);
            if r > 1e-9 {
                t * Complex64::new(rho / r, 0.0)
            } else {
                t
            }
        })
}

fn assert_verdict_invariants(
    v: &SimilarityVerdict,
    target: &Target,
    opts: &SolverOptions,
) -> Result<(), TestCaseError> {
    match v.status {
        VerdictStatus::Finite => {
            let cert = v
                .certificate
                .as_ref()
                .ok_or_else(|| TestCaseError::fail("finite verdict without certificate"))?;
            prop_assert_eq!(v.constant, cert.kappa);
            prop_assert!(cert.kappa >= 1.0);
            let report = certificate_check(cert, target).unwrap();
            prop_assert!(
                report.residual <= 2.0 * opts.feas_tol,
                "residual {}",
                report.residual
            );
            prop_assert!(report.lambda_min > 0.0);
            prop_assert!((report.kappa - cert.kappa).abs() <= 1e-6 * cert.kappa);
            prop_assert!(v.lower_bound <= v.constant * (1.0 + 1e-9));
        }
        _ => prop_assert!(v.constant.is_infinite() && v.certificate.is_none()),
    }
    Ok(())
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 24, ..ProptestConfig::default() })]

    #[test]
    fn discrete_verdicts_are_certified(t in discrete_case()) {
        let opts = SolverOptions::default();
        let v = discrete_similarity_constant(&t, &opts).unwrap();
        prop_assert_eq!(v.status, VerdictStatus::Finite);
        assert_verdict_invariants(&v, &Target::Stein(vec![t.clone()]), &opts)?;
        prop_assert!(v.constant >= operator_norm(&t) * (1.0 - 1e-9), "C = {} below norm {}", v.constant, operator_norm(&t));
    }

    #[test]
    fn joint_verdicts_dominate_the_orbit(a in (2..=4usize).prop_flat_map(|n| real_matrix(n, -2.0, 2.0)), margin in 0.1..0.6f64) {
        let n = a.nrows();
        let g = eigenvalues(&a).unwrap().iter().map(|z| z.re).fold(f64::NEG_INFINITY, f64::max);
        let a = a - ComplexMatrix::identity(n, n) * Complex64::new(g + margin, 0.0);
        let opts = SolverOptions::default();
        let v = joint_similarity_constant(&a, &opts).unwrap();
        prop_assert_eq!(v.status, VerdictStatus::Finite);
        assert_verdict_invariants(&v, &Target::Lyapunov { a: a.clone(), shift: 0.0 }, &opts)?;
        for k in 0..40 {
            let nrm = operator_norm(&expm_semigroup(&a, 0.1 * k as f64).unwrap());
            prop_assert!(v.constant >= nrm * (1.0 - 1e-9), "C = {} below orbit norm {nrm}", v.constant);
        }
    }

    #[test]
    fn feasibility_is_monotone_in_kappa(t in discrete_case(), factor in 1.0..4.0f64) {
        let opts = SolverOptions::default();
        let v = discrete_similarity_constant(&t, &opts).unwrap();
        let k1 = v.constant * (1.0 + 1e-3);
        let ops = vec![t.clone()];
        let first = stein_feasible(&ops, k1, &opts).unwrap();
        prop_assert!(first.certificate.is_some(), "no weight at kappa {k1}");
        let replay = stein_feasible(&ops, k1 * factor, &opts).unwrap();
        let cert = replay.certificate.ok_or_else(|| TestCaseError::fail("lost feasibility at a larger kappa"))?;
        prop_assert!(cert.kappa <= k1 * factor * (1.0 + 1e-9));
    }
}

/// Weighted condition `√cond(P)` for a 2×2 Hermitian `P`, `None` if not positive definite.
fn kappa2(p11: f64, p22: f64, p12: Complex64) -> Option<f64> {
    let det = p11 * p22 - p12.norm_sqr();
    if p11 <= 0.0 || det <= 0.0 {
        return None;
    }
    let half = 0.5 * (p11 + p22);
    let disc = (half * half - det).max(0.0).sqrt();
    Some(((half + disc) / (half - disc)).sqrt())
}

/// `P - TᵀPT ⪰ 0` for real `T` and real symmetric `P = [[1, x], [x, p]]`.
fn stein_holds(t: [[f64; 2]; 2], x: f64, p: f64) -> bool {
    let pm = [[1.0, x], [x, p]];
    let mut m = [[0.0; 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            let mut acc = 0.0;
            for k in 0..2 {
                for l in 0..2 {
                    acc += t[k][i] * pm[k][l] * t[l][j];
                }
            }
            m[i][j] = pm[i][j] - acc;
        }
    }
    let tol = 1e-12;
    m[0][0] >= -tol && m[1][1] >= -tol && m[0][0] * m[1][1] - m[0][1] * m[1][0] >= -tol
}

/// Grid search over real `P = [[1, x], [x, p]]`, refined around the best point.
///
/// Real weights suffice for real `T`: averaging a weight with its conjugate
/// keeps the Stein inequality and does not increase `κ`.
fn full_grid_oracle(t: [[f64; 2]; 2]) -> Option<f64> {
    let (mut lp, mut r) = (0.0f64, 0.0f64);
    let (mut wlp, mut wr) = (10.0f64, 1.0f64);
    let mut best = None::<f64>;
    let n = 240;
    for _ in 0..6 {
        let (c_lp, c_r) = (lp, r);
        for i in 0..=n {
            let y = c_lp - wlp + 2.0 * wlp * i as f64 / n as f64;
            let p = y.exp();
            for j in 0..=n {
                let s = (c_r - wr + 2.0 * wr * j as f64 / n as f64).clamp(-0.999_999, 0.999_999);
                let x = s * p.sqrt();
                if !stein_holds(t, x, p) {
                    continue;
                }
                if let Some(k) = kappa2(1.0, p, Complex64::new(x, 0.0)) {
                    if best.is_none_or(|b| k < b) {
                        (best, lp, r) = (Some(k), y, s);
                    }
                }
            }
        }
        wlp *= 0.05;
        wr *= 0.05;
    }
    best
}

/// For diagonalisable `T` with unimodular eigenvalues (and possibly a zero one),
/// feasible weights are `V^{-*} diag(1, d) V^{-1}`; this scans `d` on a refined log grid.
fn eigenbasis_oracle(t: &ComplexMatrix) -> f64 {
    let ev = eigenvalues(t).unwrap();
    if (ev[0] - ev[1]).norm() < 1e-9 {
        // A diagonalisable matrix with a repeated eigenvalue is a scalar multiple of I.
        return 1.0;
    }
    let vec_for = |l: Complex64| {
        let m = t - ComplexMatrix::identity(2, 2) * l;
        if m[(0, 1)].norm() > 1e-12 || m[(0, 0)].norm() > 1e-12 {
            [Complex64::new(-m[(0, 1)].re, -m[(0, 1)].im), m[(0, 0)]]
        } else {
            [-m[(1, 1)], m[(1, 0)]]
        }
    };
    let (v0, v1) = (vec_for(ev[0]), vec_for(ev[1]));
    let v = ComplexMatrix::from_fn(2, 2, |i, j| if j == 0 { v0[i] } else { v1[i] });
    let g = v.try_inverse().unwrap();
    let (mut c, mut w) = (0.0f64, 20.0f64);
    let mut best = f64::INFINITY;
    for _ in 0..6 {
        let centre = c;
        for i in 0..=400 {
            let y = centre - w + 2.0 * w * i as f64 / 400.0;
            let d = ComplexMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![
                Complex64::new(1.0, 0.0),
                Complex64::new(y.exp(), 0.0),
            ]));
            let p = g.adjoint() * d * &g;
            if let Some(k) = kappa2(p[(0, 0)].re, p[(1, 1)].re, p[(0, 1)]) {
                if k < best {
                    (best, c) = (k, y);
                }
            }
        }
        w *= 0.05;
    }
    best
}

/// Every real 2×2 matrix with entries in `{-2, …, 2}` against an independent oracle.
///
/// Integer matrices with spectral radius at most one are either nilpotent or
/// have unimodular (or zero) eigenvalues, so the two oracles cover all cases
/// with a finite constant.
#[test]
fn integer_two_by_two_instances_match_brute_force() {
    let opts = SolverOptions::default();
    let vals = [-2.0, -1.0, 0.0, 1.0, 2.0];
    let (mut finite, mut unbounded) = (0, 0);
    for &a in &vals {
        for &b in &vals {
            for &c in &vals {
                for &d in &vals {
                    let t = [[a, b], [c, d]];
                    let tm = from_real_rows(&[&t[0], &t[1]]);
                    let v = discrete_similarity_constant(&tm, &opts).unwrap();
                    let (tr, det) = (a + d, a * d - b * c);
                    let ev = eigenvalues(&tm).unwrap();
                    let radius = ev.iter().map(|z| z.norm()).fold(0.0, f64::max);
                    let nilpotent = tr == 0.0 && det == 0.0;
                    let repeated_defective =
                        (ev[0] - ev[1]).norm() < 1e-9 && (b != 0.0 || c != 0.0 || a != d);
                    if radius > 1.0 + 1e-9 || (repeated_defective && !nilpotent) {
                        assert_eq!(v.status, VerdictStatus::Unbounded, "{t:?}");
                        unbounded += 1;
                        continue;
                    }
                    assert_eq!(v.status, VerdictStatus::Finite, "{t:?}");
                    let oracle = if nilpotent {
                        full_grid_oracle(t).expect("nilpotent weights exist")
                    } else {
                        eigenbasis_oracle(&tm)
                    };
                    assert!(
                        (v.constant - oracle).abs() <= 1e-2,
                        "{t:?}: solver {} oracle {oracle}",
                        v.constant
                    );
                    finite += 1;
                }
            }
        }
    }
    assert_eq!(finite + unbounded, 625);
    assert!(finite > 50, "only {finite} finite instances");
}
