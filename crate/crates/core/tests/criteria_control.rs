//! Limit characterisations, renormings, audits and the control-theoretic
//! identities on the stable corpus and on random systems.

mod common;

use std::f64::consts::SQRT_2;

use num_complex::Complex64;
use proptest::prelude::*;
use simgroup::control::{
    defect_observation, duality_check, infinite_gramian, naboko_integral, observability_gramian,
    NabokoOptions, ObservedSystem,
};
use simgroup::criteria::{
    average_renorm, classify, default_time_grid, post_widder, simconst_bound_audit, ClassifyInput,
    TrichotomyCase,
};
use simgroup::opcore::linalg::{herm, herm_eigenvalues, normalize_weight};
use simgroup::opcore::spectral::{growth_bound, operator_norm};
use simgroup::opcore::{expm_semigroup, solve_lyapunov, ComplexMatrix};
use simgroup::weightsolve::{certificate_check, SolverOptions, Target};

fn complex_matrix(n: usize, scale: f64) -> impl Strategy<Value = ComplexMatrix> {
    prop::collection::vec((-1.0..1.0f64, -1.0..1.0f64), n * n).prop_map(move |v| {
        ComplexMatrix::from_fn(n, n, |i, j| {
            Complex64::new(v[i * n + j].0, v[i * n + j].1) * scale
        })
    })
}

/// `G - (ω(G) + margin) I` with `n ∈ 2..=5`.
fn stable_generator() -> impl Strategy<Value = ComplexMatrix> {
    (
        (2..=5usize).prop_flat_map(|n| complex_matrix(n, 2.0)),
        0.1..1.0f64,
    )
        .prop_map(|(g, margin)| {
            let n = g.nrows();
            let shift = growth_bound(&g).unwrap() + margin;
            g - ComplexMatrix::identity(n, n) * Complex64::new(shift, 0.0)
        })
}

/// Strict Lyapunov weight `A*P + PA = -(I + AA*/10)`, normalised to `λmax(P) = 1`.
fn strict_weight(a: &ComplexMatrix) -> ComplexMatrix {
    let n = a.nrows();
    let q = ComplexMatrix::identity(n, n) + a * a.adjoint() * Complex64::new(0.1, 0.0);
    let p = herm(&solve_lyapunov(a, &q).unwrap());
    let top = herm_eigenvalues(&p)[n - 1];
    p * Complex64::new(1.0 / top, 0.0)
}

#[test]
fn post_widder_error_decreases_along_refinements() {
    for (i, a) in common::stable_corpus().iter().enumerate() {
        let exact = expm_semigroup(a, 1.0).unwrap();
        let errs: Vec<f64> = [32u64, 128, 1024]
            .iter()
            .map(|&n| operator_norm(&(post_widder(a, 1.0, n).unwrap() - &exact)))
            .collect();
        assert!(
            errs[0] > errs[1] && errs[1] > errs[2],
            "corpus #{i}: {errs:?}"
        );
    }
}

#[test]
fn average_renorm_certificates_pass_the_lyapunov_check() {
    for (i, a) in common::stable_corpus().iter().enumerate().step_by(5) {
        let p = normalize_weight(&strict_weight(a));
        let r = average_renorm(a, &p, 1.0).unwrap();
        let check = certificate_check(
            &r.certificate,
            &Target::Lyapunov {
                a: a.clone(),
                shift: 0.0,
            },
        )
        .unwrap();
        assert!(
            check.residual <= 1e-8 * (1.0 + operator_norm(a)),
            "corpus #{i}: residual {}",
            check.residual
        );
        assert!(
            r.embedding_norm * r.transfer_norm <= r.product_bound * (1.0 + 1e-9),
            "corpus #{i}"
        );
    }
}

#[test]
fn classifier_matches_the_joint_constant_on_the_corpus() {
    let opts = SolverOptions::default();
    for (i, a) in common::stable_corpus().into_iter().enumerate().step_by(7) {
        let r = classify(&ClassifyInput::Generator(a), &default_time_grid(), &opts).unwrap();
        assert_eq!(r.case, TrichotomyCase::SimilarContraction, "corpus #{i}");
        assert!(
            r.t_curve.sup_gap(r.joint.constant) <= 1e-2,
            "corpus #{i}: sup {} joint {}",
            r.t_curve.sup,
            r.joint.constant
        );
    }
}

#[test]
fn naboko_quadrature_agrees_with_plancherel_on_the_corpus() {
    let opts = NabokoOptions {
        xi_max: 2000.0,
        ..NabokoOptions::default()
    };
    for (i, a) in common::stable_corpus().iter().enumerate().step_by(5) {
        for eps in [0.1, 0.5] {
            let r = naboko_integral(a, None, eps, &opts).unwrap();
            assert!(
                r.max_relative_gap <= 1e-2,
                "corpus #{i} eps {eps}: gap {}",
                r.max_relative_gap
            );
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 24, ..ProptestConfig::default() })]

    #[test]
    fn gramians_satisfy_the_cocycle_identity(a in complex_matrix(4, 1.5), c in complex_matrix(4, 1.0).prop_map(|c| c.rows(0, 2).into_owned()), s in 0.05..2.0f64, t in 0.05..2.0f64) {
        let sys = ObservedSystem::new(a.clone(), c).unwrap();
        let gs = observability_gramian(&sys, s).unwrap().gramian;
        let gt = observability_gramian(&sys, t).unwrap().gramian;
        let gst = observability_gramian(&sys, s + t).unwrap().gramian;
        let e = expm_semigroup(&a, s).unwrap();
        let gap = (&gst - (&gs + e.adjoint() * &gt * &e)).norm();
        prop_assert!(gap <= 1e-9 * gst.norm().max(1.0), "cocycle gap {gap}");
    }

    #[test]
    fn duality_spectra_coincide(a in complex_matrix(3, 1.5), c in complex_matrix(3, 1.0), tau in 0.1..3.0f64) {
        let d = duality_check(&ObservedSystem::new(a, c).unwrap(), tau).unwrap();
        prop_assert!(d.agree, "max difference {}", d.max_difference);
    }

    #[test]
    fn defect_observation_round_trip(a in stable_generator()) {
        let p = strict_weight(&a);
        let c = defect_observation(&a, &p).unwrap();
        let sys = ObservedSystem::new(a.clone(), c).unwrap();
        let g = infinite_gramian(&sys).unwrap();
        prop_assert!((&g.gramian - &p).norm() <= 1e-8 * p.norm(), "recovery gap {}", (&g.gramian - &p).norm());

        // Energy identity bounds with P normalised to λmax(P) = 1.
        let tau = 1.0;
        let report = observability_gramian(&sys, tau).unwrap();
        let ev = herm_eigenvalues(&p);
        let sup_t = (0..=32).map(|k| operator_norm(&expm_semigroup(&a, tau * k as f64 / 32.0).unwrap())).fold(0.0, f64::max);
        prop_assert!(ev[0] <= report.alpha * (1.0 + 1e-9), "alpha {} below lambda_min(P) {}", report.alpha, ev[0]);
        prop_assert!(report.beta <= ev[ev.len() - 1] * (1.0 + sup_t * sup_t) * (1.0 + 1e-9));
        prop_assert!(report.alpha <= report.beta);
    }

    #[test]
    fn simconst_audits_hold_on_random_generators(a in stable_generator()) {
        let audit = simconst_bound_audit(&a, 1.0, 1.0, &SolverOptions::default()).unwrap();
        prop_assert!(!audit.failed(), "{audit:?}");
        prop_assert!(audit.rhs >= 3.0 * SQRT_2 * (1.0 - 1e-12));
    }
}
