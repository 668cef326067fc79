//! Shared fixtures for the integration tests: the seeded stable corpus and
//! small gallery samples.

#![allow(dead_code)]

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use simgroup::gallery::{
    bhat_skeide, lemerdy_semigroup, packel_nilpotent_default, packel_semigroup,
    riemann_liouville_semigroup, w_semigroup, DyadicSequence, GridSpace, IndexSet, LeMerdyBasis,
};
use simgroup::opcore::spectral::growth_bound;
use simgroup::opcore::{ComplexMatrix, MatrixSemigroup};

pub const CORPUS_SEED: u64 = 20_240_611;
pub const CORPUS_SIZE: usize = 50;

/// `G - (ω(G) + margin) I`, `n ∈ 2..=8`, margin in `[0.1, 0.6]`.
///
/// `G` is uniform in `[-1, 1]^{n×n}` plus a strictly upper part uniform in
/// `[-3, 3]`, so that most members are genuinely non-normal.
pub fn stable_corpus() -> Vec<ComplexMatrix> {
    let mut rng = ChaCha8Rng::seed_from_u64(CORPUS_SEED);
    (0..CORPUS_SIZE)
        .map(|i| {
            let n = 2 + i % 7;
            let g = ComplexMatrix::from_fn(n, n, |i, j| {
                let base = rng.gen_range(-1.0..1.0);
                Complex64::new(
                    if j > i {
                        base + rng.gen_range(-3.0..3.0)
                    } else {
                        base
                    },
                    0.0,
                )
            });
            let shift = growth_bound(&g).unwrap() + rng.gen_range(0.1..0.6);
            g - ComplexMatrix::identity(n, n) * Complex64::new(shift, 0.0)
        })
        .collect()
}

/// Gallery samples of dimension at most 32.
pub fn gallery_corpus() -> Vec<(String, MatrixSemigroup)> {
    let mut out = Vec::new();
    for k in 1..=4 {
        out.push((
            format!("packel_nilpotent k={k}"),
            packel_nilpotent_default(k).unwrap(),
        ));
    }
    let a = DyadicSequence::geometric(IndexSet::Zplus, 2, 2.0).unwrap();
    out.push((
        "packel Zplus window 2".into(),
        packel_semigroup(&a, &GridSpace::new(4.0, 8, 0.0).unwrap()).unwrap(),
    ));
    out.push(("w_semigroup m=8".into(), w_semigroup(8, None).unwrap()));
    out.push(("w_semigroup m=16".into(), w_semigroup(16, None).unwrap()));
    let t = ComplexMatrix::from_fn(2, 2, |i, j| {
        Complex64::new(if i == 0 && j == 1 { 1.0 } else { 0.0 }, 0.0)
    });
    out.push((
        "bhat_skeide nilpotent m=8".into(),
        bhat_skeide(&t, 8).unwrap(),
    ));
    let d = ComplexMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![
        Complex64::new(0.3, 0.0),
        Complex64::new(2.0, 0.0),
    ]));
    out.push((
        "bhat_skeide diag(0.3, 2) m=8".into(),
        bhat_skeide(&d, 8).unwrap(),
    ));
    for n in [2, 4, 6] {
        out.push((
            format!("lemerdy n={n}"),
            lemerdy_semigroup(n, &LeMerdyBasis::SummingSections).unwrap(),
        ));
    }
    out.push((
        "riemann_liouville m=16".into(),
        riemann_liouville_semigroup(&GridSpace::new(1.0, 16, 0.0).unwrap(), 0.25).unwrap(),
    ));
    out
}
