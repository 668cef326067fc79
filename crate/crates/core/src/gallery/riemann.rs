//! Riemann-Liouville fractional integration `(1/Γ(t)) ∫₀ˣ (x - y)^{t-1} f(y) dy` on `[0, 1]`.
//!
//! Discretised by cell averages: entry `(i, j)` is the average over cell `i`
//! of the kernel integrated exactly over cell `j`. With `d = i - j ≥ 0` this is
//! `Δ^t/Γ(t+2) [(d+1)^{t+1} - 2d^{t+1} + (d-1)_+^{t+1}]`, so the singular
//! kernel never gets sampled pointwise.

use num_complex::Complex64;

use super::grid::GridSpace;
use crate::error::{Result, SimError};
use crate::opcore::linalg::ComplexMatrix;
use crate::opcore::semigroup::{Descriptor, MatrixSemigroup};

fn pow_plus(x: f64, p: f64) -> f64 {
    if x > 0.0 {
        x.powf(p)
    } else {
        0.0
    }
}

/// Lower-triangular cell-average matrix of `T_RL(t)`; `T_RL(0) = I`.
pub fn riemann_liouville(space: &GridSpace, t: f64) -> Result<ComplexMatrix> {
    if t < 0.0 || !t.is_finite() {
        return Err(SimError::Domain(format!(
            "Riemann-Liouville order must be positive, got {t}"
        )));
    }
    let m = space.m;
    if t == 0.0 {
        return Ok(ComplexMatrix::identity(m, m));
    }
    let h = space.step();
    let scale = h.powf(t) / libm::tgamma(t + 2.0);
    let p = t + 1.0;
    let coef: Vec<f64> = (0..m)
        .map(|d| {
            let d = d as f64;
            scale * (pow_plus(d + 1.0, p) - 2.0 * pow_plus(d, p) + pow_plus(d - 1.0, p))
        })
        .collect();
    Ok(ComplexMatrix::from_fn(m, m, |i, j| {
        Complex64::new(if i >= j { coef[i - j] } else { 0.0 }, 0.0)
    }))
}

/// Documented semigroup-law tolerance of the discretisation at `m` cells.
pub fn riemann_law_tol(m: usize) -> f64 {
    2.0 / (m as f64).sqrt()
}

/// `T_RL` sampled at multiples of `order_step` on `space` (which must be `[0, 1]`).
pub fn riemann_liouville_semigroup(space: &GridSpace, order_step: f64) -> Result<MatrixSemigroup> {
    if (space.nu - 1.0).abs() > 1e-12 {
        return Err(SimError::Domain(
            "the Riemann-Liouville semigroup lives on [0, 1]".into(),
        ));
    }
    if !(order_step > 0.0) {
        return Err(SimError::Domain(format!(
            "order step must be positive, got {order_step}"
        )));
    }
    let sp = *space;
    let desc = Descriptor::new("riemann_liouville")
        .with("m", sp.m)
        .with("order_step", order_step);
    Ok(MatrixSemigroup::sampled(
        desc,
        sp.m,
        order_step,
        riemann_law_tol(sp.m),
        move |k| riemann_liouville(&sp, k as f64 * order_step),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::opcore::spectral::{operator_norm, spectral_radius};

    #[test]
    fn order_one_is_cumulative_integration() {
        let g = GridSpace::new(1.0, 8, 0.0).unwrap();
        let t = riemann_liouville(&g, 1.0).unwrap();
        let h = g.step();
        for i in 0..8 {
            for j in 0..8 {
                let want = if i > j {
                    h
                } else if i == j {
                    h / 2.0
                } else {
                    0.0
                };
                assert!((t[(i, j)].re - want).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn law_error_shrinks_with_refinement() {
        let err = |m: usize| {
            let g = GridSpace::new(1.0, m, 0.0).unwrap();
            let a = riemann_liouville(&g, 0.5).unwrap();
            let b = riemann_liouville(&g, 1.0).unwrap();
            operator_norm(&(&a * &a - &b))
        };
        let (e1, e2) = (err(32), err(128));
        assert!(e2 < e1, "{e1} {e2}");
        assert!(e2 <= riemann_law_tol(128));
    }

    #[test]
    fn quasi_nilpotent_signature() {
        let g = GridSpace::new(1.0, 64, 0.0).unwrap();
        assert!(spectral_radius(&riemann_liouville(&g, 0.5).unwrap()).unwrap() < 0.2);
        assert!(riemann_liouville(&g, -1.0).is_err());
    }
}
