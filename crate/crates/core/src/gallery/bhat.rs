//! Bhat-Skeide interpolation of the powers of `I ⊗ T` on `L²(𝕋) ⊗ C^d`.
//!
//! On a circle of `m` cells, `T(k/m)` moves cell `i - k` to cell `i` and applies
//! `T^{⌊t⌋+1}` to cells inside `[0, {t})` and `T^{⌊t⌋}` elsewhere; in other words
//! each wrap around the circle contributes one factor of `T`.

use num_complex::Complex64;

use super::grid::diag;
use crate::error::{Result, SimError};
use crate::opcore::linalg::{kron, powi, validate, ComplexMatrix};
use crate::opcore::semigroup::{Descriptor, MatrixSemigroup};

/// `T(k/m)` with cell-major block layout (dimension `m·d`).
pub fn bhat_skeide_matrix(t: &ComplexMatrix, m: usize, k: u64) -> ComplexMatrix {
    let d = t.nrows();
    let q = (k % m as u64) as usize;
    let fl = k / m as u64;
    let lo = powi(t, fl);
    let hi = &lo * t;
    let mut out = ComplexMatrix::zeros(m * d, m * d);
    for i in 0..m {
        let src = (i as i64 - k as i64).rem_euclid(m as i64) as usize;
        let blk = if i < q { &hi } else { &lo };
        out.view_mut((i * d, src * d), (d, d)).copy_from(blk);
    }
    out
}

/// The interpolating semigroup on the grid `{k/m}`.
pub fn bhat_skeide(t: &ComplexMatrix, circle_m: usize) -> Result<MatrixSemigroup> {
    validate(t)?;
    if circle_m == 0 {
        return Err(SimError::Domain("circle_m must be positive".into()));
    }
    let t = t.clone();
    let d = t.nrows();
    let desc = Descriptor::new("bhat_skeide")
        .with("circle_m", circle_m)
        .with("dim", d);
    Ok(MatrixSemigroup::sampled(
        desc,
        circle_m * d,
        1.0 / circle_m as f64,
        0.0,
        move |k| Ok(bhat_skeide_matrix(&t, circle_m, k)),
    ))
}

/// Weight `P_BS = blockdiag(I + r_i T*T)` at the cell midpoints `r_i`.
///
/// Its norm is the discrete form of `∫₀¹ ‖f(r)‖² + r‖T f(r)‖² dr`.
pub fn bhat_skeide_weight(t: &ComplexMatrix, circle_m: usize) -> ComplexMatrix {
    let d = t.nrows();
    let tt = t.adjoint() * t;
    let mut out = ComplexMatrix::zeros(circle_m * d, circle_m * d);
    for i in 0..circle_m {
        let r = (i as f64 + 0.5) / circle_m as f64;
        let blk = ComplexMatrix::identity(d, d) + &tt * Complex64::new(r, 0.0);
        out.view_mut((i * d, i * d), (d, d)).copy_from(&blk);
    }
    out
}

/// Envelope `(1/(1-t) + t‖T‖²)^{1/2}` for `0 < t < 1`.
pub fn bhat_skeide_envelope(t_norm: f64, t: f64) -> f64 {
    (1.0 / (1.0 - t) + t * t_norm * t_norm).sqrt()
}

/// `I_m ⊗ T^n`.
pub fn identity_tensor_power(t: &ComplexMatrix, m: usize, n: u64) -> ComplexMatrix {
    kron(&diag(&vec![1.0; m]), &powi(t, n))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::opcore::linalg::from_real_rows;
    use crate::opcore::spectral::{operator_norm, weighted_norm};

    #[test]
    fn integer_times_are_tensor_powers() {
        let t = from_real_rows(&[&[0.0, 1.0], &[0.0, 0.0]]);
        let s = bhat_skeide(&t, 8).unwrap();
        for n in 0..4 {
            assert_eq!(
                s.eval_steps(8 * n).unwrap(),
                identity_tensor_power(&t, 8, n)
            );
        }
        assert_eq!(s.law_residual(0.375, 0.875).unwrap(), 0.0);
    }

    #[test]
    fn norm_and_envelope() {
        let t = from_real_rows(&[&[0.3, 0.0], &[0.0, 2.0]]);
        let m = 64;
        let p = bhat_skeide_weight(&t, m);
        for k in 1..m as u64 {
            let tt = k as f64 / m as f64;
            let mat = bhat_skeide_matrix(&t, m, k);
            assert!((operator_norm(&mat) - 2.0).abs() < 1e-12);
            assert!(
                weighted_norm(&mat, &p).unwrap() <= bhat_skeide_envelope(2.0, tt) + 4.0 / m as f64
            );
        }
    }
}
