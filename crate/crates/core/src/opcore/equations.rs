//! Continuous and discrete Lyapunov (Stein) equations via the complex Schur form.
//!
//! Both solvers reduce to triangular systems column by column, `O(n³)` overall.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use super::expm::expm;
use super::linalg::{herm, narrow, norm2, schur, widen, ComplexMatrix, Scalar};
use crate::error::{Result, SimError};

/// Forward substitution for a lower-triangular system `L x = b`.
fn solve_lower(
    l: &ComplexMatrix,
    b: &DVector<Complex64>,
    scale: f64,
) -> Result<DVector<Complex64>> {
    let n = b.len();
    let mut x = DVector::zeros(n);
    for i in 0..n {
        let mut acc = b[i];
        for k in 0..i {
            acc -= l[(i, k)] * x[k];
        }
        let d = l[(i, i)];
        if d.norm() <= 1e-13 * scale {
            return Err(SimError::NearSingular(
                "Lyapunov/Stein operator is singular".into(),
            ));
        }
        x[i] = acc / d;
    }
    Ok(x)
}

/// Solves `A* X + X A + Q = 0`.
///
/// Unique solvability requires `λ_i + conj(λ_j) ≠ 0` over the spectrum.
pub fn solve_lyapunov(a: &ComplexMatrix, q: &ComplexMatrix) -> Result<ComplexMatrix> {
    let n = a.nrows();
    let (u, s) = schur(a)?;
    let qt = u.adjoint() * q * &u;
    let sa = s.adjoint();
    let scale = 1.0 + s.norm();
    let mut x = ComplexMatrix::zeros(n, n);
    for j in 0..n {
        let mut w = DVector::<Complex64>::zeros(n);
        for l in 0..j {
            w += x.column(l) * s[(l, j)];
        }
        let mut lhs = sa.clone();
        for i in 0..n {
            lhs[(i, i)] += s[(j, j)];
        }
        let rhs = -qt.column(j).into_owned() - w;
        let col = solve_lower(&lhs, &rhs, scale)?;
        x.set_column(j, &col);
    }
    let out = &u * x * u.adjoint();
    Ok(if q.adjoint() == *q { herm(&out) } else { out })
}

/// Solves the Stein equation `X - T* X T = Q`.
///
/// Unique solvability requires `conj(λ_i) λ_j ≠ 1` over the spectrum.
pub fn solve_stein(t: &ComplexMatrix, q: &ComplexMatrix) -> Result<ComplexMatrix> {
    let n = t.nrows();
    let (u, s) = schur(t)?;
    let qt = u.adjoint() * q * &u;
    let sa = s.adjoint();
    let eye = ComplexMatrix::identity(n, n);
    let mut x = ComplexMatrix::zeros(n, n);
    for j in 0..n {
        let mut w = DVector::<Complex64>::zeros(n);
        for l in 0..j {
            w += x.column(l) * s[(l, j)];
        }
        let lhs = &eye - &sa * s[(j, j)];
        let rhs = qt.column(j).into_owned() + &sa * w;
        let col = solve_lower(&lhs, &rhs, 1.0)?;
        x.set_column(j, &col);
    }
    let out = &u * x * u.adjoint();
    Ok(if q.adjoint() == *q { herm(&out) } else { out })
}

/// `∫₀^τ e^{sA*} Q e^{sA} ds` by the block exponential of `[[-A*, Q], [0, A]]`.
///
/// The block exponential is evaluated on `τ/2^k` with `‖A‖τ/2^k ≤ 2`, then the
/// cocycle `G_{2s} = G_s + e^{sA*} G_s e^{sA}` doubles back to `τ`; this keeps
/// the growing `e^{-sA*}` block from swamping the integral.
pub fn integral_gramian(a: &ComplexMatrix, q: &ComplexMatrix, tau: f64) -> Result<ComplexMatrix> {
    let n = a.nrows();
    if !(tau >= 0.0) || !tau.is_finite() {
        return Err(SimError::Domain(format!(
            "horizon must be finite and non-negative, got {tau}"
        )));
    }
    if tau == 0.0 {
        return Ok(ComplexMatrix::zeros(n, n));
    }
    let mut k = 0;
    while norm2(a) * tau / 2f64.powi(k) > 2.0 && k < 60 {
        k += 1;
    }
    let s = Complex64::new(tau / 2f64.powi(k), 0.0);
    let mut big = ComplexMatrix::zeros(2 * n, 2 * n);
    big.view_mut((0, 0), (n, n)).copy_from(&(-a.adjoint() * s));
    big.view_mut((0, n), (n, n)).copy_from(&(q * s));
    big.view_mut((n, n), (n, n)).copy_from(&(a * s));
    let e = expm(&big)?;
    let mut step = e.view((n, n), (n, n)).into_owned();
    let mut g = herm(&(step.adjoint() * e.view((0, n), (n, n))));
    for _ in 0..k {
        g = herm(&(&g + step.adjoint() * &g * &step));
        step = &step * &step;
    }
    Ok(g)
}

/// Residual `‖A* X + X A + Q‖_F`.
pub fn lyapunov_residual(a: &ComplexMatrix, x: &ComplexMatrix, q: &ComplexMatrix) -> f64 {
    (a.adjoint() * x + x * a + q).norm()
}

/// Residual `‖X - T* X T - Q‖_F`.
pub fn stein_residual(t: &ComplexMatrix, x: &ComplexMatrix, q: &ComplexMatrix) -> f64 {
    (x - t.adjoint() * x * t - q).norm()
}

/// Generic-scalar wrapper used by the solvers' real fast path.
pub fn solve_stein_generic<F: Scalar>(t: &DMatrix<F>, q: &DMatrix<F>) -> Result<DMatrix<F>> {
    Ok(narrow(&solve_stein(&widen(t), &widen(q))?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::opcore::linalg::{diag_real, from_real_rows};

    #[test]
    fn scalar_lyapunov() {
        let a = diag_real(&[-1.0]);
        let q = diag_real(&[2.0]);
        let x = solve_lyapunov(&a, &q).unwrap();
        assert!((x[(0, 0)].re - 1.0).abs() < 1e-15);
    }

    #[test]
    fn nonnormal_lyapunov_residual() {
        let a = from_real_rows(&[&[-1.0, 4.0, 0.5], &[0.0, -2.0, 1.0], &[0.3, 0.0, -0.5]]);
        let q = ComplexMatrix::identity(3, 3);
        let x = solve_lyapunov(&a, &q).unwrap();
        assert!(lyapunov_residual(&a, &x, &q) < 1e-12);
    }

    #[test]
    fn stein_series_agreement() {
        let t = from_real_rows(&[&[0.0, 2.0], &[0.0, 0.0]]);
        let q = ComplexMatrix::identity(2, 2);
        let x = solve_stein(&t, &q).unwrap();
        // X = I + T*T = diag(1, 5) for a square-zero T.
        assert!((x - diag_real(&[1.0, 5.0])).norm() < 1e-14);
    }

    #[test]
    fn singular_stein_detected() {
        let t = diag_real(&[1.0]);
        assert!(solve_stein(&t, &diag_real(&[1.0])).is_err());
    }

    #[test]
    fn gramian_matches_lyapunov_limit() {
        let a = from_real_rows(&[&[-1.0, 4.0], &[0.0, -1.0]]);
        let q = ComplexMatrix::identity(2, 2);
        let inf = solve_lyapunov(&a, &q).unwrap();
        let g = integral_gramian(&a, &q, 60.0).unwrap();
        assert!((g - inf).norm() < 1e-9);
        let s = integral_gramian(&ComplexMatrix::zeros(2, 2), &q, 2.0).unwrap();
        assert!((s - q * Complex64::new(2.0, 0.0)).norm() < 1e-14);
    }

    #[test]
    fn generic_wrapper_real() {
        let t = DMatrix::from_row_slice(2, 2, &[0.5, 1.0, 0.0, 0.25]);
        let x = solve_stein_generic(&t, &DMatrix::identity(2, 2)).unwrap();
        let r = &x - t.transpose() * &x * &t - DMatrix::identity(2, 2);
        assert!(r.norm() < 1e-13);
    }
}
