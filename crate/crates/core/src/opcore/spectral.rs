//! Norms, spectra, resolvents and weighted norms.

use nalgebra::DMatrix;
use num_complex::Complex64;

use super::linalg::{
    herm, herm_eig, inverse, lambda_max, norm2, schur, spectral_map, ComplexMatrix, Scalar,
};
use crate::error::{Result, SimError};

/// Eigenvalues from a complex Schur form.
pub fn eigenvalues(t: &ComplexMatrix) -> Result<Vec<Complex64>> {
    let n = t.nrows();
    if n == 0 {
        return Ok(Vec::new());
    }
    let (_, tri) = schur(t)?;
    Ok((0..n).map(|i| tri[(i, i)]).collect())
}

/// Largest singular value.
pub fn operator_norm(t: &ComplexMatrix) -> f64 {
    norm2(t)
}

/// Smallest singular value.
pub fn min_singular_value(t: &ComplexMatrix) -> f64 {
    if t.is_empty() {
        return 0.0;
    }
    t.singular_values()
        .iter()
        .copied()
        .fold(f64::INFINITY, f64::min)
}

/// Largest eigenvalue modulus.
pub fn spectral_radius(t: &ComplexMatrix) -> Result<f64> {
    Ok(eigenvalues(t)?.iter().map(|z| z.norm()).fold(0.0, f64::max))
}

/// Spectral abscissa `max Re σ(A)`; for matrices this is the growth bound of `e^{tA}`.
pub fn growth_bound(a: &ComplexMatrix) -> Result<f64> {
    Ok(eigenvalues(a)?
        .iter()
        .map(|z| z.re)
        .fold(f64::NEG_INFINITY, f64::max))
}

/// `λmax((A + A*)/2)`, the sharpest `λ` with `‖e^{tA}‖ ≤ e^{λt}` in the original norm.
pub fn numerical_abscissa<F: Scalar>(a: &DMatrix<F>) -> f64 {
    lambda_max(a)
}

/// `(z - A)^{-1}`.
///
/// Fails when `z` is within `1e-12 (1 + ‖A‖)` of the spectrum, measured by the
/// smallest singular value of `z - A`.
pub fn resolvent(a: &ComplexMatrix, z: Complex64) -> Result<ComplexMatrix> {
    let n = a.nrows();
    let shifted = ComplexMatrix::identity(n, n) * z - a;
    let smin = min_singular_value(&shifted);
    if smin <= 1e-12 * (1.0 + operator_norm(a)) {
        return Err(SimError::NearSingular(format!("{z}")));
    }
    inverse(&shifted).map_err(|_| SimError::NearSingular(format!("{z}")))
}

/// Hermitian PD test after symmetrisation: `λmin > 1e-12 λmax`.
/// Returns the eigen-decomposition of the symmetrised weight on success.
pub fn check_weight<F: Scalar>(p: &DMatrix<F>) -> Result<(Vec<f64>, DMatrix<F>)> {
    let (vals, vecs) = herm_eig(p);
    let (lo, hi) = (vals[0], vals[vals.len() - 1]);
    if !(lo > 1e-12 * hi) || !(hi > 0.0) {
        return Err(SimError::InvalidWeight { min: lo, max: hi });
    }
    Ok((vals, vecs))
}

/// `(P^{1/2}, P^{-1/2})` of a Hermitian PD weight.
pub fn weight_roots<F: Scalar>(p: &DMatrix<F>) -> Result<(DMatrix<F>, DMatrix<F>)> {
    let (vals, vecs) = check_weight(p)?;
    Ok((
        spectral_map(&vals, &vecs, f64::sqrt),
        spectral_map(&vals, &vecs, |l| 1.0 / l.sqrt()),
    ))
}

/// Operator norm of `T` in the inner product `⟨Ph, h⟩`, i.e. `‖P^{1/2} T P^{-1/2}‖`.
pub fn weighted_norm<F: Scalar>(t: &DMatrix<F>, p: &DMatrix<F>) -> Result<f64> {
    if t.nrows() != p.nrows() || t.ncols() != p.ncols() {
        return Err(SimError::DimensionMismatch {
            expected: p.nrows(),
            found: t.nrows(),
        });
    }
    let (r, rinv) = weight_roots(p)?;
    Ok(norm2(&(&r * t * &rinv)))
}

/// `√(λmax(P)/λmin(P))` for a Hermitian PD weight.
pub fn weight_kappa<F: Scalar>(p: &DMatrix<F>) -> Result<f64> {
    let (vals, _) = check_weight(p)?;
    Ok((vals[vals.len() - 1] / vals[0]).sqrt())
}

/// Symmetrised copy of a weight, convenient for reporting.
pub fn symmetrize<F: Scalar>(p: &DMatrix<F>) -> DMatrix<F> {
    herm(p)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::opcore::linalg::{diag_real, from_real_rows};

    #[test]
    fn nilpotent_quantities() {
        let t = from_real_rows(&[&[0.0, 2.0], &[0.0, 0.0]]);
        assert!((operator_norm(&t) - 2.0).abs() < 1e-15);
        assert!(min_singular_value(&t).abs() < 1e-15);
        assert_eq!(spectral_radius(&t).unwrap(), 0.0);
    }

    #[test]
    fn diagonal_quantities() {
        let t = diag_real(&[0.5, 0.25]);
        assert!((operator_norm(&t) - 0.5).abs() < 1e-15);
        assert!((spectral_radius(&t).unwrap() - 0.5).abs() < 1e-15);
        assert!((growth_bound(&diag_real(&[-1.0, -2.0])).unwrap() + 1.0).abs() < 1e-15);
    }

    #[test]
    fn weighted_norm_hand_example() {
        let t = from_real_rows(&[&[0.0, 2.0], &[0.0, 0.0]]);
        let p = diag_real(&[1.0, 4.0]);
        assert!((weighted_norm(&t, &p).unwrap() - 1.0).abs() < 1e-14);
        assert!(weighted_norm(&t, &diag_real(&[1.0, -1.0])).is_err());
    }

    #[test]
    fn abscissa_of_jordan_like_generator() {
        let a = from_real_rows(&[&[-1.0, 4.0], &[0.0, -1.0]]);
        assert!((numerical_abscissa(&a) - 1.0).abs() < 1e-14);
    }

    #[test]
    fn resolvent_scalar_and_singular() {
        let a = diag_real(&[-1.0]);
        let r = resolvent(&a, Complex64::new(1.0, 0.0)).unwrap();
        assert!((r[(0, 0)].re - 0.5).abs() < 1e-15);
        assert!(matches!(
            resolvent(&a, Complex64::new(-1.0, 0.0)),
            Err(SimError::NearSingular(_))
        ));
    }
}
