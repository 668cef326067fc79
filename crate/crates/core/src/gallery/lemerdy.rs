//! Finite sections of the Le Merdy semigroup `T(t) h_j = e^{-2^j t} h_j`.
//!
//! The vectors `h_j` are the columns of a basis matrix `B`, so
//! `T(t) = B diag(e^{-2^j t}) B^{-1}`. The default basis is the lower-triangular
//! all-ones matrix, whose inverse norm grows with the dimension.

use num_complex::Complex64;

use crate::error::{Result, SimError};
use crate::opcore::linalg::{inverse, ComplexMatrix};
use crate::opcore::semigroup::MatrixSemigroup;
use crate::opcore::spectral::min_singular_value;

#[derive(Clone, Debug, PartialEq)]
pub enum LeMerdyBasis {
    /// Lower-triangular all-ones matrix.
    SummingSections,
    UserMatrix(ComplexMatrix),
}

fn basis_matrix(n: usize, basis: &LeMerdyBasis) -> Result<ComplexMatrix> {
    let b = match basis {
        LeMerdyBasis::SummingSections => ComplexMatrix::from_fn(n, n, |i, j| {
            Complex64::new(if i >= j { 1.0 } else { 0.0 }, 0.0)
        }),
        LeMerdyBasis::UserMatrix(b) => {
            if b.nrows() != n || b.ncols() != n {
                return Err(SimError::DimensionMismatch {
                    expected: n,
                    found: b.nrows(),
                });
            }
            b.clone()
        }
    };
    if min_singular_value(&b) <= 1e-12 * b.norm() {
        return Err(SimError::NearSingular(
            "Le Merdy basis matrix is not invertible".into(),
        ));
    }
    Ok(b)
}

fn rates(n: usize) -> impl Iterator<Item = f64> {
    (1..=n).map(|j| 2f64.powi(j as i32))
}

/// Generator `B diag(-2^j) B^{-1}`, `j = 1..=n`.
pub fn lemerdy_generator(n: usize, basis: &LeMerdyBasis) -> Result<ComplexMatrix> {
    if n == 0 {
        return Err(SimError::Domain("dimension must be positive".into()));
    }
    let b = basis_matrix(n, basis)?;
    let d = ComplexMatrix::from_diagonal(&nalgebra::DVector::from_iterator(
        n,
        rates(n).map(|r| Complex64::new(-r, 0.0)),
    ));
    Ok(&b * d * inverse(&b)?)
}

/// `T(t)` from the closed form; exponentials below the floating range flush to zero.
pub fn lemerdy_eval(n: usize, basis: &LeMerdyBasis, t: f64) -> Result<ComplexMatrix> {
    if !(t >= 0.0) {
        return Err(SimError::Domain(format!(
            "time must be non-negative, got {t}"
        )));
    }
    let b = basis_matrix(n, basis)?;
    let d = nalgebra::DVector::from_iterator(
        n,
        rates(n).map(|r| {
            let e = (-r * t).exp();
            Complex64::new(if e < f64::MIN_POSITIVE { 0.0 } else { e }, 0.0)
        }),
    );
    Ok(&b * ComplexMatrix::from_diagonal(&d) * inverse(&b)?)
}

/// The semigroup generated by [`lemerdy_generator`].
pub fn lemerdy_semigroup(n: usize, basis: &LeMerdyBasis) -> Result<MatrixSemigroup> {
    MatrixSemigroup::from_generator(lemerdy_generator(n, basis)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::opcore::spectral::operator_norm;

    #[test]
    fn closed_form_matches_exponential() {
        let s = lemerdy_semigroup(5, &LeMerdyBasis::SummingSections).unwrap();
        for t in [0.0, 0.01, 0.3, 2.0] {
            let e = lemerdy_eval(5, &LeMerdyBasis::SummingSections, t).unwrap();
            assert!(operator_norm(&(s.eval(t).unwrap() - e)) < 1e-10);
        }
        assert!(operator_norm(&(s.eval(0.0).unwrap() - ComplexMatrix::identity(5, 5))) < 1e-12);
    }

    #[test]
    fn underflow_flushes() {
        let e = lemerdy_eval(12, &LeMerdyBasis::SummingSections, 1e3).unwrap();
        assert!(e.iter().all(|z| z.re.is_finite() && z.im.is_finite()));
        assert_eq!(operator_norm(&e), 0.0);
    }

    #[test]
    fn identity_basis_is_normal() {
        let b = LeMerdyBasis::UserMatrix(ComplexMatrix::identity(3, 3));
        let a = lemerdy_generator(3, &b).unwrap();
        assert_eq!(
            a,
            ComplexMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![
                (-2.0).into(),
                (-4.0).into(),
                (-8.0).into()
            ]))
        );
    }
}
