//! Dense helpers shared across modules, generic over real and complex scalars.
//!
//! Most public entry points take [`ComplexMatrix`]; the solvers switch to the
//! `f64` instantiation of the generic helpers when every input is real, which
//! roughly quarters the cost of Hermitian eigendecompositions.

use nalgebra::{ComplexField, DMatrix, DVector, Schur, SymmetricEigen};
use num_complex::Complex64;

use crate::error::{Result, SimError};

/// Dense square complex matrix; the universal operator carrier.
pub type ComplexMatrix = DMatrix<Complex64>;

/// Scalar fields the generic kernels run on (`f64` and `Complex64`).
pub trait Scalar: ComplexField<RealField = f64> + Copy {
    /// Narrowing conversion; real fields keep the real part.
    fn from_c64(z: Complex64) -> Self;
    fn to_c64(self) -> Complex64;
}

impl Scalar for f64 {
    fn from_c64(z: Complex64) -> Self {
        z.re
    }
    fn to_c64(self) -> Complex64 {
        Complex64::new(self, 0.0)
    }
}

impl Scalar for Complex64 {
    fn from_c64(z: Complex64) -> Self {
        z
    }
    fn to_c64(self) -> Complex64 {
        self
    }
}

/// Converts a generic matrix to the complex carrier.
pub fn widen<F: Scalar>(m: &DMatrix<F>) -> ComplexMatrix {
    m.map(|x| x.to_c64())
}

/// Converts a complex carrier to `F` (dropping imaginary parts when `F` is real).
pub fn narrow<F: Scalar>(m: &ComplexMatrix) -> DMatrix<F> {
    m.map(F::from_c64)
}

/// Checks the carrier invariants: square with finite entries.
pub fn validate(m: &ComplexMatrix) -> Result<()> {
    if m.nrows() != m.ncols() {
        return Err(SimError::NotSquare {
            rows: m.nrows(),
            cols: m.ncols(),
        });
    }
    if m.nrows() == 0 {
        return Err(SimError::Domain("matrix dimension must be positive".into()));
    }
    for j in 0..m.ncols() {
        for i in 0..m.nrows() {
            let z = m[(i, j)];
            if !z.re.is_finite() || !z.im.is_finite() {
                return Err(SimError::NonFinite { row: i, col: j });
            }
        }
    }
    Ok(())
}

/// Fails unless `m` is `n x n`.
pub fn expect_dim(m: &ComplexMatrix, n: usize) -> Result<()> {
    if m.nrows() != n || m.ncols() != n {
        return Err(SimError::DimensionMismatch {
            expected: n,
            found: m.nrows().max(m.ncols()),
        });
    }
    Ok(())
}

/// Builds a complex matrix from real rows.
pub fn from_real_rows(rows: &[&[f64]]) -> ComplexMatrix {
    let n = rows.len();
    let m = rows.first().map_or(0, |r| r.len());
    DMatrix::from_fn(n, m, |i, j| Complex64::new(rows[i][j], 0.0))
}

/// Real diagonal matrix as a complex carrier.
pub fn diag_real(d: &[f64]) -> ComplexMatrix {
    let n = d.len();
    DMatrix::from_fn(n, n, |i, j| {
        if i == j {
            Complex64::new(d[i], 0.0)
        } else {
            Complex64::new(0.0, 0.0)
        }
    })
}

pub fn to_complex(m: &DMatrix<f64>) -> ComplexMatrix {
    m.map(|x| Complex64::new(x, 0.0))
}

/// True when every imaginary part is exactly zero.
pub fn is_real(m: &ComplexMatrix) -> bool {
    m.iter().all(|z| z.im == 0.0)
}

pub fn real_part(m: &ComplexMatrix) -> DMatrix<f64> {
    m.map(|z| z.re)
}

/// Hermitian part `(M + M*)/2`.
pub fn herm<F: Scalar>(m: &DMatrix<F>) -> DMatrix<F> {
    let half = F::from_real(0.5);
    (m + m.adjoint()) * half
}

/// Eigen-decomposition of the Hermitian part of `m`, eigenvalues ascending.
pub fn herm_eig<F: Scalar>(m: &DMatrix<F>) -> (Vec<f64>, DMatrix<F>) {
    let h = herm(m);
    let n = h.nrows();
    let eig = SymmetricEigen::new(h);
    let mut idx: Vec<usize> = (0..n).collect();
    idx.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let vals = idx.iter().map(|&k| eig.eigenvalues[k]).collect();
    let vecs = DMatrix::from_fn(n, n, |i, j| eig.eigenvectors[(i, idx[j])]);
    (vals, vecs)
}

/// Eigenvalues of the Hermitian part of `m`, ascending.
pub fn herm_eigenvalues<F: Scalar>(m: &DMatrix<F>) -> Vec<f64> {
    let mut v: Vec<f64> = herm(m).symmetric_eigenvalues().iter().copied().collect();
    v.sort_by(f64::total_cmp);
    v
}

pub fn lambda_max<F: Scalar>(m: &DMatrix<F>) -> f64 {
    herm_eigenvalues(m)
        .last()
        .copied()
        .unwrap_or(f64::NEG_INFINITY)
}

pub fn lambda_min<F: Scalar>(m: &DMatrix<F>) -> f64 {
    herm_eigenvalues(m)
        .first()
        .copied()
        .unwrap_or(f64::INFINITY)
}

/// Rebuilds `V diag(f(λ)) V*`.
pub fn spectral_map<F: Scalar>(
    vals: &[f64],
    vecs: &DMatrix<F>,
    f: impl Fn(f64) -> f64,
) -> DMatrix<F> {
    let mut scaled = vecs.clone();
    for (j, &l) in vals.iter().enumerate() {
        let s = F::from_real(f(l));
        for x in scaled.column_mut(j).iter_mut() {
            *x *= s;
        }
    }
    &scaled * vecs.adjoint()
}

/// Square root of the positive part of a Hermitian matrix.
pub fn sqrt_psd<F: Scalar>(m: &DMatrix<F>) -> DMatrix<F> {
    let (vals, vecs) = herm_eig(m);
    spectral_map(&vals, &vecs, |l| l.max(0.0).sqrt())
}

/// Frobenius inner product `Re tr(A* B)`.
pub fn inner<F: Scalar>(a: &DMatrix<F>, b: &DMatrix<F>) -> f64 {
    a.iter()
        .zip(b.iter())
        .map(|(x, y)| (x.conjugate() * *y).real())
        .sum()
}

/// Kronecker product.
pub fn kron<F: Scalar>(a: &DMatrix<F>, b: &DMatrix<F>) -> DMatrix<F> {
    a.kronecker(b)
}

/// Assembles `[[a, b], [c, d]]` from square blocks of equal size.
pub fn block2<F: Scalar>(
    a: &DMatrix<F>,
    b: &DMatrix<F>,
    c: &DMatrix<F>,
    d: &DMatrix<F>,
) -> DMatrix<F> {
    let (n, m) = (a.nrows(), a.ncols());
    let (n2, m2) = (c.nrows(), b.ncols());
    let mut out = DMatrix::zeros(n + n2, m + m2);
    out.view_mut((0, 0), (n, m)).copy_from(a);
    out.view_mut((0, m), (n, m2)).copy_from(b);
    out.view_mut((n, 0), (n2, m)).copy_from(c);
    out.view_mut((n, m), (n2, m2)).copy_from(d);
    out
}

/// Operator 2-norm of an arbitrary (possibly rectangular) matrix.
pub fn norm2<F: Scalar>(m: &DMatrix<F>) -> f64 {
    if m.is_empty() {
        return 0.0;
    }
    m.singular_values().iter().copied().fold(0.0, f64::max)
}

/// Inverse via LU, failing on singular input.
pub fn inverse<F: Scalar>(m: &DMatrix<F>) -> Result<DMatrix<F>> {
    m.clone()
        .lu()
        .try_inverse()
        .ok_or_else(|| SimError::NearSingular("matrix inverse".into()))
}

/// Integer power by repeated squaring.
pub fn powi<F: Scalar>(m: &DMatrix<F>, mut k: u64) -> DMatrix<F> {
    let n = m.nrows();
    let mut acc = DMatrix::<F>::identity(n, n);
    let mut base = m.clone();
    while k > 0 {
        if k & 1 == 1 {
            acc = &acc * &base;
        }
        k >>= 1;
        if k > 0 {
            base = &base * &base;
        }
    }
    acc
}

/// Normalises a Hermitian PD weight so that its smallest eigenvalue is 1.
pub fn normalize_weight<F: Scalar>(p: &DMatrix<F>) -> DMatrix<F> {
    let lmin = lambda_min(p);
    herm(p) * F::from_real(1.0 / lmin)
}

/// Complex Schur form `t = Q U Q*`, returned as `(Q, U)`.
///
/// Unshifted-looking inputs such as cyclic permutations stall the QR sweep,
/// so a failed attempt is retried on a fixed Householder similarity of `t`.
pub fn schur(t: &ComplexMatrix) -> Result<(ComplexMatrix, ComplexMatrix)> {
    let n = t.nrows();
    let iters = 100 * n.max(10);
    if let Some(s) = Schur::try_new(t.clone(), f64::EPSILON, iters) {
        return Ok(s.unpack());
    }
    let v = DVector::<Complex64>::from_fn(n, |i, _| {
        Complex64::new(
            1.0 + (0.7548776662 * (i as f64 + 1.0)).fract(),
            (0.5698402910 * (i as f64 + 1.0)).fract(),
        )
    });
    let h = ComplexMatrix::identity(n, n)
        - (&v * v.adjoint()) * Complex64::new(2.0 / v.norm_squared(), 0.0);
    let s = Schur::try_new(&h * t * &h, f64::EPSILON, 4 * iters)
        .ok_or_else(|| SimError::Convergence("complex Schur".into()))?;
    let (q, u) = s.unpack();
    Ok((h * q, u))
}


#[cfg(test)]
mod schur_tests {
    use super::*;

    #[test]
    fn schur_handles_cyclic_permutations() {
        let n = 16;
        let p = ComplexMatrix::from_fn(n, n, |i, j| {
            Complex64::new(if (j + 1) % n == i { 1.0 } else { 0.0 }, 0.0)
        });
        let (q, u) = schur(&p).unwrap();
        assert!((&q * &u * q.adjoint() - &p).norm() < 1e-12);
        for i in 0..n {
            assert!((u[(i, i)].norm() - 1.0).abs() < 1e-12);
            for j in 0..i {
                assert!(u[(i, j)].norm() < 1e-12);
            }
        }
    }
}
