//! Left-zero idempotents, finite Schäffer dilations and Holbrook factorisations.

use num_complex::Complex64;

use crate::error::{Result, SimError};
use crate::opcore::linalg::{herm, herm_eig, powi, spectral_map, validate, ComplexMatrix};
use crate::opcore::semigroup::{Descriptor, MatrixSemigroup};
use crate::opcore::spectral::operator_norm;

/// `E_n = [[I, 0], [D_n, 0]]`; any two satisfy `E_m E_n = E_m`.
pub fn leftzero_idempotents(d_blocks: &[ComplexMatrix]) -> Result<Vec<ComplexMatrix>> {
    let Some(first) = d_blocks.first() else {
        return Ok(Vec::new());
    };
    let k = first.nrows();
    for (i, d) in d_blocks.iter().enumerate() {
        validate(d)?;
        if d.nrows() != k {
            return Err(SimError::DimensionMismatch {
                expected: k,
                found: d.nrows(),
            });
        }
        if d_blocks[..i].iter().any(|e| e == d) {
            return Err(SimError::Domain(
                "off-diagonal blocks must be pairwise distinct".into(),
            ));
        }
    }
    Ok(d_blocks
        .iter()
        .map(|d| {
            let mut e = ComplexMatrix::zeros(2 * k, 2 * k);
            e.view_mut((0, 0), (k, k)).fill_with_identity();
            e.view_mut((k, 0), (k, k)).copy_from(d);
            e
        })
        .collect())
}

fn defect(x: &ComplexMatrix) -> ComplexMatrix {
    let n = x.nrows();
    let (vals, vecs) = herm_eig(&herm(&(ComplexMatrix::identity(n, n) - x)));
    spectral_map(&vals, &vecs, |l| l.max(0.0).sqrt())
}

/// Unitary `U` on `2N+1` copies of `C^d` (blocks indexed `-N..=N`, `H` at index 0) with
/// `P_H U^k |_H = T^k` for `0 ≤ k ≤ 2N`.
///
/// The Julia block `[[T, D_{T*}], [D_T, -T*]]` maps blocks `(0, -1)` to `(0, 1)`;
/// the remaining blocks shift forward, and block `N` wraps to block `-N`.
pub fn schaeffer_dilation(t: &ComplexMatrix, horizon: usize) -> Result<ComplexMatrix> {
    validate(t)?;
    let nrm = operator_norm(t);
    if nrm > 1.0 + 1e-12 {
        return Err(SimError::NotContraction(nrm));
    }
    let n = horizon.max(1);
    let d = t.nrows();
    let blocks = 2 * n + 1;
    let pos = |j: i64| ((j + n as i64) as usize) * d;
    let mut u = ComplexMatrix::zeros(blocks * d, blocks * d);
    let eye = ComplexMatrix::identity(d, d);
    let dt = defect(&(t.adjoint() * t));
    let dts = defect(&(t * t.adjoint()));
    // Column block `src` feeds row block `dst`.
    let mut put = |dst: i64, src: i64, m: &ComplexMatrix| {
        u.view_mut((pos(dst), pos(src)), (d, d)).copy_from(m)
    };
    put(0, 0, t);
    put(0, -1, &dts);
    put(1, 0, &dt);
    put(1, -1, &(-t.adjoint()));
    let n = n as i64;
    for j in (1..n).chain(-n..-1) {
        put(j + 1, j, &eye);
    }
    put(-n, n, &eye);
    Ok(u)
}

/// Compression `P_H M|_H` to block 0 of a dilation built by [`schaeffer_dilation`].
pub fn compress_to_h(m: &ComplexMatrix, d: usize, horizon: usize) -> ComplexMatrix {
    let o = horizon.max(1) * d;
    m.view((o, o), (d, d)).into_owned()
}

/// Factorisation `T^k ≈ A S^k B` with `S` contractive, used for Holbrook-type bounds.
#[derive(Clone, Debug)]
pub struct HolbrookFactorization {
    /// `A: K → H`.
    pub amap: ComplexMatrix,
    /// `B: H → K`.
    pub bmap: ComplexMatrix,
    /// Discrete semigroup `k ↦ S^k` on `K` (step 1).
    pub s: MatrixSemigroup,
    /// Largest power audited.
    pub horizon: usize,
}

impl HolbrookFactorization {
    pub fn new(
        amap: ComplexMatrix,
        bmap: ComplexMatrix,
        s_op: ComplexMatrix,
        horizon: usize,
        name: &str,
    ) -> Result<Self> {
        validate(&s_op)?;
        let k = s_op.nrows();
        if amap.ncols() != k || bmap.nrows() != k || amap.nrows() != bmap.ncols() {
            return Err(SimError::DimensionMismatch {
                expected: k,
                found: amap.ncols(),
            });
        }
        let nrm = operator_norm(&s_op);
        if nrm > 1.0 + 1e-10 {
            return Err(SimError::NotContraction(nrm));
        }
        let s = MatrixSemigroup::sampled(
            Descriptor::new(name).with("dim", k),
            k,
            1.0,
            0.0,
            move |j| Ok(powi(&s_op, j)),
        );
        Ok(Self {
            amap,
            bmap,
            s,
            horizon,
        })
    }

    /// Factorisation through the Schäffer dilation of a contraction `S`: `A = P_H`, `B = ι_H`.
    pub fn schaeffer(s_op: &ComplexMatrix, horizon: usize) -> Result<Self> {
        let d = s_op.nrows();
        let u = schaeffer_dilation(s_op, horizon.div_ceil(2).max(1))?;
        let big = u.nrows();
        let o = horizon.div_ceil(2).max(1) * d;
        let amap = ComplexMatrix::from_fn(d, big, |i, j| {
            Complex64::new(if j == o + i { 1.0 } else { 0.0 }, 0.0)
        });
        let bmap = amap.adjoint();
        Self::new(amap, bmap, u, horizon, "schaeffer")
    }

    /// `‖T^k - A S^k B‖` for `k = 0..=horizon`.
    pub fn defects(&self, t: &ComplexMatrix) -> Result<Vec<f64>> {
        let mut out = Vec::with_capacity(self.horizon + 1);
        let mut tk = ComplexMatrix::identity(t.nrows(), t.nrows());
        for k in 0..=self.horizon as u64 {
            let sk = self.s.eval_steps(k)?;
            out.push(operator_norm(&(&tk - &self.amap * sk * &self.bmap)));
            tk = &tk * t;
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::opcore::linalg::{diag_real, from_real_rows};

    #[test]
    fn idempotent_algebra() {
        let d1 = diag_real(&[1.0]);
        let d2 = diag_real(&[2.0]);
        let e = leftzero_idempotents(&[d1.clone(), d2]).unwrap();
        assert_eq!(&e[0] * &e[0], e[0]);
        assert_eq!(&e[0] * &e[1], e[0]);
        assert_eq!(&e[1] * &e[0], e[1]);
        assert!(leftzero_idempotents(&[d1.clone(), d1]).is_err());
    }

    #[test]
    fn dilation_is_unitary_and_compresses() {
        let t = from_real_rows(&[&[0.3, 0.5], &[-0.2, 0.4]]);
        let n = 3;
        let u = schaeffer_dilation(&t, n).unwrap();
        let eye = ComplexMatrix::identity(u.nrows(), u.nrows());
        assert!(operator_norm(&(u.adjoint() * &u - eye)) < 1e-12);
        for k in 0..=2 * n as u64 {
            let c = compress_to_h(&powi(&u, k), 2, n);
            assert!(operator_norm(&(c - powi(&t, k))) < 1e-12, "k = {k}");
        }
    }

    #[test]
    fn zero_contraction_gives_block_shift() {
        let u = schaeffer_dilation(&ComplexMatrix::zeros(1, 1), 2).unwrap();
        for k in 1..=4 {
            assert_eq!(
                compress_to_h(&powi(&u, k), 1, 2)[(0, 0)],
                Complex64::new(0.0, 0.0)
            );
        }
        assert!(schaeffer_dilation(&diag_real(&[1.5]), 2).is_err());
    }

    #[test]
    fn schaeffer_factorization_is_exact() {
        let t = from_real_rows(&[&[0.5, 0.5], &[0.0, 0.5]]);
        let f = HolbrookFactorization::schaeffer(&t, 6).unwrap();
        assert!(f.defects(&t).unwrap().iter().all(|&e| e < 1e-12));
    }
}
