//! The auxiliary semigroup `W(t) = [[R_p(t), V(t)], [0, R(t)]]` on `L²[0,1] ⊕ L²[0,1]`.
//!
//! `R_p` is the periodic shift, `V(t)` fills `[0, t)` from the wrapped tail and
//! `R` is the truncated right shift. `W` is a contraction semigroup in the norm
//! `‖(f, g)‖² = ‖f + g‖² + ‖g‖²` induced by `Λ = [[I, I], [0, I]]`.

use super::grid::{right_shift_matrix, selection};
use crate::error::{Result, SimError};
use crate::opcore::linalg::{block2, kron, ComplexMatrix};
use crate::opcore::semigroup::{Descriptor, MatrixSemigroup};

fn wrap(i: usize, j: u64, m: usize) -> usize {
    (i as i64 - j as i64).rem_euclid(m as i64) as usize
}

/// `R_p(j/m)`: `(R_p f)_i = f_{(i - j) mod m}`.
pub fn periodic_shift(m: usize, j: u64) -> ComplexMatrix {
    selection(m, m, |i| Some(wrap(i, j, m)))
}

/// `V(j/m)`: `(V g)_i = g_{(i - j) mod m}` for cells left of `t`, zero elsewhere.
pub fn wrap_fill(m: usize, j: u64) -> ComplexMatrix {
    selection(m, m, |i| ((i as u64) < j).then(|| wrap(i, j, m)))
}

/// `W(j/m)` of dimension `2m`.
pub fn w_matrix(m: usize, j: u64) -> ComplexMatrix {
    block2(
        &periodic_shift(m, j),
        &wrap_fill(m, j),
        &ComplexMatrix::zeros(m, m),
        &right_shift_matrix(m, j),
    )
}

/// `W` on `m` cells; with an inner semigroup `S₀` on `C^d`, the product `M_{S₀(t)} W(t/2)` of dimension `2md`.
///
/// Without an inner semigroup the grid step is `1/m`; with one it is `2/m`,
/// so that `W(t/2)` stays on the grid.
pub fn w_semigroup(m: usize, inner: Option<&MatrixSemigroup>) -> Result<MatrixSemigroup> {
    if m == 0 {
        return Err(SimError::Domain("m must be positive".into()));
    }
    let h = 1.0 / m as f64;
    Ok(match inner {
        None => MatrixSemigroup::sampled(
            Descriptor::new("w_semigroup").with("m", m),
            2 * m,
            h,
            0.0,
            move |j| Ok(w_matrix(m, j)),
        ),
        Some(s0) => {
            let s0 = s0.clone();
            let d = s0.dim();
            let desc = Descriptor::new("w_semigroup")
                .with("m", m)
                .with("inner_dim", d);
            MatrixSemigroup::sampled(desc, 2 * m * d, 2.0 * h, s0.law_tol(), move |j| {
                Ok(kron(&w_matrix(m, j), &s0.eval(2.0 * j as f64 * h)?))
            })
        }
    })
}

/// `Λ*Λ` for `Λ = [[I, I], [0, I]]` on `(C^m ⊕ C^m) ⊗ C^d`.
pub fn lambda_i_weight(m: usize, d: usize) -> ComplexMatrix {
    let eye = ComplexMatrix::identity(m, m);
    let lam = block2(&eye, &eye, &ComplexMatrix::zeros(m, m), &eye);
    kron(&(lam.adjoint() * lam), &ComplexMatrix::identity(d, d))
}

/// `Q V(t) (h χ_{[0,1/2]})` with `Q` the cell-width row, for `h = 1` and `t = j/m` (`m` even).
pub fn int_q_value(m: usize, j: u64) -> f64 {
    let h = 1.0 / m as f64;
    let v = wrap_fill(m, j);
    let half = m / 2;
    (0..m)
        .map(|i| (0..half).map(|c| v[(i, c)].re).sum::<f64>() * h)
        .sum()
}

/// Continuum value of `Q V(t) χ_{[0,1/2]}`: `0`, `t - 1/2`, `1/2` on the three regimes.
pub fn int_q_exact(t: f64) -> f64 {
    (t - 0.5).clamp(0.0, 0.5)
}
