//! Uniform cell grids on `[0, ν]` with exponential weights, and the shift,
//! evolution and integration operators that live on them.

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Result, SimError};
use crate::opcore::linalg::ComplexMatrix;
use crate::opcore::semigroup::{Descriptor, MatrixSemigroup};

/// `L²([0, ν], e^{-2λx} dx)` discretised by `m` equal cells.
///
/// A grid function is the vector of cell values; its squared norm is
/// `Σ w_i |f_i|²` with `w_i = e^{-2λ x_i} Δ` at the cell midpoints `x_i`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct GridSpace {
    pub nu: f64,
    pub m: usize,
    pub lambda: f64,
}

impl GridSpace {
    pub fn new(nu: f64, m: usize, lambda: f64) -> Result<Self> {
        if !(nu > 0.0) || !nu.is_finite() || m == 0 || !lambda.is_finite() {
            return Err(SimError::Domain(format!(
                "invalid grid: nu = {nu}, m = {m}, lambda = {lambda}"
            )));
        }
        Ok(Self { nu, m, lambda })
    }

    /// Cell width `Δ = ν/m`.
    pub fn step(&self) -> f64 {
        self.nu / self.m as f64
    }

    pub fn midpoints(&self) -> Vec<f64> {
        let h = self.step();
        (0..self.m).map(|i| (i as f64 + 0.5) * h).collect()
    }

    /// Quadrature weights `w_i = e^{-2λx_i} Δ`.
    pub fn weights(&self) -> Vec<f64> {
        let h = self.step();
        self.midpoints()
            .iter()
            .map(|x| (-2.0 * self.lambda * x).exp() * h)
            .collect()
    }

    /// Gram matrix `diag(w)` of the weighted inner product.
    pub fn gram(&self) -> ComplexMatrix {
        diag(&self.weights())
    }

    /// Number of whole cells in `[0, x]`, or an error when `x` is off the grid.
    pub fn cells(&self, x: f64) -> Result<usize> {
        let k = x / self.step();
        let r = k.round();
        if (k - r).abs() > 1e-9 * k.abs().max(1.0) || r < 0.0 {
            return Err(SimError::Window(format!(
                "{x} is not a multiple of the grid step {}",
                self.step()
            )));
        }
        Ok(r as usize)
    }
}

pub(crate) fn diag(d: &[f64]) -> ComplexMatrix {
    ComplexMatrix::from_diagonal(&nalgebra::DVector::from_iterator(
        d.len(),
        d.iter().map(|&x| Complex64::new(x, 0.0)),
    ))
}

/// Matrix with ones at `(i, src(i))` for every `i` where `src` is defined.
pub(crate) fn selection(
    rows: usize,
    cols: usize,
    src: impl Fn(usize) -> Option<usize>,
) -> ComplexMatrix {
    let mut m = ComplexMatrix::zeros(rows, cols);
    for i in 0..rows {
        if let Some(j) = src(i) {
            m[(i, j)] = Complex64::new(1.0, 0.0);
        }
    }
    m
}

/// `R(kΔ)`: cell `i` moves to cell `i + k`; mass leaving `[0, ν]` is lost.
pub fn right_shift_matrix(m: usize, k: u64) -> ComplexMatrix {
    selection(m, m, |i| (i as u64 >= k).then(|| i - k as usize))
}

/// `L(kΔ)`: `(Lf)_i = f_{i+k}`.
pub fn left_shift_matrix(m: usize, k: u64) -> ComplexMatrix {
    selection(m, m, |i| {
        let j = i as u64 + k;
        (j < m as u64).then_some(j as usize)
    })
}

/// Right-shift semigroup on the grid; nilpotent with `R(ν) = 0`.
pub fn right_shift(space: &GridSpace) -> MatrixSemigroup {
    let m = space.m;
    let desc = Descriptor::new("right_shift")
        .with("nu", space.nu)
        .with("m", m)
        .with("lambda", space.lambda);
    MatrixSemigroup::sampled(desc, m, space.step(), 0.0, move |k| {
        Ok(right_shift_matrix(m, k))
    })
}

/// Left-shift semigroup on the grid.
pub fn left_shift(space: &GridSpace) -> MatrixSemigroup {
    let m = space.m;
    let desc = Descriptor::new("left_shift")
        .with("nu", space.nu)
        .with("m", m)
        .with("lambda", space.lambda);
    MatrixSemigroup::sampled(desc, m, space.step(), 0.0, move |k| {
        Ok(left_shift_matrix(m, k))
    })
}

/// `(E(t)f)(x) = T(t) f(x - t)` on `L²([0, ν]; C^d)`, cell-major block layout.
///
/// The inner semigroup is evaluated at grid times `kΔ`.
pub fn evolution_semigroup(inner: &MatrixSemigroup, space: &GridSpace) -> MatrixSemigroup {
    let (m, d, h) = (space.m, inner.dim(), space.step());
    let inner = inner.clone();
    let desc = Descriptor::new("evolution")
        .with("nu", space.nu)
        .with("m", m)
        .with("lambda", space.lambda)
        .with("inner_dim", d);
    MatrixSemigroup::sampled(desc, m * d, h, inner.law_tol(), move |k| {
        let mut out = ComplexMatrix::zeros(m * d, m * d);
        if k >= m as u64 {
            return Ok(out);
        }
        let t = inner.eval(k as f64 * h)?;
        for i in k as usize..m {
            let j = i - k as usize;
            out.view_mut((i * d, j * d), (d, d)).copy_from(&t);
        }
        Ok(out)
    })
}

/// Weighted Gram matrix of the block space `L²([0, ν]; C^d)`.
pub fn block_gram(space: &GridSpace, d: usize) -> ComplexMatrix {
    let w: Vec<f64> = space
        .weights()
        .iter()
        .flat_map(|&x| std::iter::repeat_n(x, d))
        .collect();
    diag(&w)
}

/// `Q f = ∫₀^ν f(x) dx` as a `1 × m` row of cell widths.
pub fn integration_functional(space: &GridSpace) -> ComplexMatrix {
    ComplexMatrix::from_element(1, space.m, Complex64::new(space.step(), 0.0))
}

/// `F h = h χ_{[0,1]}` as an `m × 1` column; cells whose midpoint lies in `[0, 1]` are set.
pub fn indicator_embedding(space: &GridSpace) -> ComplexMatrix {
    let mids = space.midpoints();
    ComplexMatrix::from_fn(space.m, 1, |i, _| {
        Complex64::new(if mids[i] <= 1.0 { 1.0 } else { 0.0 }, 0.0)
    })
}

/// Norm of a row operator `C^m → C` on the weighted grid space.
pub fn row_norm(space: &GridSpace, q: &ComplexMatrix) -> f64 {
    space
        .weights()
        .iter()
        .enumerate()
        .map(|(i, w)| q[(0, i)].norm_sqr() / w)
        .sum::<f64>()
        .sqrt()
}

/// Norm of a column operator `C → C^m` into the weighted grid space.
pub fn column_norm(space: &GridSpace, f: &ComplexMatrix) -> f64 {
    space
        .weights()
        .iter()
        .enumerate()
        .map(|(i, w)| f[(i, 0)].norm_sqr() * w)
        .sum::<f64>()
        .sqrt()
}

/// Continuum value `((e^{2λν} - 1)/(2λ))^{1/2}` of `‖Q_{λ,ν}‖`.
pub fn q_norm_exact(lambda: f64, nu: f64) -> f64 {
    if lambda == 0.0 {
        nu.sqrt()
    } else {
        (((2.0 * lambda * nu).exp() - 1.0) / (2.0 * lambda)).sqrt()
    }
}

/// Continuum value `((1 - e^{-2λ})/(2λ))^{1/2}` of `‖F_{λ,ν}‖` for `ν ≥ 1`.
pub fn f_norm_exact(lambda: f64) -> f64 {
    if lambda == 0.0 {
        1.0
    } else {
        ((1.0 - (-2.0 * lambda).exp()) / (2.0 * lambda)).sqrt()
    }
}
