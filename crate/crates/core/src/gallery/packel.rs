//! Packel-type semigroups `T_a(t) = [[L(t), V_a(t)], [0, R(t)]]` on a truncated half-line.
//!
//! `V_a(t)` reflects onto the intervals `I_n(t) = (a_n - t, a_n]`, plus the
//! lowest interval `[0, 2a_{n₀} - t]`, via `f ↦ f(2a_n - x - t)`. A finite index
//! window is used; the element just below the window is taken to be `0`,
//! which keeps the doubling condition and the semigroup law. On `[0, X]` with
//! `X ≥ max a_n` the compression of the half-line semigroup is exact.

use serde::Serialize;

use super::grid::{left_shift_matrix, right_shift_matrix, selection, GridSpace};
use crate::error::{Result, SimError};
use crate::opcore::linalg::{block2, ComplexMatrix};
use crate::opcore::semigroup::{Descriptor, MatrixSemigroup};

/// Index set of a dyadic sequence.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum IndexSet {
    Z,
    Zplus,
    Zminus,
}

impl IndexSet {
    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "Z" => Ok(IndexSet::Z),
            "Zplus" => Ok(IndexSet::Zplus),
            "Zminus" => Ok(IndexSet::Zminus),
            _ => Err(SimError::Parse(format!(
                "unknown index set {s:?} (expected Z, Zplus or Zminus)"
            ))),
        }
    }
}

/// Increasing sequence `a_n`, `n = start, …, start + len - 1`, with `a_{n+1} ≥ 2a_n`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DyadicSequence {
    pub index_set: IndexSet,
    pub start: i32,
    pub values: Vec<f64>,
}

impl DyadicSequence {
    pub fn new(index_set: IndexSet, start: i32, values: Vec<f64>) -> Result<Self> {
        if values.is_empty() || values.iter().any(|&v| !(v > 0.0) || !v.is_finite()) {
            return Err(SimError::Window(
                "sequence values must be positive and finite".into(),
            ));
        }
        if let Some(w) = values.windows(2).find(|w| w[1] < 2.0 * w[0]) {
            return Err(SimError::Window(format!(
                "doubling condition fails: {} < 2 * {}",
                w[1], w[0]
            )));
        }
        let end = start + values.len() as i32 - 1;
        let ok = match index_set {
            IndexSet::Zminus => end <= 0,
            IndexSet::Zplus => start >= 0,
            IndexSet::Z => true,
        };
        if !ok {
            return Err(SimError::Window(format!(
                "window {start}..={end} is not inside {index_set:?}"
            )));
        }
        Ok(Self {
            index_set,
            start,
            values,
        })
    }

    /// `a_n = base^n` on the default window of depth `k`: `-k..=0`, `0..=k` or `-k..=k`.
    pub fn geometric(index_set: IndexSet, k: u32, base: f64) -> Result<Self> {
        let k = k as i32;
        let (lo, hi) = match index_set {
            IndexSet::Zminus => (-k, 0),
            IndexSet::Zplus => (0, k),
            IndexSet::Z => (-k, k),
        };
        Self::new(index_set, lo, (lo..=hi).map(|n| base.powi(n)).collect())
    }

    pub fn end(&self) -> i32 {
        self.start + self.values.len() as i32 - 1
    }

    /// `a_n`, for `n` in the window.
    pub fn get(&self, n: i32) -> Option<f64> {
        (n >= self.start && n <= self.end()).then(|| self.values[(n - self.start) as usize])
    }

    pub fn max(&self) -> f64 {
        *self.values.last().expect("non-empty")
    }

    /// Grid cell counts of every `a_n`; fails when a value is off the grid or beyond `[0, ν]`.
    pub fn bind(&self, space: &GridSpace) -> Result<Vec<usize>> {
        let cells = self
            .values
            .iter()
            .map(|&a| space.cells(a))
            .collect::<Result<Vec<_>>>()?;
        if let Some(&c) = cells.iter().find(|&&c| c > space.m) {
            return Err(SimError::Window(format!(
                "a_n = {} lies outside the truncation [0, {}]",
                c as f64 * space.step(),
                space.nu
            )));
        }
        Ok(cells)
    }
}

/// `V_a(jΔ)` on `m` cells for grid-bound sequence values `cells` (ascending).
pub fn reflection_matrix(cells: &[usize], m: usize, j: u64) -> ComplexMatrix {
    if j == 0 {
        return ComplexMatrix::zeros(m, m);
    }
    let j = j as i64;
    // Extended sequence with the zero element just below the window.
    let ext: Vec<i64> = std::iter::once(0)
        .chain(cells.iter().map(|&c| c as i64))
        .collect();
    let n0 = ext.iter().rposition(|&a| a < j).unwrap_or(0);
    let mut src = vec![None; m];
    let a0 = ext[n0];
    for i in 0..(2 * a0 - j).clamp(0, m as i64) {
        src[i as usize] = Some((2 * a0 - i - j - 1) as usize);
    }
    for &a in &ext[n0 + 1..] {
        for i in (a - j).max(0)..a.min(m as i64) {
            src[i as usize] = Some((2 * a - i - j - 1) as usize);
        }
    }
    selection(m, m, |i| src[i])
}

/// `V_a` as a sampler on the grid of `space`.
pub fn packel_reflection(
    a: &DyadicSequence,
    space: &GridSpace,
) -> Result<impl Fn(u64) -> ComplexMatrix + Send + Sync + Clone> {
    let cells = a.bind(space)?;
    let m = space.m;
    Ok(move |j: u64| reflection_matrix(&cells, m, j))
}

/// `T_a` compressed to `L²(0, X) ⊕ L²(0, X)` with `X = space.nu`.
pub fn packel_semigroup(a: &DyadicSequence, space: &GridSpace) -> Result<MatrixSemigroup> {
    let v = packel_reflection(a, space)?;
    let m = space.m;
    let desc = Descriptor::new("packel")
        .with("J", format!("{:?}", a.index_set))
        .with("window", format!("{}..={}", a.start, a.end()))
        .with("X", space.nu)
        .with("m", m);
    Ok(MatrixSemigroup::sampled(
        desc,
        2 * m,
        space.step(),
        0.0,
        move |j| {
            let zero = ComplexMatrix::zeros(m, m);
            Ok(block2(
                &left_shift_matrix(m, j),
                &v(j),
                &zero,
                &right_shift_matrix(m, j),
            ))
        },
    ))
}

/// Nilpotent compression `N_a` of `T_a` to `L²(0, b) ⊕ L²(0, b)` for a `Zminus` sequence.
///
/// `N_a(2b) = 0`. The grid step is `step`; `b` and every `a_n` must be multiples of it.
pub fn packel_nilpotent_compression(
    a: &DyadicSequence,
    b: f64,
    step: f64,
) -> Result<MatrixSemigroup> {
    if a.index_set != IndexSet::Zminus {
        return Err(SimError::Window(
            "the nilpotent compression needs a Zminus sequence".into(),
        ));
    }
    if a.max() > b {
        return Err(SimError::Window(format!(
            "a_n = {} exceeds b = {b}",
            a.max()
        )));
    }
    let m = (b / step).round() as usize;
    let space = GridSpace::new(b, m.max(1), 0.0)?;
    space.cells(b)?;
    let mut sem = packel_semigroup(a, &space)?;
    let desc = Descriptor::new("packel_nilpotent")
        .with("window", format!("{}..={}", a.start, a.end()))
        .with("b", b)
        .with("m", m);
    let inner = sem.clone();
    sem = MatrixSemigroup::sampled(desc, 2 * m, space.step(), 0.0, move |j| inner.eval_steps(j));
    Ok(sem)
}

/// `N_a` for `a_n = 2^n`, `n = -k..=0`, `b = 1` and grid step `2^{-k}` (dimension `2^{k+1}`).
pub fn packel_nilpotent_default(k: u32) -> Result<MatrixSemigroup> {
    let a = DyadicSequence::geometric(IndexSet::Zminus, k, 2.0)?;
    packel_nilpotent_compression(&a, 1.0, 2f64.powi(-(k as i32)))
}

/// Grid verification of the test-vector facts behind the lower bound `𝒞(N_a) ≥ √(|n|+1)/2`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct NilpotentOracle {
    /// Index `n` of the test vector `h_n = (0, χ_{(0, a_n)})`.
    pub n: i32,
    /// `√(|n|+1)/2`.
    pub bound: f64,
    /// Largest deviation of `N(t_n(k)) h_n` from `(χ_{(0,a_n)}, R(t_n(k)) χ_{(0,a_n)})`.
    pub orbit_defect: f64,
    /// The shifted indicators `R(t_n(k)) χ` have pairwise disjoint supports.
    pub disjoint: bool,
    /// `‖N(a_n)(χ_{(0,a_n)}, 0)‖`, zero when the left shift clears the first block.
    pub annihilation: f64,
    /// All structural facts hold exactly.
    pub verified: bool,
}

/// Checks the proof's identities on the deepest window index and returns the implied lower bound.
pub fn nilpotent_lower_bound_oracle(
    a: &DyadicSequence,
    b: f64,
    step: f64,
) -> Result<NilpotentOracle> {
    let sem = packel_nilpotent_compression(a, b, step)?;
    let m = (b / step).round() as usize;
    let n = a.start;
    let an = a.get(n).expect("window start");
    let cn = (an / step).round() as usize;
    let chi = |lo: usize, hi: usize| -> nalgebra::DVector<f64> {
        nalgebra::DVector::from_fn(m, |i, _| if i >= lo && i < hi { 1.0 } else { 0.0 })
    };
    let mut h = nalgebra::DVector::<num_complex::Complex64>::zeros(2 * m);
    for i in 0..cn {
        h[m + i] = 1.0.into();
    }
    let mut defect = 0.0f64;
    let mut supports: Vec<(usize, usize)> = Vec::new();
    for k in n..=a.end() {
        let t = 2.0 * a.get(k).expect("in window") - an;
        let j = (t / step).round() as usize;
        let out = sem.eval_steps(j as u64)? * &h;
        let first = chi(0, cn);
        let (lo, hi) = (j.min(m), (j + cn).min(m));
        let second = chi(lo, hi);
        for i in 0..m {
            defect = defect
                .max((out[i] - first[i]).norm())
                .max((out[m + i] - second[i]).norm());
        }
        supports.push((j, j + cn));
    }
    let disjoint = supports.windows(2).all(|w| w[0].1 <= w[1].0);
    let mut g = nalgebra::DVector::<num_complex::Complex64>::zeros(2 * m);
    for i in 0..cn {
        g[i] = 1.0.into();
    }
    let annihilation = (sem.eval_steps(cn as u64)? * g).norm();
    let verified = defect == 0.0 && disjoint && annihilation == 0.0;
    Ok(NilpotentOracle {
        n,
        bound: ((n.unsigned_abs() + 1) as f64).sqrt() / 2.0,
        orbit_defect: defect,
        disjoint,
        annihilation,
        verified,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::opcore::spectral::operator_norm;

    fn space(x: f64, m: usize) -> GridSpace {
        GridSpace::new(x, m, 0.0).unwrap()
    }

    #[test]
    fn reflection_law_is_exact() {
        for j in [IndexSet::Zminus, IndexSet::Zplus, IndexSet::Z] {
            let a = DyadicSequence::geometric(j, 2, 2.0).unwrap();
            let x = a.max();
            let sp = space(x, (x * 8.0) as usize);
            let v = packel_reflection(&a, &sp).unwrap();
            let m = sp.m;
            for s in 0..(2 * m as u64) {
                for t in (0..(2 * m as u64)).step_by(3) {
                    let lhs = v(s + t);
                    let rhs = left_shift_matrix(m, s) * v(t) + v(s) * right_shift_matrix(m, t);
                    assert_eq!(lhs, rhs, "J={j:?} s={s} t={t}");
                }
                assert!(operator_norm(&v(s)) <= 1.0 + 1e-12);
            }
        }
    }

    #[test]
    fn zminus_reflection_vanishes_after_twice_a0() {
        let a = DyadicSequence::geometric(IndexSet::Zminus, 3, 2.0).unwrap();
        let sp = space(1.0, 8);
        let v = packel_reflection(&a, &sp).unwrap();
        assert_eq!(v(0), ComplexMatrix::zeros(8, 8));
        for j in 16..24 {
            assert_eq!(v(j), ComplexMatrix::zeros(8, 8));
        }
    }

    #[test]
    fn nilpotent_compression() {
        let n = packel_nilpotent_default(3).unwrap();
        assert_eq!(n.dim(), 16);
        assert_eq!(n.eval(2.0).unwrap(), ComplexMatrix::zeros(16, 16));
        assert_eq!(n.law_residual(0.375, 0.625).unwrap(), 0.0);
    }

    #[test]
    fn oracle_facts_hold() {
        for k in 2..=5 {
            let a = DyadicSequence::geometric(IndexSet::Zminus, k, 2.0).unwrap();
            let o = nilpotent_lower_bound_oracle(&a, 1.0, 2f64.powi(-(k as i32))).unwrap();
            assert!(o.verified, "{o:?}");
            assert!((o.bound - ((k + 1) as f64).sqrt() / 2.0).abs() < 1e-15);
        }
    }

    #[test]
    fn window_errors() {
        assert!(DyadicSequence::new(IndexSet::Zminus, -1, vec![0.5, 0.9]).is_err());
        let a = DyadicSequence::geometric(IndexSet::Zplus, 2, 2.0).unwrap();
        assert!(packel_semigroup(&a, &space(2.0, 8)).is_err());
    }
}
