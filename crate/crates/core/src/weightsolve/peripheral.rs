//! Exact repair of weights for operators with unimodular eigenvalues.
//!
//! For a power-bounded `T` every unimodular eigenvalue is semisimple. Write
//! `V = [V_u, V_s]` with `V_u` the unimodular eigenvectors and `V_s` a basis of
//! the complementary invariant subspace, so that `V⁻¹TV = diag(D, S)` with `D`
//! diagonal and `r(S) < 1`. If `T*PT ⪯ P` and `Tv = μv` with `|μ| = 1`, the
//! quadratic form of `T*PT - P` vanishes at `v`, hence `T*Pv = μ̄Pv`. So `Pv`
//! is a left eigenvector, and `V*PV` is block diagonal: eigenvectors of one
//! eigenvalue may couple with each other and with nothing else.
//!
//! A near-feasible `P` is therefore repaired by keeping only those blocks of
//! `V*PV` and adding a multiple of the Stein solution on the `S` block. The
//! plain penalty iteration on `P` approaches such weights only sublinearly,
//! because the constraint cannot hold strictly. [`PeripheralSplit::search`]
//! instead iterates on the blocks `M` of `P = V⁻*MV⁻¹` directly. There the
//! unimodular part is satisfied identically, and the remaining constraints
//! (the Stein inequality for `S` and the box on `P`) have interior.

use std::ops::Range;

use num_complex::Complex64;

use crate::opcore::equations::solve_stein;
use crate::opcore::linalg::{
    herm, herm_eig, herm_eigenvalues, inner, inverse, lambda_max, norm2, spectral_map,
    ComplexMatrix,
};
use crate::opcore::spectral::eigenvalues;

/// Distance from the unit circle below which an eigenvalue counts as unimodular.
const CIRCLE_BAND: f64 = 1e-6;

/// Splitting of `C^n` into unimodular eigenspaces and a stable invariant subspace.
pub struct PeripheralSplit {
    v: ComplexMatrix,
    /// `V⁻¹`.
    g: ComplexMatrix,
    /// Index ranges (in the columns of `V`) of each unimodular eigenvalue.
    clusters: Vec<Range<usize>>,
    stable: Range<usize>,
    s: ComplexMatrix,
    /// `X - S*XS = I` on the stable block.
    x: ComplexMatrix,
}

/// Orthonormal basis of the `k`-dimensional near-kernel of `m`, if it is a genuine kernel.
fn null_space(m: &ComplexMatrix, k: usize, tol: f64) -> Option<ComplexMatrix> {
    let n = m.nrows();
    let svd = m.clone().svd(false, true);
    let vt = svd.v_t?;
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| svd.singular_values[a].total_cmp(&svd.singular_values[b]));
    if order.iter().take(k).any(|&i| svd.singular_values[i] > tol) {
        return None;
    }
    Some(ComplexMatrix::from_fn(n, k, |r, c| {
        vt[(order[c], r)].conj()
    }))
}

impl PeripheralSplit {
    /// Builds the splitting; `None` when `T` has no unimodular eigenvalue,
    /// one outside the closed disc, or a defective one on the circle.
    pub fn new(t: &ComplexMatrix) -> Option<Self> {
        let n = t.nrows();
        let scale = norm2(t).max(1.0);
        let eig = eigenvalues(t).ok()?;
        if eig.iter().any(|z| z.norm() > 1.0 + CIRCLE_BAND) {
            return None;
        }
        let mut groups: Vec<(Complex64, usize)> = Vec::new();
        for z in eig.iter().filter(|z| z.norm() >= 1.0 - CIRCLE_BAND) {
            match groups
                .iter_mut()
                .find(|(c, _)| (c - z).norm() <= CIRCLE_BAND)
            {
                Some(g) => g.1 += 1,
                None => groups.push((*z, 1)),
            }
        }
        if groups.is_empty() {
            return None;
        }
        let kernel_tol = 1e-7 * scale;
        let eye = ComplexMatrix::identity(n, n);
        let mut right = Vec::new();
        let mut left = Vec::new();
        let mut clusters = Vec::new();
        let mut at = 0;
        for &(mu, k) in &groups {
            right.push(null_space(&(t - &eye * mu), k, kernel_tol)?);
            left.push(null_space(
                &(t.adjoint() - &eye * mu.conj()),
                k,
                kernel_tol,
            )?);
            clusters.push(at..at + k);
            at += k;
        }
        let nu = at;
        let w = ComplexMatrix::from_columns(
            &left
                .iter()
                .flat_map(|b| b.column_iter().map(|c| c.into_owned()).collect::<Vec<_>>())
                .collect::<Vec<_>>(),
        );
        // Orthonormal complement of the left eigenvectors spans the stable subspace.
        let proj = &eye - &w * inverse(&(w.adjoint() * &w)).ok()? * w.adjoint();
        let (vals, vecs) = herm_eig(&proj);
        let keep: Vec<usize> = (0..n).filter(|&i| vals[i] > 0.5).collect();
        if keep.len() != n - nu {
            return None;
        }
        let mut cols: Vec<_> = right
            .iter()
            .flat_map(|b| b.column_iter().map(|c| c.into_owned()).collect::<Vec<_>>())
            .collect();
        cols.extend(keep.iter().map(|&i| vecs.column(i).into_owned()));
        let v = ComplexMatrix::from_columns(&cols);
        let g = inverse(&v).ok()?;
        if norm2(&v) * norm2(&g) > 1e8 {
            return None;
        }
        let b = &g * t * &v;
        let stable = nu..n;
        let coupling = b.view((0, nu), (nu, n - nu)).norm() + b.view((nu, 0), (n - nu, nu)).norm();
        if coupling > kernel_tol {
            return None;
        }
        let s = b.view((nu, nu), (n - nu, n - nu)).into_owned();
        let x = if n > nu {
            let x = herm(&solve_stein(&s, &ComplexMatrix::identity(n - nu, n - nu)).ok()?);
            let (xv, _) = herm_eig(&x);
            if !(xv[0] >= 0.999) || !(xv[n - nu - 1] <= 1e14) {
                return None;
            }
            x
        } else {
            ComplexMatrix::zeros(0, 0)
        };
        Some(Self {
            v,
            g,
            clusters,
            stable,
            s,
            x,
        })
    }

    /// Keeps the admissible blocks of `m`.
    fn compress(&self, m: &ComplexMatrix) -> ComplexMatrix {
        let n = m.nrows();
        let mut out = ComplexMatrix::zeros(n, n);
        for r in self.clusters.iter().chain(std::iter::once(&self.stable)) {
            let (o, k) = (r.start, r.len());
            out.view_mut((o, o), (k, k))
                .copy_from(&m.view((o, o), (k, k)));
        }
        herm(&out)
    }

    /// Adds the Stein correction that makes the stable block feasible.
    fn fix_stable(&self, m: &mut ComplexMatrix) {
        let r = self.stable.clone();
        if r.is_empty() {
            return;
        }
        let ms = m.view((r.start, r.start), (r.len(), r.len())).into_owned();
        let res = lambda_max(&(self.s.adjoint() * &ms * &self.s - &ms));
        if res > 0.0 {
            let fixed = ms + &self.x * Complex64::new(res, 0.0);
            m.view_mut((r.start, r.start), (r.len(), r.len()))
                .copy_from(&fixed);
        }
    }

    /// Feasible weight from blocks `m`, with its `κ` (infinite if not positive definite).
    fn candidate(&self, m: &ComplexMatrix) -> (ComplexMatrix, f64) {
        let mut m = m.clone();
        self.fix_stable(&mut m);
        let p = self.assemble(&m);
        let ev = herm_eigenvalues(&p);
        let (lo, hi) = (ev[0], ev[ev.len() - 1]);
        let kappa = if lo > 0.0 {
            (hi / lo).sqrt()
        } else {
            f64::INFINITY
        };
        (p, kappa)
    }

    /// Accelerated gradient on the block parametrisation at fixed `κ`.
    ///
    /// Returns the best exactly feasible weight found (possibly at a larger
    /// `κ`) and the number of iterations used.
    pub fn search(
        &self,
        kappa: f64,
        warm: Option<&ComplexMatrix>,
        max_iter: usize,
        slack: f64,
        stall_window: usize,
    ) -> (ComplexMatrix, usize) {
        let k2 = kappa * kappa;
        let gram = self.v.adjoint() * &self.v;
        let start = warm.map_or(gram, |w| self.v.adjoint() * w * &self.v);
        let mut m = self.compress(&start);
        let lip = (norm2(&self.s).powi(2) + 1.0).powi(2) + 2.0 * norm2(&self.g).powi(4);
        let step = Complex64::new(1.0 / lip, 0.0);
        let r = self.stable.clone();

        let gradient = |y: &ComplexMatrix| -> ComplexMatrix {
            let a = self.assemble(y);
            let (vals, vecs) = herm_eig(&a);
            let outside = spectral_map(&vals, &vecs, |l| {
                if l < 1.0 {
                    l - 1.0
                } else if l > k2 {
                    l - k2
                } else {
                    0.0
                }
            });
            let mut g = self.compress(&(&self.g * outside * self.g.adjoint()));
            if !r.is_empty() {
                let ys = y.view((r.start, r.start), (r.len(), r.len())).into_owned();
                let d = herm(&(self.s.adjoint() * &ys * &self.s - &ys));
                let (dv, dw) = herm_eig(&d);
                let pos = spectral_map(&dv, &dw, |l| l.max(0.0));
                let gs = &self.s * &pos * self.s.adjoint() - pos;
                let mut block = g.view_mut((r.start, r.start), (r.len(), r.len()));
                block += gs;
            }
            g
        };

        let (mut best_p, mut best_kappa) = self.candidate(&m);
        let mut y = m.clone();
        let mut theta = 1.0f64;
        let mut last_improve = 0;
        let mut it = 0;
        while it < max_iter && best_kappa > kappa * (1.0 + slack) {
            it += 1;
            let g = gradient(&y);
            let m_new = herm(&(&y - &g * step));
            if inner(&g, &(&m_new - &m)) > 0.0 {
                theta = 1.0;
                y = m_new.clone();
            } else {
                let theta_new = 0.5 * (1.0 + (1.0 + 4.0 * theta * theta).sqrt());
                y = &m_new + (&m_new - &m) * Complex64::new((theta - 1.0) / theta_new, 0.0);
                theta = theta_new;
            }
            m = m_new;
            if it % 10 == 0 {
                let (p, k) = self.candidate(&m);
                if k < best_kappa * (1.0 - 1e-6) {
                    last_improve = it;
                }
                if k < best_kappa {
                    best_p = p;
                    best_kappa = k;
                }
                if it - last_improve > stall_window {
                    break;
                }
            }
        }
        (best_p, it)
    }

    /// `V⁻* M V⁻¹`.
    fn assemble(&self, m: &ComplexMatrix) -> ComplexMatrix {
        herm(&(self.g.adjoint() * m * &self.g))
    }

    /// An exactly feasible weight: identity on the unimodular part, the Stein solution on the rest.
    pub fn series_weight(&self) -> ComplexMatrix {
        let n = self.v.nrows();
        let mut m = ComplexMatrix::identity(n, n);
        let r = self.stable.clone();
        m.view_mut((r.start, r.start), (r.len(), r.len()))
            .copy_from(&self.x);
        self.assemble(&m)
    }

    /// Projects `p` onto the block structure and restores the stable block by the Stein correction.
    pub fn repair(&self, p: &ComplexMatrix) -> ComplexMatrix {
        let mut m = self.compress(&(self.v.adjoint() * p * &self.v));
        self.fix_stable(&mut m);
        self.assemble(&m)
    }
}
