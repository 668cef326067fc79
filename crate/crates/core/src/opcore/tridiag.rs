//! Selected eigenpairs of Hermitian matrices through tridiagonal reduction.
//!
//! The reduction `M = Q T Q*` is a fraction of the cost of a full
//! eigendecomposition. Eigenvalues of the real tridiagonal `T` are located by
//! Sturm-count bisection, and only the requested eigenvectors are formed, by
//! inverse iteration on `T` followed by multiplication with `Q`. This pays off
//! when a spectral update touches few eigenvalues, as the clipping steps of
//! the weight solvers usually do.

use std::ops::Range;

use nalgebra::{DMatrix, SymmetricTridiagonal};

use super::linalg::{herm, Scalar};

/// Orthogonal reduction of a Hermitian matrix to real tridiagonal form.
pub struct HermitianTridiagonal<F: Scalar> {
    q: DMatrix<F>,
    diag: Vec<f64>,
    off: Vec<f64>,
    /// Gershgorin enclosure of the spectrum.
    bounds: (f64, f64),
    /// Largest absolute entry of `T`; sets the scale of all tolerances.
    scale: f64,
    pivmin: f64,
}

/// `T - λI` factored by Gaussian elimination with partial pivoting.
struct ShiftedLu {
    d: Vec<f64>,
    dl: Vec<f64>,
    du: Vec<f64>,
    du2: Vec<f64>,
    swapped: Vec<bool>,
}

impl ShiftedLu {
    fn new(diag: &[f64], off: &[f64], lambda: f64, tiny: f64) -> Self {
        let n = diag.len();
        let mut d: Vec<f64> = diag.iter().map(|&a| a - lambda).collect();
        let mut dl = off.to_vec();
        let mut du = off.to_vec();
        let mut du2 = vec![0.0; n.saturating_sub(2)];
        let mut swapped = vec![false; n.saturating_sub(1)];
        let guard = |x: f64| if x.abs() < tiny { tiny.copysign(x) } else { x };
        for i in 0..n.saturating_sub(1) {
            if d[i].abs() >= dl[i].abs() {
                d[i] = guard(d[i]);
                let fact = dl[i] / d[i];
                dl[i] = fact;
                d[i + 1] -= fact * du[i];
            } else {
                let fact = d[i] / dl[i];
                d[i] = dl[i];
                dl[i] = fact;
                let temp = du[i];
                du[i] = d[i + 1];
                d[i + 1] = temp - fact * d[i + 1];
                if i + 2 < n {
                    du2[i] = du[i + 1];
                    du[i + 1] *= -fact;
                }
                swapped[i] = true;
            }
        }
        d[n - 1] = guard(d[n - 1]);
        Self {
            d,
            dl,
            du,
            du2,
            swapped,
        }
    }

    fn solve(&self, b: &mut [f64]) {
        let n = b.len();
        for i in 0..n - 1 {
            if self.swapped[i] {
                let t = b[i];
                b[i] = b[i + 1];
                b[i + 1] = t - self.dl[i] * b[i];
            } else {
                b[i + 1] -= self.dl[i] * b[i];
            }
        }
        b[n - 1] /= self.d[n - 1];
        if n > 1 {
            b[n - 2] = (b[n - 2] - self.du[n - 2] * b[n - 1]) / self.d[n - 2];
        }
        for i in (0..n.saturating_sub(2)).rev() {
            b[i] = (b[i] - self.du[i] * b[i + 1] - self.du2[i] * b[i + 2]) / self.d[i];
        }
    }
}

fn normalize(v: &mut [f64]) {
    let nrm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    if nrm > 0.0 {
        v.iter_mut().for_each(|x| *x /= nrm);
    }
}

impl<F: Scalar> HermitianTridiagonal<F> {
    /// Reduces the Hermitian part of `m`.
    pub fn new(m: &DMatrix<F>) -> Self {
        let (q, diag, off) = SymmetricTridiagonal::new(herm(m)).unpack();
        let diag: Vec<f64> = diag.iter().copied().collect();
        let off: Vec<f64> = off.iter().copied().collect();
        let n = diag.len();
        let mut bounds = (f64::INFINITY, f64::NEG_INFINITY);
        for i in 0..n {
            let r = if i > 0 { off[i - 1].abs() } else { 0.0 }
                + if i + 1 < n { off[i].abs() } else { 0.0 };
            bounds = (bounds.0.min(diag[i] - r), bounds.1.max(diag[i] + r));
        }
        let scale = diag
            .iter()
            .chain(off.iter())
            .fold(0.0f64, |a, &x| a.max(x.abs()));
        let pivmin = f64::MIN_POSITIVE * off.iter().fold(1.0f64, |a, &b| a.max(b * b));
        Self {
            q,
            diag,
            off,
            bounds,
            scale,
            pivmin,
        }
    }

    pub fn dim(&self) -> usize {
        self.diag.len()
    }

    /// Number of eigenvalues strictly below `x`.
    pub fn count_below(&self, x: f64) -> usize {
        let mut count = 0;
        let mut q = 1.0;
        for i in 0..self.diag.len() {
            let coupling = if i == 0 {
                0.0
            } else {
                self.off[i - 1] * self.off[i - 1] / q
            };
            q = self.diag[i] - x - coupling;
            if q.abs() < self.pivmin {
                q = -self.pivmin;
            }
            if q < 0.0 {
                count += 1;
            }
        }
        count
    }

    /// The `k`-th smallest eigenvalue (from zero), to working precision.
    pub fn eigenvalue(&self, k: usize) -> f64 {
        self.bisect(k, 0.0)
    }

    /// Bisection for the `k`-th eigenvalue down to absolute width `width` (or working precision).
    fn bisect(&self, k: usize, width: f64) -> f64 {
        let (mut lo, mut hi) = self.bounds;
        let pad = f64::EPSILON * self.scale.max(f64::MIN_POSITIVE) * 4.0;
        lo -= pad;
        hi += pad;
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if hi - lo <= width.max(2.0 * f64::EPSILON * lo.abs().max(hi.abs()) + self.pivmin)
                || mid <= lo
                || mid >= hi
            {
                break;
            }
            if self.count_below(mid) > k {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        0.5 * (lo + hi)
    }

    /// `v* T v` for a unit vector `v`.
    fn rayleigh(&self, v: &[f64]) -> f64 {
        let n = v.len();
        let mut acc = 0.0;
        for i in 0..n {
            acc += self.diag[i] * v[i] * v[i];
            if i + 1 < n {
                acc += 2.0 * self.off[i] * v[i] * v[i + 1];
            }
        }
        acc
    }

    /// Eigenvalues and orthonormal eigenvectors (as columns) for the index range `ks`.
    ///
    /// Shifts are bisected to a modest width; the returned eigenvalues are the
    /// Rayleigh quotients of the converged vectors, accurate to working precision.
    pub fn eigenpairs(&self, ks: Range<usize>) -> (Vec<f64>, DMatrix<F>) {
        let n = self.dim();
        let shift_width = 1e-7 * self.scale;
        let shifts: Vec<f64> = ks.clone().map(|k| self.bisect(k, shift_width)).collect();
        let mut vals = Vec::with_capacity(shifts.len());
        let cluster_gap = 1e-3 * self.scale;
        let tiny = f64::EPSILON * self.scale.max(f64::MIN_POSITIVE);
        let mut z = DMatrix::<f64>::zeros(n, shifts.len());
        let mut cluster_start = 0;
        for (j, &lambda) in shifts.iter().enumerate() {
            if j > 0 && lambda - shifts[j - 1] > cluster_gap {
                cluster_start = j;
            }
            let lu = ShiftedLu::new(&self.diag, &self.off, lambda, tiny);
            let seed = (ks.start + j) as f64;
            let mut v: Vec<f64> = (0..n)
                .map(|i| 1.0 + 0.5 * ((i as f64 + 1.0) * (seed + 1.0) * 0.618_033_988_75).sin())
                .collect();
            normalize(&mut v);
            for _ in 0..4 {
                lu.solve(&mut v);
                for c in cluster_start..j {
                    let col = z.column(c);
                    let dot: f64 = col.iter().zip(&v).map(|(a, b)| a * b).sum();
                    v.iter_mut()
                        .zip(col.iter())
                        .for_each(|(x, a)| *x -= dot * a);
                }
                normalize(&mut v);
            }
            vals.push(self.rayleigh(&v));
            z.column_mut(j).copy_from_slice(&v);
        }
        let vecs = &self.q * z.map(|x| F::from_real(x));
        (vals, vecs)
    }
}
