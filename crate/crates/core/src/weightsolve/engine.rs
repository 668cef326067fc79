//! Box-constrained Stein feasibility engine.
//!
//! Given operators `T_i` and a bound `κ`, we look for a Hermitian `P` with
//! `I ⪯ P ⪯ κ²I` and `T_i* P T_i ⪯ P`. The search minimises the smooth convex
//! penalty `h(P) = ½ Σ ‖(T_i* P T_i - P)_+‖²_F` over the box by accelerated
//! projected gradient with adaptive restart. Projection onto the box is exact
//! (eigenvalue clipping after symmetrisation).
//!
//! Two devices keep the search short:
//!
//! * a Frank-Wolfe lower bound on `min h`, which proves infeasibility at `κ`
//!   once positive;
//! * a polishing step for a single operator with spectral radius below one:
//!   with `X - T*XT = I`, the weight `P + rX` is exactly feasible when `P` has
//!   residual `r`, at a small, computable cost in `κ`. When the spectrum
//!   touches the unit circle the repair of [`PeripheralSplit`] takes its place.

use nalgebra::DMatrix;

use super::peripheral::PeripheralSplit;
use crate::opcore::equations::solve_stein_generic;
use crate::opcore::linalg::{
    herm, herm_eig, herm_eigenvalues, inner, lambda_max, narrow, norm2, spectral_map, widen, Scalar,
};
use crate::opcore::tridiag::HermitianTridiagonal;

/// Below this size a full eigendecomposition is as cheap as a partial one.
const PARTIAL_MIN_DIM: usize = 24;

/// `V diag(w) V*` for the columns of `v`.
fn low_rank<F: Scalar>(v: &DMatrix<F>, w: &[f64]) -> DMatrix<F> {
    let mut scaled = v.clone();
    for (j, &x) in w.iter().enumerate() {
        scaled.column_mut(j).scale_mut(x);
    }
    scaled * v.adjoint()
}

/// Positive part of a Hermitian matrix and half its squared Frobenius norm.
///
/// Forms whichever of the positive or negative eigenvectors is the smaller set.
fn positive_part<F: Scalar>(d: &DMatrix<F>) -> Option<(f64, DMatrix<F>)> {
    let n = d.nrows();
    if n < PARTIAL_MIN_DIM {
        let (vals, vecs) = herm_eig(d);
        if vals[n - 1] <= 0.0 {
            return None;
        }
        let h = 0.5 * vals.iter().map(|&l| l.max(0.0).powi(2)).sum::<f64>();
        return Some((h, spectral_map(&vals, &vecs, |l| l.max(0.0))));
    }
    let tri = HermitianTridiagonal::new(d);
    let neg = tri.count_below(0.0);
    if neg == n {
        return None;
    }
    if n - neg <= neg {
        let (vals, vecs) = tri.eigenpairs(neg..n);
        let pos: Vec<f64> = vals.iter().map(|&l| l.max(0.0)).collect();
        let h = 0.5 * pos.iter().map(|l| l * l).sum::<f64>();
        Some((h, low_rank(&vecs, &pos)))
    } else {
        let (vals, vecs) = tri.eigenpairs(0..neg);
        let negs: Vec<f64> = vals.iter().map(|&l| l.min(0.0)).collect();
        let dh = herm(d);
        let h = 0.5 * (dh.norm_squared() - negs.iter().map(|l| l * l).sum::<f64>()).max(0.0);
        Some((h, dh - low_rank(&vecs, &negs)))
    }
}

/// Tuning knobs of the engine.
#[derive(Clone, Debug, PartialEq)]
pub struct EngineOptions {
    pub max_iter: usize,
    /// Residual tolerance (transformed constraint units) for unpolished certificates.
    pub tol: f64,
    /// Relative `κ` overshoot tolerated after polishing.
    pub kappa_slack: f64,
    /// Iterations without a 1% residual improvement before giving up.
    pub stall_window: usize,
}

impl Default for EngineOptions {
    fn default() -> Self {
        Self {
            max_iter: 5000,
            tol: 1e-8,
            kappa_slack: 1e-6,
            stall_window: 600,
        }
    }
}

/// Operators (already preconditioned) plus derived constants.
pub struct Problem<F: Scalar> {
    pub ops: Vec<DMatrix<F>>,
    lip: f64,
    /// Solution of `X - T*XT = I` for a single operator with `r(T) < 1`.
    polish: Option<(DMatrix<F>, f64)>,
    /// Structural repair for a single operator with unimodular eigenvalues.
    split: Option<PeripheralSplit>,
}

impl<F: Scalar> Problem<F> {
    pub fn new(ops: Vec<DMatrix<F>>) -> Self {
        let lip: f64 = ops.iter().map(|t| (norm2(t).powi(2) + 1.0).powi(2)).sum();
        let polish = if ops.len() == 1 {
            polish_matrix(&ops[0])
        } else {
            None
        };
        let split = if ops.len() == 1 && polish.is_none() {
            PeripheralSplit::new(&widen(&ops[0]))
        } else {
            None
        };
        Self {
            ops,
            lip: lip.max(1.0),
            polish,
            split,
        }
    }

    pub fn dim(&self) -> usize {
        self.ops[0].nrows()
    }

    /// `max_i λmax(T_i* P T_i - P)`.
    pub fn residual(&self, p: &DMatrix<F>) -> f64 {
        self.ops
            .iter()
            .map(|t| lambda_max(&(t.adjoint() * p * t - p)))
            .fold(f64::NEG_INFINITY, f64::max)
    }

    /// Exact certificate from the Stein series, when available.
    pub fn series_weight(&self) -> Option<DMatrix<F>> {
        match (&self.polish, &self.split) {
            (Some((x, _)), _) => Some(x.clone()),
            // For real operators the real part of a feasible weight is feasible.
            (None, Some(split)) => Some(herm(&narrow(&split.series_weight()))),
            (None, None) => None,
        }
    }

    /// Repairs a near-feasible weight; returns `None` when no repair is available.
    pub fn polish(&self, p: &DMatrix<F>, residual: f64) -> Option<DMatrix<F>> {
        if residual <= 0.0 {
            return Some(herm(p));
        }
        if let Some(split) = &self.split {
            return Some(herm(&narrow(&split.repair(&widen(p)))));
        }
        let (x, _) = self.polish.as_ref()?;
        Some(herm(&(p + x * F::from_real(residual))))
    }

    /// Increase of `λmax` caused by polishing with residual `r`.
    fn polish_cost(&self, residual: f64) -> Option<f64> {
        self.polish
            .as_ref()
            .map(|(_, xmax)| residual.max(0.0) * xmax)
    }

    /// `h(P)` and its gradient.
    fn penalty(&self, p: &DMatrix<F>) -> (f64, DMatrix<F>) {
        let n = self.dim();
        let mut grad = DMatrix::<F>::zeros(n, n);
        let mut h = 0.0;
        for t in &self.ops {
            let d = t.adjoint() * p * t - p;
            let Some((hd, e)) = positive_part(&d) else {
                continue;
            };
            h += hd;
            grad += t * &e * t.adjoint() - e;
        }
        (h, grad)
    }
}

fn polish_matrix<F: Scalar>(t: &DMatrix<F>) -> Option<(DMatrix<F>, f64)> {
    let n = t.nrows();
    let x = solve_stein_generic(t, &DMatrix::<F>::identity(n, n)).ok()?;
    let x = herm(&x);
    let (vals, _) = herm_eig(&x);
    let (lo, hi) = (vals[0], vals[n - 1]);
    // Reject near-marginal spectra: the series would be too ill-conditioned to help.
    if !(lo >= 0.999) || !hi.is_finite() || hi > 1e14 {
        return None;
    }
    Some((x, hi))
}

/// Projection onto `{I ⪯ P ⪯ κ²I}`.
///
/// Only the eigenpairs outside `[1, κ²]` are formed when they are few.
pub fn project_box<F: Scalar>(p: &DMatrix<F>, k2: f64) -> DMatrix<F> {
    let n = p.nrows();
    if n >= PARTIAL_MIN_DIM {
        let tri = HermitianTridiagonal::new(p);
        let below = tri.count_below(1.0);
        let upto = tri.count_below(k2);
        if below + (n - upto) <= n / 2 {
            let mut out = herm(p);
            for range in [0..below, upto..n] {
                if range.is_empty() {
                    continue;
                }
                let (vals, vecs) = tri.eigenpairs(range);
                let shift: Vec<f64> = vals.iter().map(|&l| l.clamp(1.0, k2) - l).collect();
                out += low_rank(&vecs, &shift);
            }
            return herm(&out);
        }
    }
    let (vals, vecs) = herm_eig(p);
    herm(&spectral_map(&vals, &vecs, |l| l.clamp(1.0, k2)))
}

#[derive(Clone, Debug)]
pub struct RunOutcome<F: Scalar> {
    /// Best weight found, repaired when possible; normalised so that `λmin = 1`.
    pub p: DMatrix<F>,
    /// `κ` of `p`.
    pub kappa: f64,
    /// Residual of `p` in transformed units.
    pub residual: f64,
    /// `p` satisfies the box at the requested `κ` (with slack) and the residual tolerance.
    pub feasible: bool,
    /// Frank-Wolfe bound proved that no weight exists at the requested `κ`.
    pub proven_infeasible: bool,
    pub iterations: usize,
}

fn normalized<F: Scalar>(p: &DMatrix<F>) -> (DMatrix<F>, f64) {
    let (vals, _) = herm_eig(p);
    let lo = vals[0];
    (
        herm(p) * F::from_real(1.0 / lo),
        (vals[vals.len() - 1] / lo).sqrt(),
    )
}

/// Packages a candidate weight: repair if possible, then decide feasibility at `kappa`.
fn finish<F: Scalar>(
    pb: &Problem<F>,
    p: &DMatrix<F>,
    raw_res: f64,
    kappa: f64,
    opts: &EngineOptions,
) -> (DMatrix<F>, f64, f64, bool) {
    if raw_res > 0.0 {
        if let Some(fixed) = pb.polish(p, raw_res) {
            let (q, kq) = normalized(&fixed);
            let rq = pb.residual(&q);
            if kq <= kappa * (1.0 + opts.kappa_slack) && rq <= opts.tol {
                return (q, kq, rq, true);
            }
            if raw_res > opts.tol {
                // Still a valid certificate, just at a larger κ.
                return (q, kq, rq, false);
            }
        }
    }
    let (q, kq) = normalized(p);
    let rq = pb.residual(&q);
    let ok = rq <= opts.tol && kq <= kappa * (1.0 + opts.kappa_slack);
    (q, kq, rq, ok)
}

/// One feasibility search at fixed `κ`.
pub fn run<F: Scalar>(
    pb: &Problem<F>,
    kappa: f64,
    warm: Option<&DMatrix<F>>,
    opts: &EngineOptions,
) -> RunOutcome<F> {
    if let Some(split) = &pb.split {
        let (p, it) = split.search(
            kappa,
            warm.map(widen).as_ref(),
            opts.max_iter,
            opts.kappa_slack,
            opts.stall_window,
        );
        let p = herm(&narrow(&p));
        let (q, kq, rq, ok) = finish(pb, &p, pb.residual(&p), kappa, opts);
        return RunOutcome {
            p: q,
            kappa: kq,
            residual: rq,
            feasible: ok,
            proven_infeasible: false,
            iterations: it,
        };
    }
    let n = pb.dim();
    let k2 = kappa * kappa;
    let step = F::from_real(1.0 / pb.lip);
    let mut p = match warm {
        Some(w) => project_box(w, k2),
        None => DMatrix::<F>::identity(n, n),
    };
    let mut y = p.clone();
    let mut theta = 1.0f64;

    let mut best_p = p.clone();
    let mut best_res = pb.residual(&p);
    let mut last_improve = 0usize;
    let mut proven = false;
    let mut it = 0usize;

    let done = |res: f64| -> bool {
        if res <= opts.tol {
            return true;
        }
        match pb.polish_cost(res) {
            Some(cost) => cost <= 2.0 * opts.kappa_slack * k2,
            None => false,
        }
    };

    if !done(best_res) {
        while it < opts.max_iter {
            it += 1;
            let (_, g) = pb.penalty(&y);
            let p_new = project_box(&(&y - &g * step), k2);
            let restart = inner(&g, &(&p_new - &p)) > 0.0;
            if restart {
                theta = 1.0;
                y = p_new.clone();
            } else {
                let theta_new = 0.5 * (1.0 + (1.0 + 4.0 * theta * theta).sqrt());
                let mom = F::from_real((theta - 1.0) / theta_new);
                y = &p_new + (&p_new - &p) * mom;
                theta = theta_new;
            }
            p = p_new;

            if it.is_multiple_of(5) {
                let res = pb.residual(&p);
                if res < best_res * 0.99 || (res < best_res && best_res <= 0.0) {
                    last_improve = it;
                }
                if res < best_res {
                    best_res = res;
                    best_p = p.clone();
                }
                if done(best_res) {
                    break;
                }
                if it - last_improve > opts.stall_window {
                    break;
                }
            }
            if it.is_multiple_of(50) && frank_wolfe_bound(pb, &p, k2) > 0.0 {
                proven = true;
                break;
            }
        }
    }

    let (q, kq, rq, ok) = finish(pb, &best_p, best_res, kappa, opts);
    RunOutcome {
        p: q,
        kappa: kq,
        residual: rq,
        feasible: ok,
        proven_infeasible: proven && !ok,
        iterations: it,
    }
}

/// Lower bound on `min_box h` from the linearisation at `p`; positive means infeasible.
fn frank_wolfe_bound<F: Scalar>(pb: &Problem<F>, p: &DMatrix<F>, k2: f64) -> f64 {
    let (h, g) = pb.penalty(p);
    if h <= 0.0 {
        return -1.0;
    }
    let gv = herm_eigenvalues(&g);
    let lin_min: f64 = gv.iter().map(|&x| if x < 0.0 { x * k2 } else { x }).sum();
    let gp = inner(&g, p);
    let bound = h - gp + lin_min;
    // Guard against cancellation: demand a margin relative to the terms involved.
    let scale = gp.abs() + lin_min.abs() + h;
    if bound > 1e-9 * scale {
        bound
    } else {
        -1.0
    }
}

/// Outcome of a `κ` minimisation.
#[derive(Clone, Debug)]
pub struct Minimized<F: Scalar> {
    pub best: Option<RunOutcome<F>>,
    /// Largest `κ` at which the search was attempted.
    pub searched_max: f64,
    /// Certified lower bound (input bound or proven infeasibility).
    pub lower: f64,
}

/// Bisection in `log κ` between a lower bound and `kappa_max`.
pub fn minimize_kappa<F: Scalar>(
    pb: &Problem<F>,
    lower: f64,
    kappa_max: f64,
    rel_tol: f64,
    opts: &EngineOptions,
) -> Minimized<F> {
    let n = pb.dim();
    let mut lo = lower.max(1.0);
    // `lo` steers the bisection; only proven infeasibility may raise `certified`.
    let mut certified = lo;
    let mut best: Option<RunOutcome<F>> = None;

    let eye = DMatrix::<F>::identity(n, n);
    let r_eye = pb.residual(&eye);
    if r_eye <= opts.tol {
        return Minimized {
            best: Some(RunOutcome {
                p: eye,
                kappa: 1.0,
                residual: r_eye,
                feasible: true,
                proven_infeasible: false,
                iterations: 0,
            }),
            searched_max: 1.0,
            lower: 1.0,
        };
    }

    let consider = |cand: RunOutcome<F>, best: &mut Option<RunOutcome<F>>| {
        let valid = cand.residual <= opts.tol;
        if valid && best.as_ref().is_none_or(|b| cand.kappa < b.kappa) {
            *best = Some(cand);
        }
    };

    if let Some(x) = pb.series_weight() {
        let (q, kq) = normalized(&x);
        let rq = pb.residual(&q);
        consider(
            RunOutcome {
                p: q,
                kappa: kq,
                residual: rq,
                feasible: true,
                proven_infeasible: false,
                iterations: 0,
            },
            &mut best,
        );
    }
    let mut searched_max = best.as_ref().map_or(lo, |b| b.kappa);
    if best.as_ref().is_none_or(|b| b.kappa > kappa_max) {
        let out = run(pb, kappa_max, None, opts);
        searched_max = kappa_max;
        if out.proven_infeasible {
            lo = lo.max(kappa_max);
            certified = lo;
        }
        let proven = out.proven_infeasible;
        consider(out, &mut best);
        // A huge box converges slowly when the spectrum touches the boundary;
        // smaller targets often succeed where the largest one stalls.
        let mut kappa = lo * 4.0;
        while best.is_none() && !proven && kappa < kappa_max {
            let out = run(pb, kappa, None, opts);
            if out.proven_infeasible {
                certified = certified.max(kappa);
                lo = lo.max(kappa);
            }
            consider(out, &mut best);
            kappa *= 4.0;
        }
    }
    let Some(mut hi) = best.as_ref().map(|b| b.kappa) else {
        return Minimized {
            best: None,
            searched_max,
            lower: certified,
        };
    };
    if lo > hi {
        lo = hi;
    }

    while hi / lo > 1.0 + rel_tol {
        let mid = (lo * hi).sqrt();
        let warm = best.as_ref().map(|b| b.p.clone());
        let out = run(pb, mid, warm.as_ref(), opts);
        let feasible = out.feasible;
        if out.proven_infeasible {
            certified = certified.max(mid);
        }
        consider(out, &mut best);
        let new_hi = best.as_ref().map_or(hi, |b| b.kappa);
        if feasible {
            hi = new_hi.min(mid * (1.0 + opts.kappa_slack));
        } else {
            lo = mid;
            hi = new_hi;
        }
        if hi < lo {
            lo = hi;
        }
    }
    let certified = best.as_ref().map_or(certified, |b| certified.min(b.kappa));
    Minimized {
        best,
        searched_max,
        lower: certified,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn nil(c: f64) -> DMatrix<f64> {
        DMatrix::from_row_slice(2, 2, &[0.0, c, 0.0, 0.0])
    }

    #[test]
    fn contraction_needs_no_search() {
        let pb = Problem::new(vec![DMatrix::from_row_slice(2, 2, &[0.5, 0.1, 0.0, 0.3])]);
        let m = minimize_kappa(&pb, 1.0, 1e6, 1e-4, &EngineOptions::default());
        assert_eq!(m.best.unwrap().kappa, 1.0);
    }

    #[test]
    fn nilpotent_constant_is_its_norm() {
        let pb = Problem::new(vec![nil(2.0)]);
        let m = minimize_kappa(&pb, 2.0, 1e6, 1e-5, &EngineOptions::default());
        let b = m.best.unwrap();
        assert!((b.kappa - 2.0).abs() < 1e-4, "kappa = {}", b.kappa);
        assert!(b.residual <= 1e-8);
    }

    #[test]
    fn infeasibility_is_proven_well_below_threshold() {
        let pb = Problem::new(vec![nil(4.0)]);
        let out = run(&pb, 1.5, None, &EngineOptions::default());
        assert!(!out.feasible);
        assert!(out.proven_infeasible);
    }

    #[test]
    fn box_projection_clips() {
        let p = DMatrix::from_row_slice(2, 2, &[0.5, 0.0, 0.0, 9.0]);
        let q = project_box(&p, 4.0);
        assert!((q[(0, 0)] - 1.0).abs() < 1e-15 && (q[(1, 1)] - 4.0).abs() < 1e-15);
    }
}
