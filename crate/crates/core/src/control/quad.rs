//! Globally adaptive 7/15-point Gauss-Kronrod quadrature for matrix-valued integrands.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::error::{Result, SimError};
use crate::opcore::linalg::ComplexMatrix;

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_728,
];
/// Gauss weights of the embedded 7-point rule, at the odd Kronrod nodes.
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

struct Piece {
    lo: f64,
    hi: f64,
    value: ComplexMatrix,
    error: f64,
}

impl PartialEq for Piece {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}
impl Eq for Piece {}
impl PartialOrd for Piece {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Piece {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error)
    }
}

fn rule(f: &mut impl FnMut(f64) -> Result<ComplexMatrix>, lo: f64, hi: f64) -> Result<Piece> {
    let c = 0.5 * (lo + hi);
    let h = 0.5 * (hi - lo);
    let fc = f(c)?;
    let r = |w: f64| num_complex::Complex64::new(w, 0.0);
    let mut kron = &fc * r(WGK[7]);
    let mut gauss = &fc * r(WG[3]);
    for j in 0..7 {
        let x = h * XGK[j];
        let sum = f(c - x)? + f(c + x)?;
        kron += &sum * r(WGK[j]);
        if j % 2 == 1 {
            gauss += &sum * r(WG[j / 2]);
        }
    }
    let error = (&kron - &gauss).norm() * h;
    Ok(Piece {
        lo,
        hi,
        value: kron * r(h),
        error,
    })
}

/// Integral of `f` over `[lo, hi]`, split first at `breaks`.
///
/// Bisects the piece with the largest error estimate until the total estimate
/// is below `tol · max(1, ‖I‖_F)` or `max_pieces` is reached; the latter fails.
pub fn integrate(
    mut f: impl FnMut(f64) -> Result<ComplexMatrix>,
    lo: f64,
    hi: f64,
    breaks: &[f64],
    tol: f64,
    max_pieces: usize,
) -> Result<(ComplexMatrix, f64)> {
    let mut cuts: Vec<f64> = std::iter::once(lo)
        .chain(breaks.iter().copied().filter(|&b| b > lo && b < hi))
        .chain(std::iter::once(hi))
        .collect();
    cuts.sort_by(f64::total_cmp);
    cuts.dedup();
    let mut heap = BinaryHeap::new();
    for w in cuts.windows(2) {
        heap.push(rule(&mut f, w[0], w[1])?);
    }
    let mut total = heap
        .iter()
        .fold(None::<ComplexMatrix>, |acc, p| {
            Some(acc.map_or_else(|| p.value.clone(), |a| a + &p.value))
        })
        .expect("non-empty");
    let mut err: f64 = heap.iter().map(|p| p.error).sum();
    loop {
        if err <= tol * total.norm().max(1.0) {
            // Resum once to shed the drift of the running totals.
            let total = heap
                .iter()
                .fold(None::<ComplexMatrix>, |acc, p| {
                    Some(acc.map_or_else(|| p.value.clone(), |a| a + &p.value))
                })
                .expect("non-empty");
            return Ok((total, heap.iter().map(|p| p.error).sum()));
        }
        if heap.len() >= max_pieces {
            return Err(SimError::Convergence(format!(
                "quadrature unresolved after {max_pieces} pieces (error {err:.3e})"
            )));
        }
        let worst = heap.pop().expect("non-empty");
        let mid = 0.5 * (worst.lo + worst.hi);
        let (left, right) = (rule(&mut f, worst.lo, mid)?, rule(&mut f, mid, worst.hi)?);
        total += &left.value + &right.value - &worst.value;
        err += left.error + right.error - worst.error;
        heap.push(left);
        heap.push(right);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_complex::Complex64;

    fn scalar(v: f64) -> ComplexMatrix {
        ComplexMatrix::from_element(1, 1, Complex64::new(v, 0.0))
    }

    #[test]
    fn polynomial_and_peak() {
        let (v, _) = integrate(|x| Ok(scalar(x.powi(6))), -1.0, 2.0, &[], 1e-13, 10).unwrap();
        assert!((v[(0, 0)].re - (128.0 + 1.0) / 7.0).abs() < 1e-12);
        let eps = 1e-3;
        let (v, _) = integrate(
            |x| Ok(scalar(eps / (eps * eps + x * x))),
            -50.0,
            50.0,
            &[0.0],
            1e-10,
            2000,
        )
        .unwrap();
        let exact = 2.0 * (50.0 / eps).atan();
        assert!((v[(0, 0)].re - exact).abs() < 1e-8);
        assert!(integrate(
            |x| Ok(scalar(1.0 / x.abs().sqrt())),
            -1.0,
            1.0,
            &[],
            1e-14,
            8
        )
        .is_err());
    }
}
