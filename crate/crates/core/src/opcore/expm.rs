//! Matrix exponential by scaling and squaring with a degree-13 Padé approximant.

use nalgebra::DMatrix;

use super::linalg::Scalar;
use crate::error::{Result, SimError};

const PADE13: [f64; 14] = [
    64_764_752_532_480_000.0,
    32_382_376_266_240_000.0,
    7_771_770_303_897_600.0,
    1_187_353_796_428_800.0,
    129_060_195_264_000.0,
    10_559_470_521_600.0,
    670_442_572_800.0,
    33_522_128_640.0,
    1_323_241_920.0,
    40_840_800.0,
    960_960.0,
    16_380.0,
    182.0,
    1.0,
];

/// Largest 1-norm for which the unscaled degree-13 approximant is accurate to unit roundoff.
const THETA13: f64 = 5.371_920_351_148_152;

fn norm1<F: Scalar>(a: &DMatrix<F>) -> f64 {
    (0..a.ncols())
        .map(|j| a.column(j).iter().map(|x| x.modulus()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// `e^A` for a square matrix.
pub fn expm<F: Scalar>(a: &DMatrix<F>) -> Result<DMatrix<F>> {
    let n = a.nrows();
    let eye = DMatrix::<F>::identity(n, n);
    let nrm = norm1(a);
    if !nrm.is_finite() {
        return Err(SimError::Saturation(nrm));
    }
    if nrm == 0.0 {
        return Ok(eye);
    }
    let s = if nrm > THETA13 {
        (nrm / THETA13).log2().ceil().max(0.0) as i32
    } else {
        0
    };
    let a = a * F::from_real(2f64.powi(-s));
    let b = |k: usize| F::from_real(PADE13[k]);

    let a2 = &a * &a;
    let a4 = &a2 * &a2;
    let a6 = &a4 * &a2;
    let u_inner = &a6 * (&a6 * b(13) + &a4 * b(11) + &a2 * b(9))
        + &a6 * b(7)
        + &a4 * b(5)
        + &a2 * b(3)
        + &eye * b(1);
    let u = &a * u_inner;
    let v = &a6 * (&a6 * b(12) + &a4 * b(10) + &a2 * b(8))
        + &a6 * b(6)
        + &a4 * b(4)
        + &a2 * b(2)
        + &eye * b(0);

    let p = &v + &u;
    let q = &v - &u;
    let mut r = q
        .lu()
        .solve(&p)
        .ok_or_else(|| SimError::NearSingular("Pade denominator".into()))?;
    for _ in 0..s {
        r = &r * &r;
    }
    if r.iter().any(|x| !x.modulus().is_finite()) {
        return Err(SimError::Saturation(nrm));
    }
    Ok(r)
}

/// `e^{tA}` for `t >= 0`.
pub fn expm_semigroup<F: Scalar>(a: &DMatrix<F>, t: f64) -> Result<DMatrix<F>> {
    if !(t >= 0.0) || !t.is_finite() {
        return Err(SimError::Domain(format!(
            "time must be finite and non-negative, got {t}"
        )));
    }
    expm(&(a * F::from_real(t))).map_err(|e| match e {
        SimError::Saturation(_) => SimError::Saturation(t * norm1(a)),
        other => other,
    })
}
