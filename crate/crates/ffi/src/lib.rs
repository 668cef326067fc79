//! C ABI for the similarity-constant solvers.
//!
//! Matrices and verdicts cross the boundary as opaque handles that the caller
//! releases with the matching `*_free` function. Every entry point returns an
//! [`SgStatus`]; on failure a description is available from
//! [`sg_last_error_message`] on the same thread. Panics never unwind into C:
//! they are caught and reported as [`SgStatus::Panic`].
//!
//! Matrix data is row-major. Imaginary parts are optional everywhere.

use std::cell::RefCell;
use std::ffi::{c_char, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use num_complex::Complex64;
use simgroup::opcore::linalg::ComplexMatrix;
use simgroup::weightsolve::{
    discrete_similarity_constant, joint_similarity_constant, quasi_similarity_constant,
    SimilarityVerdict, SolverOptions, VerdictStatus,
};
use simgroup::SimError;

/// Result codes of every entry point.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SgStatus {
    Ok = 0,
    /// A required pointer argument was null.
    NullPointer = 1,
    /// Malformed arguments: bad dimension, non-finite entries, index out of range.
    InvalidArgument = 2,
    /// The requested quantity is not available (for example a weight of an unbounded verdict).
    Unavailable = 3,
    /// A numerical kernel failed (non-convergence, near-singular data, saturation).
    Numerical = 4,
    /// A precondition of the computation does not hold.
    Precondition = 5,
    /// An internal panic was caught at the boundary.
    Panic = 6,
}

/// Outcome class of a similarity verdict.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SgVerdictStatus {
    Finite = 0,
    /// No weight was found up to `kappa_max`.
    Infeasible = 1,
    /// Spectral obstruction: no similarity constant exists.
    Unbounded = 2,
}

/// Solver tolerances; obtain defaults from [`sg_options_default`].
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SgOptions {
    pub feas_tol: f64,
    pub rel_tol: f64,
    pub kappa_max: f64,
    pub max_iter: usize,
    pub kappa_slack: f64,
}

/// Opaque square complex matrix.
pub struct SgMatrix {
    inner: ComplexMatrix,
}

/// Opaque similarity verdict.
pub struct SgVerdict {
    inner: SimilarityVerdict,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: impl Into<String>) {
    let text = msg.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(text).ok());
}

fn status_for(e: &SimError) -> SgStatus {
    match e {
        SimError::Precondition(_) | SimError::NotContraction(_) => SgStatus::Precondition,
        SimError::Convergence(_)
        | SimError::Saturation(_)
        | SimError::NearSingular(_)
        | SimError::InvalidWeight { .. } => SgStatus::Numerical,
        _ => SgStatus::InvalidArgument,
    }
}

/// Runs `f`, converting errors and panics into status codes.
fn guard(f: impl FnOnce() -> Result<(), (SgStatus, String)>) -> SgStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => SgStatus::Ok,
        Ok(Err((status, msg))) => {
            set_error(msg);
            status
        }
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".into());
            set_error(format!("internal panic: {msg}"));
            SgStatus::Panic
        }
    }
}

fn lib_err(e: SimError) -> (SgStatus, String) {
    (status_for(&e), e.to_string())
}

fn null_err(what: &str) -> (SgStatus, String) {
    (SgStatus::NullPointer, format!("{what} is null"))
}

impl SgOptions {
    fn to_solver(self) -> Result<SolverOptions, (SgStatus, String)> {
        let positive = [
            self.feas_tol,
            self.rel_tol,
            self.kappa_max,
            self.kappa_slack,
        ]
        .iter()
        .all(|&x| x > 0.0 && x.is_finite());
        if !positive || self.max_iter == 0 {
            return Err((
                SgStatus::InvalidArgument,
                "solver options must be positive and finite".into(),
            ));
        }
        Ok(SolverOptions {
            feas_tol: self.feas_tol,
            rel_tol: self.rel_tol,
            kappa_max: self.kappa_max,
            max_iter: self.max_iter,
            kappa_slack: self.kappa_slack,
        })
    }
}

/// Default solver options.
#[no_mangle]
pub extern "C" fn sg_options_default() -> SgOptions {
    let d = SolverOptions::default();
    SgOptions {
        feas_tol: d.feas_tol,
        rel_tol: d.rel_tol,
        kappa_max: d.kappa_max,
        max_iter: d.max_iter,
        kappa_slack: d.kappa_slack,
    }
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn sg_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Message of the last failed call on this thread, or null if there was none.
///
/// The pointer stays valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn sg_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// Creates an `n×n` matrix from row-major real and (optional) imaginary parts.
///
/// # Safety
/// `re` must point to `n*n` readable doubles; `im` is null or points to `n*n`
/// readable doubles; `out` must be a valid pointer to writable storage.
#[no_mangle]
pub unsafe extern "C" fn sg_matrix_new(
    n: usize,
    re: *const f64,
    im: *const f64,
    out: *mut *mut SgMatrix,
) -> SgStatus {
    guard(|| {
        if out.is_null() {
            return Err(null_err("out"));
        }
        if re.is_null() {
            return Err(null_err("re"));
        }
        if n == 0 {
            return Err((
                SgStatus::InvalidArgument,
                "dimension must be positive".into(),
            ));
        }
        let len = n
            .checked_mul(n)
            .ok_or((SgStatus::InvalidArgument, "dimension overflows".to_string()))?;
        // SAFETY: the caller guarantees `len` readable doubles behind `re` (and `im` when non-null).
        let re = unsafe { std::slice::from_raw_parts(re, len) };
        let im = if im.is_null() {
            None
        } else {
            Some(unsafe { std::slice::from_raw_parts(im, len) })
        };
        let m = ComplexMatrix::from_fn(n, n, |i, j| {
            Complex64::new(re[i * n + j], im.map_or(0.0, |v| v[i * n + j]))
        });
        simgroup::opcore::linalg::validate(&m).map_err(lib_err)?;
        // SAFETY: `out` was checked to be non-null.
        unsafe { *out = Box::into_raw(Box::new(SgMatrix { inner: m })) };
        Ok(())
    })
}

/// Releases a matrix; null is ignored.
///
/// # Safety
/// `m` must be null or a handle from this library that was not freed yet.
#[no_mangle]
pub unsafe extern "C" fn sg_matrix_free(m: *mut SgMatrix) {
    if !m.is_null() {
        // SAFETY: the handle came from `Box::into_raw` and is freed once.
        drop(unsafe { Box::from_raw(m) });
    }
}

/// Dimension of a matrix, 0 for null.
///
/// # Safety
/// `m` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn sg_matrix_dim(m: *const SgMatrix) -> usize {
    // SAFETY: the caller passes null or a live handle.
    unsafe { m.as_ref() }.map_or(0, |m| m.inner.nrows())
}

/// Reads entry `(i, j)`; either output pointer may be null.
///
/// # Safety
/// `m` must be a live handle; `re` and `im` are null or writable.
#[no_mangle]
pub unsafe extern "C" fn sg_matrix_get(
    m: *const SgMatrix,
    i: usize,
    j: usize,
    re: *mut f64,
    im: *mut f64,
) -> SgStatus {
    guard(|| {
        // SAFETY: the caller passes null or a live handle.
        let m = unsafe { m.as_ref() }.ok_or_else(|| null_err("matrix"))?;
        let n = m.inner.nrows();
        if i >= n || j >= n {
            return Err((
                SgStatus::InvalidArgument,
                format!("index ({i}, {j}) outside a {n}x{n} matrix"),
            ));
        }
        let z = m.inner[(i, j)];
        // SAFETY: non-null output pointers are writable by contract.
        unsafe {
            if let Some(r) = re.as_mut() {
                *r = z.re;
            }
            if let Some(x) = im.as_mut() {
                *x = z.im;
            }
        }
        Ok(())
    })
}

/// Shared body of the three constant entry points.
unsafe fn compute(
    m: *const SgMatrix,
    opts: *const SgOptions,
    out: *mut *mut SgVerdict,
    solve: impl FnOnce(&ComplexMatrix, &SolverOptions) -> simgroup::Result<SimilarityVerdict>,
) -> SgStatus {
    guard(|| {
        if out.is_null() {
            return Err(null_err("out"));
        }
        // SAFETY: the caller passes null or live pointers.
        let m = unsafe { m.as_ref() }.ok_or_else(|| null_err("matrix"))?;
        let opts = match unsafe { opts.as_ref() } {
            Some(o) => o.to_solver()?,
            None => SolverOptions::default(),
        };
        let v = solve(&m.inner, &opts).map_err(lib_err)?;
        // SAFETY: `out` was checked to be non-null.
        unsafe { *out = Box::into_raw(Box::new(SgVerdict { inner: v })) };
        Ok(())
    })
}

/// Similarity constant `C(T)` of a single operator.
///
/// `opts` may be null for defaults. An unbounded or infeasible outcome is a
/// successful call; inspect it with [`sg_verdict_status`].
///
/// # Safety
/// `t` must be a live handle, `opts` null or valid, `out` writable.
#[no_mangle]
pub unsafe extern "C" fn sg_discrete_constant(
    t: *const SgMatrix,
    opts: *const SgOptions,
    out: *mut *mut SgVerdict,
) -> SgStatus {
    unsafe { compute(t, opts, out, discrete_similarity_constant) }
}

/// Joint constant of the semigroup generated by `a`.
///
/// # Safety
/// As for [`sg_discrete_constant`].
#[no_mangle]
pub unsafe extern "C" fn sg_joint_constant(
    a: *const SgMatrix,
    opts: *const SgOptions,
    out: *mut *mut SgVerdict,
) -> SgStatus {
    unsafe { compute(a, opts, out, joint_similarity_constant) }
}

/// Constant of the rescaled semigroup `e^{-shift·t} e^{tA}`.
///
/// # Safety
/// As for [`sg_discrete_constant`].
#[no_mangle]
pub unsafe extern "C" fn sg_quasi_constant(
    a: *const SgMatrix,
    shift: f64,
    opts: *const SgOptions,
    out: *mut *mut SgVerdict,
) -> SgStatus {
    unsafe { compute(a, opts, out, |a, o| quasi_similarity_constant(a, shift, o)) }
}

/// Releases a verdict; null is ignored.
///
/// # Safety
/// `v` must be null or a handle from this library that was not freed yet.
#[no_mangle]
pub unsafe extern "C" fn sg_verdict_free(v: *mut SgVerdict) {
    if !v.is_null() {
        // SAFETY: the handle came from `Box::into_raw` and is freed once.
        drop(unsafe { Box::from_raw(v) });
    }
}

/// Outcome class; null handles read as `Infeasible`.
///
/// # Safety
/// `v` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn sg_verdict_status(v: *const SgVerdict) -> SgVerdictStatus {
    // SAFETY: the caller passes null or a live handle.
    match unsafe { v.as_ref() }.map(|v| v.inner.status) {
        Some(VerdictStatus::Finite) => SgVerdictStatus::Finite,
        Some(VerdictStatus::Unbounded) => SgVerdictStatus::Unbounded,
        Some(VerdictStatus::Infeasible) | None => SgVerdictStatus::Infeasible,
    }
}

/// The constant (`+inf` unless finite); NaN for a null handle.
///
/// # Safety
/// `v` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn sg_verdict_constant(v: *const SgVerdict) -> f64 {
    // SAFETY: the caller passes null or a live handle.
    unsafe { v.as_ref() }.map_or(f64::NAN, |v| v.inner.constant)
}

/// Certified lower bound; NaN for a null handle.
///
/// # Safety
/// `v` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn sg_verdict_lower_bound(v: *const SgVerdict) -> f64 {
    // SAFETY: the caller passes null or a live handle.
    unsafe { v.as_ref() }.map_or(f64::NAN, |v| v.inner.lower_bound)
}

/// Worst constraint violation of the certificate; NaN when there is none.
///
/// # Safety
/// `v` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn sg_verdict_residual(v: *const SgVerdict) -> f64 {
    // SAFETY: the caller passes null or a live handle.
    unsafe { v.as_ref() }.map_or(f64::NAN, |v| v.inner.residual())
}

/// Copies the certificate weight `P` (normalised to `λmin(P) = 1`) into a new matrix.
///
/// Returns [`SgStatus::Unavailable`] when the verdict carries no certificate.
///
/// # Safety
/// `v` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn sg_verdict_weight(
    v: *const SgVerdict,
    out: *mut *mut SgMatrix,
) -> SgStatus {
    guard(|| {
        if out.is_null() {
            return Err(null_err("out"));
        }
        // SAFETY: the caller passes null or a live handle.
        let v = unsafe { v.as_ref() }.ok_or_else(|| null_err("verdict"))?;
        let cert = v.inner.certificate.as_ref().ok_or((
            SgStatus::Unavailable,
            "verdict has no certificate".to_string(),
        ))?;
        // SAFETY: `out` was checked to be non-null.
        unsafe {
            *out = Box::into_raw(Box::new(SgMatrix {
                inner: cert.p.clone(),
            }))
        };
        Ok(())
    })
}
