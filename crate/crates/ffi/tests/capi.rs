//! Exercises the C ABI from Rust and, when a C compiler is present, from C.

use std::ffi::CStr;
use std::path::{Path, PathBuf};
use std::process::Command;
use std::ptr;

use simgroup_ffi::*;

fn matrix(n: usize, re: &[f64], im: Option<&[f64]>) -> *mut SgMatrix {
    let mut out = ptr::null_mut();
    let status = unsafe {
        sg_matrix_new(
            n,
            re.as_ptr(),
            im.map_or(ptr::null(), |v| v.as_ptr()),
            &mut out,
        )
    };
    assert_eq!(status, SgStatus::Ok);
    assert!(!out.is_null());
    out
}

fn last_error() -> String {
    let p = sg_last_error_message();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

#[test]
fn nilpotent_constant_round_trip() {
    let t = matrix(2, &[0.0, 2.0, 0.0, 0.0], None);
    let opts = sg_options_default();
    let mut v = ptr::null_mut();
    assert_eq!(
        unsafe { sg_discrete_constant(t, &opts, &mut v) },
        SgStatus::Ok
    );
    assert_eq!(unsafe { sg_verdict_status(v) }, SgVerdictStatus::Finite);
    let c = unsafe { sg_verdict_constant(v) };
    assert!((c - 2.0).abs() < 1e-4, "constant {c}");
    assert!(unsafe { sg_verdict_lower_bound(v) } <= c + 1e-9);
    assert!(unsafe { sg_verdict_residual(v) } < 1e-6);

    let mut w = ptr::null_mut();
    assert_eq!(unsafe { sg_verdict_weight(v, &mut w) }, SgStatus::Ok);
    assert_eq!(unsafe { sg_matrix_dim(w) }, 2);
    let (mut re, mut im) = (0.0, 0.0);
    assert_eq!(
        unsafe { sg_matrix_get(w, 0, 0, &mut re, &mut im) },
        SgStatus::Ok
    );
    assert!(re >= 1.0 - 1e-9 && im.abs() < 1e-12);
    assert_eq!(
        unsafe { sg_matrix_get(w, 2, 0, &mut re, ptr::null_mut()) },
        SgStatus::InvalidArgument
    );

    unsafe {
        sg_matrix_free(w);
        sg_verdict_free(v);
        sg_matrix_free(t);
    }
}

#[test]
fn unbounded_generator_has_no_weight() {
    let a = matrix(2, &[0.0, 1.0, 0.0, 0.0], None);
    let mut v = ptr::null_mut();
    assert_eq!(
        unsafe { sg_joint_constant(a, ptr::null(), &mut v) },
        SgStatus::Ok
    );
    assert_eq!(unsafe { sg_verdict_status(v) }, SgVerdictStatus::Unbounded);
    assert!(unsafe { sg_verdict_constant(v) }.is_infinite());
    let mut w = ptr::null_mut();
    assert_eq!(
        unsafe { sg_verdict_weight(v, &mut w) },
        SgStatus::Unavailable
    );
    assert!(w.is_null());
    unsafe {
        sg_verdict_free(v);
        sg_matrix_free(a);
    }
}

#[test]
fn quasi_shift_rescues_growth() {
    let a = matrix(2, &[0.5, 1.0, 0.0, 0.5], Some(&[0.0; 4]));
    let mut v = ptr::null_mut();
    assert_eq!(
        unsafe { sg_quasi_constant(a, 1.0, ptr::null(), &mut v) },
        SgStatus::Ok
    );
    assert_eq!(unsafe { sg_verdict_status(v) }, SgVerdictStatus::Finite);
    assert!(unsafe { sg_verdict_constant(v) } >= 1.0);
    unsafe {
        sg_verdict_free(v);
        sg_matrix_free(a);
    }
}

#[test]
fn bad_arguments_report_status_and_message() {
    let re = [1.0, f64::NAN, 0.0, 1.0];
    let mut out = ptr::null_mut();
    assert_eq!(
        unsafe { sg_matrix_new(2, re.as_ptr(), ptr::null(), &mut out) },
        SgStatus::InvalidArgument
    );
    assert!(out.is_null());
    assert!(!last_error().is_empty());

    assert_eq!(
        unsafe { sg_matrix_new(2, ptr::null(), ptr::null(), &mut out) },
        SgStatus::NullPointer
    );
    assert!(last_error().contains("re"));
    assert_eq!(
        unsafe { sg_matrix_new(2, re.as_ptr(), ptr::null(), ptr::null_mut()) },
        SgStatus::NullPointer
    );

    let mut v = ptr::null_mut();
    assert_eq!(
        unsafe { sg_discrete_constant(ptr::null(), ptr::null(), &mut v) },
        SgStatus::NullPointer
    );

    let t = matrix(1, &[0.5], None);
    let mut opts = sg_options_default();
    opts.kappa_max = -1.0;
    assert_eq!(
        unsafe { sg_discrete_constant(t, &opts, &mut v) },
        SgStatus::InvalidArgument
    );
    assert!(v.is_null());
    unsafe { sg_matrix_free(t) };
}

#[test]
fn null_handles_are_harmless() {
    unsafe {
        sg_matrix_free(ptr::null_mut());
        sg_verdict_free(ptr::null_mut());
        assert_eq!(sg_matrix_dim(ptr::null()), 0);
        assert!(sg_verdict_constant(ptr::null()).is_nan());
        assert_eq!(sg_verdict_status(ptr::null()), SgVerdictStatus::Infeasible);
    }
    let version = unsafe { CStr::from_ptr(sg_version()) }.to_str().unwrap();
    assert_eq!(version, env!("CARGO_PKG_VERSION"));
}

fn header() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("include")
        .join("simgroup.h")
}

#[test]
fn header_declares_every_entry_point() {
    let text = std::fs::read_to_string(header()).expect("build script writes the header");
    for name in [
        "sg_options_default",
        "sg_version",
        "sg_last_error_message",
        "sg_matrix_new",
        "sg_matrix_free",
        "sg_matrix_dim",
        "sg_matrix_get",
        "sg_discrete_constant",
        "sg_joint_constant",
        "sg_quasi_constant",
        "sg_verdict_free",
        "sg_verdict_status",
        "sg_verdict_constant",
        "sg_verdict_lower_bound",
        "sg_verdict_residual",
        "sg_verdict_weight",
        "typedef struct SgMatrix SgMatrix;",
        "typedef struct SgVerdict SgVerdict;",
    ] {
        assert!(text.contains(name), "header lacks {name}");
    }
}

/// Directory holding the shared library, building it if the test run did not.
///
/// Integration tests only link the rlib, so the cdylib may be missing.
fn library_dir() -> Option<PathBuf> {
    let exe = std::env::current_exe().ok()?;
    let profile = exe.parent()?.parent()?.to_path_buf();
    let lib = profile.join("libsimgroup_ffi.so");
    if !lib.exists() {
        let cargo = std::env::var_os("CARGO")?;
        let mut cmd = Command::new(cargo);
        cmd.args(["build", "-p", "simgroup-ffi", "--lib"]);
        if profile.file_name()? == "release" {
            cmd.arg("--release");
        }
        cmd.status().ok()?;
    }
    lib.exists().then_some(profile)
}

#[test]
fn c_program_links_and_runs() {
    let Some(lib) = library_dir() else {
        eprintln!("skipping: shared library not found next to the test binary");
        return;
    };
    if Command::new("cc").arg("--version").output().is_err() {
        eprintln!("skipping: no C compiler");
        return;
    }
    let src = Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("tests")
        .join("c")
        .join("smoke.c");
    let exe = Path::new(env!("CARGO_TARGET_TMPDIR")).join("sg_smoke");
    let status = Command::new("cc")
        .args(["-std=c99", "-Wall", "-Werror", "-o"])
        .arg(&exe)
        .arg(&src)
        .arg("-I")
        .arg(header().parent().unwrap())
        .arg("-L")
        .arg(&lib)
        .arg(format!("-Wl,-rpath,{}", lib.display()))
        .args(["-lsimgroup_ffi", "-lm"])
        .status()
        .expect("cc runs");
    assert!(status.success(), "C compile failed");
    let out = Command::new(&exe).output().expect("smoke binary runs");
    assert!(
        out.status.success(),
        "smoke exited with {:?}",
        out.status.code()
    );
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.starts_with(env!("CARGO_PKG_VERSION")), "{stdout}");
}
