//! End-to-end runs of the `simgroup` binary: exit codes, report contents and
//! byte stability.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn configs() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs")
}

fn out_dir(name: &str) -> PathBuf {
    let dir = Path::new(env!("CARGO_TARGET_TMPDIR"))
        .join("cli")
        .join(name);
    let _ = std::fs::remove_dir_all(&dir);
    dir
}

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_simgroup"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn run_config(command: &str, config: &str, out: &Path, overrides: &[&str]) -> Output {
    let cfg = configs().join(config);
    let mut args = vec![
        command,
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
    ];
    args.extend_from_slice(overrides);
    run(&args)
}

fn json(path: &Path) -> serde_json::Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn constant_exit_codes_follow_the_verdict() {
    let out = out_dir("constant_finite");
    let o = run_config("constant", "constant_nilpotent.cfg", &out, &[]);
    assert_eq!(
        o.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&o.stderr)
    );
    let v = json(&out.join("constant.json"));
    assert_eq!(v["status"], "Finite");
    assert!((v["constant"].as_f64().unwrap() - 2.0).abs() < 1e-4);

    let out = out_dir("constant_unbounded");
    assert_eq!(
        run_config("constant", "constant_expanding.cfg", &out, &[])
            .status
            .code(),
        Some(3)
    );
    assert_eq!(json(&out.join("constant.json"))["constant"], "inf");

    let out = out_dir("constant_infeasible");
    assert_eq!(
        run_config(
            "constant",
            "constant_nilpotent.cfg",
            &out,
            &["kappa_max=1.5"]
        )
        .status
        .code(),
        Some(4)
    );
    assert_eq!(json(&out.join("constant.json"))["status"], "Infeasible");
}

#[test]
fn input_errors_exit_with_two() {
    let out = out_dir("errors");
    let missing = run(&[
        "constant",
        "--config",
        "/nonexistent/simgroup.cfg",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(missing.status.code(), Some(2));
    assert!(!missing.stderr.is_empty());
    assert_eq!(
        run_config(
            "constant",
            "constant_nilpotent.cfg",
            &out,
            &["mode=sideways"]
        )
        .status
        .code(),
        Some(2)
    );
    assert_eq!(
        run_config(
            "constant",
            "constant_nilpotent.cfg",
            &out,
            &["unknown_key=1"]
        )
        .status
        .code(),
        Some(2)
    );
    assert_eq!(
        run_config("gallery", "gallery_w.cfg", &out, &["kind=nonesuch"])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(run(&["frobnicate", "--config", "x"]).status.code(), Some(2));
    assert!(!out.join("constant.json").exists());
}

#[test]
fn unstable_infinite_horizon_is_a_precondition_failure() {
    let out = out_dir("observe_unstable");
    let skew = configs().join("data/skew_system.json");
    let o = run_config(
        "observe",
        "observe_scalar.cfg",
        &out,
        &[&format!("system={}", skew.display())],
    );
    assert_eq!(
        o.status.code(),
        Some(5),
        "{}",
        String::from_utf8_lossy(&o.stderr)
    );
}

#[test]
fn observe_recovers_the_scalar_gramian() {
    let out = out_dir("observe_scalar");
    assert_eq!(
        run_config("observe", "observe_scalar.cfg", &out, &[])
            .status
            .code(),
        Some(0)
    );
    let text = std::fs::read_to_string(out.join("observe.json")).unwrap();
    assert!(text.contains("1.0000000000000"), "{text}");
}

#[test]
fn reports_are_byte_stable() {
    for (command, cfg) in [
        ("constant", "constant_jordan.cfg"),
        ("naboko", "naboko_skew.cfg"),
        ("gallery", "gallery_bhat.cfg"),
    ] {
        let (a, b) = (
            out_dir(&format!("{command}_a")),
            out_dir(&format!("{command}_b")),
        );
        assert_eq!(run_config(command, cfg, &a, &[]).status.code(), Some(0));
        assert_eq!(run_config(command, cfg, &b, &[]).status.code(), Some(0));
        let mut names: Vec<_> = std::fs::read_dir(&a)
            .unwrap()
            .map(|e| e.unwrap().file_name())
            .collect();
        names.sort();
        assert!(!names.is_empty());
        for name in names {
            let (x, y) = (
                std::fs::read(a.join(&name)).unwrap(),
                std::fs::read(b.join(&name)).unwrap(),
            );
            assert_eq!(x, y, "{command}: {name:?} differs");
            assert!(!x.contains(&b'\r'));
        }
    }
}

#[test]
fn csv_curves_have_headers() {
    let out = out_dir("classify");
    assert_eq!(
        run_config("classify", "classify_dissipative.cfg", &out, &[])
            .status
            .code(),
        Some(0)
    );
    let t_curve = std::fs::read_to_string(out.join("t_curve.csv")).unwrap();
    assert!(
        t_curve.starts_with("parameter,constant,status,residual"),
        "{t_curve}"
    );
    assert!(t_curve.lines().count() > 2);
}
