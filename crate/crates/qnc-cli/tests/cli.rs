//! End-to-end checks of the binary: exit codes, output schemas, and
//! byte-level determinism.

use std::path::Path;
use std::process::{Command, Output};

fn qnc_bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_qnc"))
}

fn run(args: &[&str]) -> Output {
    qnc_bin().args(args).output().expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

#[test]
fn qnc_value_matches_known_digits() {
    let out = run(&["qnc", "2", "3"]);
    assert!(out.status.success());
    let text = stdout(&out);
    assert!(
        text.contains("2.20481984"),
        "expected the pairing value, got: {text}"
    );
    assert!(text.contains("closed_form_bound"));
}

#[test]
fn qnc_equal_arguments_prints_zero() {
    let out = run(&["qnc", "5", "5"]);
    assert!(out.status.success());
    assert!(stdout(&out).contains("= 0.0"));
}

#[test]
fn qnc_matches_doubled_precision_oracle() {
    // same-process oracle at doubled precision
    let oracle = qnc::qnc_primes(2, 5, 384).unwrap();
    let out = run(&["--precision", "192", "qnc", "2", "5"]);
    assert!(out.status.success());
    let text = stdout(&out);
    let value_line = text.lines().next().unwrap();
    let value_str = value_line.split("= ").nth(1).unwrap();
    let value: f64 = {
        let hp = qnc::HighPrecisionReal::parse_decimal(value_str, 192).unwrap();
        hp.to_f64()
    };
    let rel = ((value - oracle.to_f64()) / oracle.to_f64()).abs();
    assert!(rel < 1e-15, "CLI value {value} vs oracle {}", oracle.to_f64());
}

#[test]
fn qnc_domain_error_exits_2() {
    let out = run(&["qnc", "1", "3"]);
    assert_eq!(out.status.code(), Some(2));
    let out = run(&["qnc", "0.5", "3"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn matrix_writes_files_and_sidecar() {
    let dir = tempfile::tempdir().unwrap();
    let out_dir = dir.path().join("m");
    let out = run(&["--n", "2", "--out", out_dir.to_str().unwrap(), "matrix"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = std::fs::read_to_string(out_dir.join("matrix.csv")).unwrap();
    assert!(csv.starts_with("i,j,p_i,p_j,entry\n"));
    assert_eq!(csv.lines().count(), 5);
    let sidecar: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out_dir.join("matrix.json")).unwrap())
            .unwrap();
    assert_eq!(sidecar["n"], 2);
    assert_eq!(sidecar["variant"], "standard");
    let tail: f64 = sidecar["tail_bound"].as_str().unwrap().parse().unwrap();
    assert!(tail > 0.0);
}

#[test]
fn matrix_modified_reports_divergent_tail() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&[
        "--n",
        "3",
        "--variant",
        "modified",
        "--out",
        dir.path().to_str().unwrap(),
        "matrix",
    ]);
    assert!(out.status.success());
    assert!(stdout(&out).contains("tail: divergent"));
    let sidecar: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("matrix.json")).unwrap())
            .unwrap();
    assert_eq!(sidecar["tail_bound"], "divergent");
}

#[test]
fn matrix_cap_violation_exits_2_and_env_overrides() {
    let dir = tempfile::tempdir().unwrap();
    let out = qnc_bin()
        .args(["--n", "4", "--out", dir.path().to_str().unwrap(), "matrix"])
        .env("QNC_MAX_N", "3")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    let out = qnc_bin()
        .args(["--n", "4", "--out", dir.path().to_str().unwrap(), "matrix"])
        .env("QNC_MAX_N", "4")
        .output()
        .unwrap();
    assert!(out.status.success());
}

#[test]
fn spectrum_small_dims() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&["--n", "2", "--out", dir.path().to_str().unwrap(), "spectrum"]);
    assert!(out.status.success());
    let csv = std::fs::read_to_string(dir.path().join("spectrum.csv")).unwrap();
    let lams: Vec<f64> = csv
        .lines()
        .skip(1)
        .map(|l| l.split(',').nth(1).unwrap().parse().unwrap())
        .collect();
    assert_eq!(lams.len(), 2);
    for l in &lams {
        assert!((l - 0.00220482).abs() < 1e-8);
    }

    let dir1 = tempfile::tempdir().unwrap();
    let out = run(&["--n", "1", "--out", dir1.path().to_str().unwrap(), "spectrum"]);
    assert!(out.status.success());
    let csv = std::fs::read_to_string(dir1.path().join("spectrum.csv")).unwrap();
    assert_eq!(csv.trim().lines().last().unwrap(), "1,0e0");
}

#[test]
fn spectrum_det_grid_matches_lu_oracle() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&[
        "--n",
        "8",
        "--out",
        dir.path().to_str().unwrap(),
        "spectrum",
        "--det-grid",
        "0:10:3",
    ]);
    assert!(out.status.success());
    let csv = std::fs::read_to_string(dir.path().join("det_grid.csv")).unwrap();
    // oracle: dense LU determinant of I - wR on the downcast matrix
    let m = qnc::build_matrix(8, &qnc::Variant::Standard, 192).unwrap();
    let a = qnc::spectral::downcast_complex(&m);
    for line in csv.lines().skip(1) {
        let f: Vec<f64> = line.split(',').map(|v| v.parse().unwrap()).collect();
        let w = num_complex::Complex64::new(f[0], f[1]);
        let lu = (nalgebra::DMatrix::identity(8, 8) - a.clone() * w)
            .lu()
            .determinant();
        let rel = (num_complex::Complex64::new(f[2], f[3]) - lu).norm() / lu.norm();
        assert!(rel < 1e-10, "grid point {w}: rel {rel:e}");
    }
}

#[test]
fn compare_crossover_and_schema() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&["--n", "25", "--out", dir.path().to_str().unwrap(), "compare"]);
    assert!(out.status.success());
    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("report.json")).unwrap())
            .unwrap();
    assert_eq!(report["crossover_k"], 1);
    assert_eq!(report["n"], 25);
    assert_eq!(report["zeros_used"], 100);
    assert!(report["trace_norm_bound"].as_f64().unwrap() > 0.0);
    assert_eq!(report["partial_sums"].as_array().unwrap().len(), 100);
}

#[test]
fn compare_missing_zeros_file_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&[
        "--n",
        "2",
        "--zeros",
        "/nonexistent/zeros.txt",
        "--out",
        dir.path().to_str().unwrap(),
        "compare",
    ]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn compare_rejects_modified_variant() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&[
        "--n",
        "2",
        "--variant",
        "modified",
        "--out",
        dir.path().to_str().unwrap(),
        "compare",
    ]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn identical_config_gives_byte_identical_outputs() {
    let (d1, d2) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    let args = |dir: &Path| {
        vec![
            "--n".to_string(),
            "6".to_string(),
            "--seed".to_string(),
            "9".to_string(),
            "--out".to_string(),
            dir.to_str().unwrap().to_string(),
        ]
    };
    let run_all = |dir: &Path| {
        let mut stdouts = Vec::new();
        for sub in [
            vec!["matrix"],
            vec!["spectrum", "--basis-check", "--det-grid", "0:50:4"],
            vec!["compare"],
        ] {
            let mut a = args(dir);
            a.extend(sub.iter().map(|s| s.to_string()));
            let out = qnc_bin().args(&a).output().unwrap();
            assert!(out.status.success());
            stdouts.push(out.stdout);
        }
        stdouts
    };
    let s1 = run_all(d1.path());
    let s2 = run_all(d2.path());
    // stdout mentions the out dir path; strip lines that embed it
    for (a, b) in s1.iter().zip(s2.iter()) {
        let clean = |bytes: &[u8]| {
            String::from_utf8_lossy(bytes)
                .lines()
                .filter(|l| !l.contains("wrote "))
                .collect::<Vec<_>>()
                .join("\n")
        };
        assert_eq!(clean(a), clean(b));
    }
    for file in ["matrix.csv", "matrix.json", "spectrum.csv", "det_grid.csv", "report.json"] {
        let b1 = std::fs::read(d1.path().join(file)).unwrap();
        let b2 = std::fs::read(d2.path().join(file)).unwrap();
        assert_eq!(b1, b2, "{file} differs between identical runs");
    }
}

#[test]
fn weighted_variant_via_character_file() {
    let dir = tempfile::tempdir().unwrap();
    let chi_path = dir.path().join("chi5.txt");
    std::fs::write(&chi_path, "modulus 5\n1 1 0\n2 -1 0\n3 -1 0\n4 1 0\n").unwrap();
    let out = run(&[
        "--n",
        "3",
        "--variant",
        "weighted",
        "--character",
        chi_path.to_str().unwrap(),
        "--out",
        dir.path().to_str().unwrap(),
        "matrix",
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = std::fs::read_to_string(dir.path().join("matrix.csv")).unwrap();
    assert!(csv.starts_with("i,j,p_i,p_j,re,im\n"));
    // weighted without a table is an input error
    let out = run(&["--n", "3", "--variant", "weighted", "matrix"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn json_format_is_valid_json_everywhere() {
    let dir = tempfile::tempdir().unwrap();
    for sub in [vec!["qnc", "2", "3"], vec!["matrix"], vec!["spectrum"], vec!["compare"]] {
        let mut args = vec![
            "--format".to_string(),
            "json".to_string(),
            "--n".to_string(),
            "3".to_string(),
            "--out".to_string(),
            dir.path().to_str().unwrap().to_string(),
        ];
        args.extend(sub.iter().map(|s| s.to_string()));
        let out = qnc_bin().args(&args).output().unwrap();
        assert!(out.status.success());
        let parsed: serde_json::Value = serde_json::from_slice(&out.stdout)
            .unwrap_or_else(|e| panic!("invalid JSON from {sub:?}: {e}"));
        assert!(parsed.is_object());
    }
}
