//! End-to-end runs of the `gmud-sim` binary.

use std::path::Path;

use assert_cmd::Command;
use serde_json::Value;

const H: &str = "2 0 0 0 0 0 1 0";

fn gmud_sim() -> Command {
    let mut cmd = Command::cargo_bin("gmud-sim").unwrap();
    cmd.env_remove("GMUD_SEED");
    cmd
}

fn decompose(r: &str) -> assert_cmd::assert::Assert {
    gmud_sim()
        .args(["decompose", "--matrix", H, "--r", r, "--theta1", "0", "--theta2", "0"])
        .assert()
}

fn json_stdout(a: &assert_cmd::assert::Assert) -> Value {
    serde_json::from_slice(&a.get_output().stdout).unwrap()
}

fn entry(v: &Value, name: &str, i: usize, j: usize) -> (f64, f64) {
    let z = &v[name][i][j];
    (z[0].as_f64().unwrap(), z[1].as_f64().unwrap())
}

#[test]
fn decompose_equal_diagonal_case() {
    let a = decompose("1.4142135").success();
    let v = json_stdout(&a);
    assert!((entry(&v, "R", 0, 0).0 - std::f64::consts::SQRT_2).abs() < 1e-5);
    assert!((entry(&v, "R", 1, 1).0 - std::f64::consts::SQRT_2).abs() < 1e-5);
    assert!(v["residual"].as_f64().unwrap() < 1e-10);
    assert!(v["cone_angle"].as_f64().unwrap() > 0.0);
}

#[test]
fn decompose_rejects_r_outside_interval() {
    let a = decompose("5").failure();
    let err = String::from_utf8_lossy(&a.get_output().stderr).to_string();
    assert!(err.contains("[1, 2]"), "stderr: {err}");
}

#[test]
fn decompose_svd_boundary() {
    let v = json_stdout(&decompose("2").success());
    let (q00, q10) = (entry(&v, "Q", 0, 0), entry(&v, "Q", 1, 0));
    assert!(((q00.0.powi(2) + q00.1.powi(2)).sqrt() - 1.0).abs() < 1e-12);
    assert!(q10.0.abs() < 1e-12 && q10.1.abs() < 1e-12);
    assert!(v["cone_angle"].as_f64().unwrap().abs() < 1e-7);
}

#[test]
fn decompose_from_file() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("h.txt");
    std::fs::write(&p, "1 1\n0 2\n-1 0\n3 -1\n").unwrap();
    let a = gmud_sim()
        .args(["decompose", "--matrix-file", p.to_str().unwrap(), "--r", "2.5"])
        .assert()
        .success();
    assert!(json_stdout(&a)["residual"].as_f64().unwrap() < 1e-10);
}

#[test]
fn bad_matrix_fails_with_message() {
    let a = gmud_sim()
        .args(["decompose", "--matrix", "1 2 3", "--r", "1"])
        .assert()
        .failure();
    let err = String::from_utf8_lossy(&a.get_output().stderr).to_string();
    assert!(err.starts_with("error:"), "stderr: {err}");
}

fn sweep(dir: &Path, name: &str, extra: &[&str]) -> (String, assert_cmd::assert::Assert) {
    let out = dir.join(name);
    let mut args = vec![
        "sweep", "--scheme", "gmud", "--mod", "qpsk", "--realizations", "8", "--symbols", "20",
        "--out", out.to_str().unwrap(),
    ];
    args.extend_from_slice(extra);
    let a = gmud_sim().args(&args).assert().success();
    (std::fs::read_to_string(out).unwrap(), a)
}

#[test]
fn sweep_is_deterministic_and_writes_sidecars() {
    let dir = tempfile::tempdir().unwrap();
    let snr = ["--snr", "0:2:20", "--seed", "7"];
    let (a, _) = sweep(dir.path(), "a.csv", &snr);
    let (b, _) = sweep(dir.path(), "b.csv", &snr);
    assert_eq!(a, b);
    let mut lines = a.lines();
    assert_eq!(lines.next(), Some("scheme,modulation,feedback_bits,snr_db,ber,bits,errors"));
    assert_eq!(lines.count(), 11);
    assert!(a.lines().nth(1).unwrap().starts_with("gmud,qpsk,perfect,0,"));
    let svg = std::fs::read_to_string(dir.path().join("a.svg")).unwrap();
    assert!(svg.contains("<svg") && svg.contains("<polyline"));
    let manifest: Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("a.manifest.json")).unwrap())
            .unwrap();
    assert_eq!(manifest["seed"], 7);
    assert!(!dir.path().join("a.dat").exists());
}

#[test]
fn single_snr_point() {
    let dir = tempfile::tempdir().unwrap();
    let (csv, _) = sweep(dir.path(), "one.csv", &["--snr", "10:0:10", "--dat"]);
    assert_eq!(csv.lines().count(), 2);
    assert!(dir.path().join("one.dat").exists());
}

#[test]
fn seed_flag_overrides_environment() {
    let dir = tempfile::tempdir().unwrap();
    let (flag, _) = sweep(dir.path(), "flag.csv", &["--snr", "0:5:10", "--seed", "3"]);
    let run_env = |name: &str, extra: &[&str]| {
        let out = dir.path().join(name);
        let mut args = vec![
            "sweep", "--scheme", "gmud", "--mod", "qpsk", "--realizations", "8", "--symbols", "20",
            "--snr", "0:5:10", "--out", out.to_str().unwrap(),
        ];
        args.extend_from_slice(extra);
        Command::cargo_bin("gmud-sim")
            .unwrap()
            .env("GMUD_SEED", "3")
            .args(&args)
            .assert()
            .success();
        std::fs::read_to_string(out).unwrap()
    };
    assert_eq!(run_env("env.csv", &[]), flag);
    assert_ne!(run_env("both.csv", &["--seed", "4"]), flag);
}

#[test]
fn compare_with_perfect_and_quantized_has_six_curves() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("cmp.csv");
    gmud_sim()
        .args([
            "--threads", "2", "compare", "--feedback", "4", "--feedback", "perfect", "--snr",
            "10:10:20", "--realizations", "6", "--symbols", "10", "--out",
            out.to_str().unwrap(),
        ])
        .assert()
        .success();
    let csv = std::fs::read_to_string(&out).unwrap();
    let mut curves: Vec<(String, String)> = csv
        .lines()
        .skip(1)
        .map(|l| {
            let f: Vec<&str> = l.split(',').collect();
            (f[0].to_string(), f[2].to_string())
        })
        .collect();
    curves.dedup();
    assert_eq!(curves.len(), 6);
    assert!(curves.contains(&("reg-inv-sel".into(), "48".into())));
    assert!(curves.contains(&("gmud".into(), "perfect".into())));
}

#[test]
fn replay_reproduces_csv() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("r.csv");
    gmud_sim()
        .args([
            "compare", "--feedback", "2", "--snr", "0:15:30", "--realizations", "5", "--symbols",
            "8", "--seed", "11", "--out", out.to_str().unwrap(),
        ])
        .assert()
        .success();
    let manifest = dir.path().join("r.manifest.json");
    let a = gmud_sim()
        .args(["--threads", "1", "replay", "--check", "--manifest", manifest.to_str().unwrap()])
        .assert()
        .success();
    assert!(String::from_utf8_lossy(&a.get_output().stdout).starts_with("identical"));
    let copy = dir.path().join("copy.csv");
    gmud_sim()
        .args([
            "replay", "--manifest", manifest.to_str().unwrap(), "--out", copy.to_str().unwrap(),
        ])
        .assert()
        .success();
    assert_eq!(std::fs::read(&copy).unwrap(), std::fs::read(&out).unwrap());

    // A tampered CSV is detected.
    std::fs::write(&out, "scheme\n").unwrap();
    gmud_sim()
        .args(["replay", "--check", "--manifest", manifest.to_str().unwrap()])
        .assert()
        .failure();
}

#[test]
fn invalid_flags_leave_no_output() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("bad.csv");
    for bad in [
        vec!["--snr", "0:-1:5"],
        vec!["--mod", "8psk"],
        vec!["--realizations", "0"],
        vec!["--fixed-row", "3"],
    ] {
        let mut args = vec!["sweep", "--scheme", "reg-inv", "--out", out.to_str().unwrap()];
        args.extend(bad);
        gmud_sim().args(&args).assert().failure();
    }
    gmud_sim()
        .args(["sweep", "--scheme", "gmud", "--feedback", "0"])
        .assert()
        .failure();
    assert_eq!(std::fs::read_dir(dir.path()).unwrap().count(), 0);
}

#[test]
fn quantize_round_trip() {
    let a = gmud_sim()
        .args(["quantize", "--scheme", "gmud", "--n", "4", "--matrix", H])
        .assert()
        .success();
    let v = json_stdout(&a);
    let bits = v["bits"].as_str().unwrap().to_string();
    assert_eq!(bits.len(), 48);
    assert_eq!(v["total_bits"], 48);
    let b = gmud_sim()
        .args(["quantize", "--scheme", "gmud", "--n", "4", "--bits", &bits])
        .assert()
        .success();
    assert_eq!(json_stdout(&b)["decoded"], v["decoded"]);
    gmud_sim()
        .args(["quantize", "--scheme", "reg-inv", "--n", "4", "--bits", "0101"])
        .assert()
        .failure();
}
