use std::fs;
use std::io::BufReader;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;
use zk_core::io::read_frame;

fn zk(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_zk"))
        .args(args)
        .output()
        .expect("zk binary runs")
}

fn summary(dir: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(dir.join("summary.json")).unwrap()).unwrap()
}

#[test]
fn steklov_suite_passes_with_500_ratios_per_class() {
    let tmp = tempfile::tempdir().unwrap();
    let out = zk(&["run", "steklov_suite", "--out", tmp.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let s = summary(tmp.path());
    assert_eq!(s["pass"], Value::Bool(true));
    assert_eq!(s["preset"], "steklov_suite");
    for class in ["both_ends", "left_end"] {
        let text = fs::read_to_string(tmp.path().join(format!("steklov_{class}.jsonl"))).unwrap();
        let ratios: Vec<f64> = text.lines().map(|l| l.parse().unwrap()).collect();
        assert_eq!(ratios.len(), 500);
        assert!(ratios.iter().all(|r| *r <= 1.0 + 1e-8));
    }
    assert!(fs::read_to_string(tmp.path().join("config.ini")).unwrap().contains("preset = steklov_suite"));
}

#[test]
fn summaries_are_byte_identical_across_runs() {
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    for d in [&a, &b] {
        let out = zk(&["run", "interp_suite", "--seed", "7", "--out", d.path().to_str().unwrap()]);
        assert_eq!(out.status.code(), Some(0));
    }
    let read = |d: &tempfile::TempDir| fs::read(d.path().join("summary.json")).unwrap();
    assert_eq!(read(&a), read(&b));
    assert_eq!(summary(a.path())["seed"], 7);
}

#[test]
fn snapshots_are_written_as_csv_and_frames() {
    let tmp = tempfile::tempdir().unwrap();
    let out = zk(&["run", "interior_reg", "--snapshots", "4", "--out", tmp.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let mut r = BufReader::new(fs::File::open(tmp.path().join("frames.bin")).unwrap());
    let mut times = Vec::new();
    while let Some((t, u)) = read_frame(&mut r).unwrap() {
        assert_eq!((u.nx(), u.ny()), (301, 8));
        times.push(t);
    }
    assert_eq!(times.len(), 5);
    assert!((times[4] - 2.0).abs() < 1e-12);
    let csv = fs::read_to_string(tmp.path().join("snapshots.csv")).unwrap();
    assert_eq!(csv.lines().count(), 1 + 5 * 301 * 8);
    let diags = fs::read_to_string(tmp.path().join("diagnostics.jsonl")).unwrap();
    assert_eq!(diags.lines().count(), 401);
}

#[test]
fn norms_of_a_sampled_field() {
    let tmp = tempfile::tempdir().unwrap();
    let out = zk(&["run", "interior_reg", "--snapshots", "1", "--out", tmp.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let csv = fs::read_to_string(tmp.path().join("snapshots.csv")).unwrap();
    let initial: Vec<&str> = csv.lines().filter(|l| l.starts_with("t,") || l.starts_with("0.0,")).collect();
    let input = tmp.path().join("u0.csv");
    fs::write(&input, initial.join("\n")).unwrap();
    let out = zk(&["norms", "--input", input.to_str().unwrap(), "--bc", "a", "--width", "1", "--weight", "exp:alpha=0.25"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    // u₀ = 0.1 e^{−(x−5)²} √2 sin(πy): ‖u₀‖² = 0.01 ∫ e^{x/2 − 2(x−5)²} dx
    let exact = (0.01 * (std::f64::consts::PI / 2.0).sqrt() * 2.53125f64.exp()).sqrt();
    let h0 = v["h0"].as_f64().unwrap();
    assert!((h0 / exact - 1.0).abs() < 1e-3, "{h0} vs {exact}");
    assert!(v["h1"].as_f64().unwrap() > h0);

    let out = zk(&["norms", "--input", input.to_str().unwrap(), "--bc", "a", "--width", "2"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn check_reports_every_problem_with_line_numbers() {
    let tmp = tempfile::tempdir().unwrap();
    let good = tmp.path().join("good.ini");
    fs::write(&good, "[run]\npreset = decay_a\n").unwrap();
    let out = zk(&["check", good.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));

    let bad = tmp.path().join("bad.ini");
    fs::write(&bad, "[run]\npreset = decay_a\n[weight]\nalpha = 0.3\n[equation]\nbc = e\ncolour = 3\n").unwrap();
    let out = zk(&["check", bad.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("line 6"), "{err}");
    assert!(err.contains("line 7"), "{err}");
    assert!(err.contains("unknown key `colour`"), "{err}");

    fs::write(&bad, "[run]\npreset = decay_a\n[weight]\nalpha = 0.3\n").unwrap();
    let out = zk(&["check", bad.to_str().unwrap()]);
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("line 4") && err.contains("α exceeds α₀ ≈ 0.27768"), "{err}");
}

#[test]
fn usage_errors_exit_with_2() {
    let tmp = tempfile::tempdir().unwrap();
    assert_eq!(zk(&["run", "decay_b", "--out", tmp.path().to_str().unwrap()]).status.code(), Some(2));
    assert_eq!(zk(&["run"]).status.code(), Some(2));
    assert_eq!(zk(&["check", "/nonexistent/file.ini"]).status.code(), Some(2));
    let inadmissible = tmp.path().join("c.ini");
    fs::write(&inadmissible, "[run]\npreset = decay_c\n[weight]\nalpha = 0.25\n").unwrap();
    let out = zk(&["run", inadmissible.to_str().unwrap(), "--out", tmp.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn failing_checks_exit_with_1() {
    let tmp = tempfile::tempdir().unwrap();
    // Far too coarse for the identity to close within 5%
    let cfg = tmp.path().join("coarse.ini");
    fs::write(&cfg, "[run]\npreset = identity_linear\n[grid]\nnx = 13\ndt = 0.1\n").unwrap();
    let out = zk(&["run", cfg.to_str().unwrap(), "--out", tmp.path().join("o").to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1), "{}", String::from_utf8_lossy(&out.stdout));
    assert!(String::from_utf8_lossy(&out.stdout).contains("FAIL"));
    assert_eq!(summary(&tmp.path().join("o"))["pass"], Value::Bool(false));
}

#[test]
fn runtime_errors_exit_with_3() {
    let tmp = tempfile::tempdir().unwrap();
    let file = tmp.path().join("not_a_dir");
    fs::write(&file, "").unwrap();
    let out = zk(&["run", "norm_bench", "--out", file.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(3));
}
