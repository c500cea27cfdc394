//! End-to-end runs of the command-line surface.

use std::path::{Path, PathBuf};
use std::process::Command;

use apdyn::cli;
use serde_json::{json, Value};

fn preset(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("presets").join(name)
}

fn write_config(dir: &Path, name: &str, v: &Value) -> PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, v.to_string()).unwrap();
    p
}

fn csv_rows(path: &Path) -> (Value, Vec<String>, Vec<Vec<String>>) {
    let text = std::fs::read_to_string(path).unwrap();
    let mut lines = text.lines();
    let config = serde_json::from_str(lines.next().unwrap().strip_prefix("# config: ").unwrap()).unwrap();
    let header = lines.next().unwrap().split(',').map(str::to_string).collect();
    let rows = lines.map(|l| l.split(',').map(str::to_string).collect()).collect();
    (config, header, rows)
}

#[test]
fn timemap_flags_reproduce_the_quarter_period() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("t.csv");
    let r = 8f64.sqrt().to_string();
    let code = cli::run(["apdyn", "timemap", "--f", "abs", "--k", "0", "--rho", "8", "--kind", "U", "--r", &r, "--out", out.to_str().unwrap()]);
    assert_eq!(code, 0);
    let (config, header, rows) = csv_rows(&out);
    assert_eq!(config["f"], "abs");
    assert_eq!(header, ["rho", "kind", "r", "tau", "err_estimate"]);
    let tau: f64 = rows[0][3].parse().unwrap();
    assert!((tau - std::f64::consts::FRAC_PI_2).abs() < 1e-8);
}

#[test]
fn analyze_reports_regions() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("a.json");
    assert_eq!(cli::run(["apdyn", "analyze", "--config", preset("fig3_regions.json").to_str().unwrap(), "--out", out.to_str().unwrap()]), 0);
    let v: Value = serde_json::from_str(&std::fs::read_to_string(out).unwrap()).unwrap();
    assert_eq!(v["config"]["k"], 2.0);
    assert!(v["regions"].is_object());
}

#[test]
fn unknown_keys_and_bad_values_exit_with_one() {
    let dir = tempfile::tempdir().unwrap();
    let bad = write_config(dir.path(), "bad.json", &json!({"f": "abs", "k": 0.0, "rho": [1.0], "colour": 3}));
    assert_eq!(cli::run(["apdyn", "analyze", "--config", bad.to_str().unwrap()]), 1);
    let bad = write_config(dir.path(), "bad2.json", &json!({"f": "cosh", "k": 0.0}));
    assert_eq!(cli::run(["apdyn", "analyze", "--config", bad.to_str().unwrap()]), 1);
    let missing = dir.path().join("absent.json");
    assert_eq!(cli::run(["apdyn", "scatter", "--config", missing.to_str().unwrap()]), 1);
}

#[test]
fn certify_exit_codes_follow_the_verdict() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("c.json");
    assert_eq!(cli::run(["apdyn", "horseshoe", "certify", "--config", preset("abs_example.json").to_str().unwrap(), "--out", out.to_str().unwrap()]), 0);
    let v: Value = serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(v["config"]["t2"], 13.0);

    let mut short: Value = serde_json::from_str(&std::fs::read_to_string(preset("abs_example.json")).unwrap()).unwrap();
    short["t2"] = json!(3.0);
    let cfg = write_config(dir.path(), "short.json", &short);
    assert_eq!(cli::run(["apdyn", "horseshoe", "certify", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()]), 2);
}

#[test]
fn melnikov_writes_three_files() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "m.json",
        &json!({"f": "sqrt1p", "k": 2.0, "p0": "sin", "omega": 1.0, "alpha_count": 64, "omega_grid": {"min": 0.5, "max": 2.0, "count": 4}}),
    );
    let out = dir.path().join("m");
    assert_eq!(cli::run(["apdyn", "melnikov", "--config", cfg.to_str().unwrap(), "--out-dir", out.to_str().unwrap()]), 0);
    let (_, header, rows) = csv_rows(&out.join("delta.csv"));
    assert_eq!(header, ["alpha", "delta", "tail_bound"]);
    assert_eq!(rows.len(), 64);
    let (_, header, rows) = csv_rows(&out.join("eta.csv"));
    assert_eq!(header, ["omega", "eta"]);
    assert_eq!(rows.len(), 4);
    let report: Value = serde_json::from_str(&std::fs::read_to_string(out.join("report.json")).unwrap()).unwrap();
    assert_eq!(report["zeros"]["simple_zeros"].as_array().map(Vec::len), Some(2));
}

#[test]
fn ap_scan_counts_fixed_points() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "ap.json",
        &json!({"f": "sqrt1p", "k": [-0.5, 2.0], "eps": 0.01, "omega": 10.0,
                "window": {"x_min": -4.0, "x_max": 4.0, "y_min": -1.0, "y_max": 1.0, "nx": 9, "ny": 5}}),
    );
    let out = dir.path().join("ap.csv");
    assert_eq!(cli::run(["apdyn", "ap-scan", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()]), 0);
    let (_, _, rows) = csv_rows(&out);
    let counts: Vec<&str> = rows.iter().map(|r| r[1].as_str()).collect();
    assert_eq!(counts, ["0", "2"]);
}

#[test]
fn output_does_not_depend_on_the_thread_count() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "s.json",
        &json!({"f": "sqrt1p", "forcing": {"variant": "periodic", "k": 2.0, "eps": 0.5, "omega": 1.0, "p0": "sin"},
                "n_iter": 20, "ic": {"u0_min": -3.0, "u0_max": 6.0, "count": 40, "y0": 0.0}}),
    );
    let run = |threads: &str| {
        let out = Command::new(env!("CARGO_BIN_EXE_apdyn"))
            .args(["scatter", "--config", cfg.to_str().unwrap()])
            .env("HORSESHOE_THREADS", threads)
            .output()
            .unwrap();
        assert!(out.status.success());
        out.stdout
    };
    assert_eq!(run("1"), run("3"));
}
