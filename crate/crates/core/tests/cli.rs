use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn hfsim(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_hfsim"))
        .args(args)
        .arg("--out")
        .arg(dir)
        .env_remove("HFSIM_SEED")
        .output()
        .expect("spawn hfsim")
}

fn ok(dir: &Path, args: &[&str]) {
    let out = hfsim(dir, args);
    assert!(
        out.status.success(),
        "{args:?}: {}",
        String::from_utf8_lossy(&out.stderr)
    );
}

fn json(path: impl AsRef<Path>) -> Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

fn mermin_row(path: impl AsRef<Path>, row: &str) -> Vec<f64> {
    let text = std::fs::read_to_string(path).unwrap();
    let line = text.lines().find(|l| l.starts_with(row)).unwrap();
    line.split(',').skip(1).map(|v| v.parse().unwrap()).collect()
}

#[test]
fn noiseless_truth_table_is_a_permutation() {
    let dir = tempfile::tempdir().unwrap();
    ok(dir.path(), &["truth-table", "--analytic"]);
    let csv = std::fs::read_to_string(dir.path().join("truth_table.csv")).unwrap();
    let golden = "\
input,|000>,|001>,|010>,|011>,|100>,|101>,|110>,|111>
|000>,1,0,0,0,0,0,0,0
|001>,0,1,0,0,0,0,0,0
|010>,0,0,1,0,0,0,0,0
|011>,0,0,0,1,0,0,0,0
|100>,0,0,0,0,1,0,0,0
|101>,0,0,0,0,0,0,1,0
|110>,0,0,0,0,0,1,0,0
|111>,0,0,0,0,0,0,0,1
";
    assert_eq!(csv, golden);
    let control1 = std::fs::read_to_string(dir.path().join("truth_table_control1.csv")).unwrap();
    assert_eq!(
        control1,
        "input,|100>,|101>,|110>,|111>\n|100>,1,0,0,0\n|101>,0,0,1,0\n|110>,0,1,0,0\n|111>,0,0,0,1\n"
    );
    assert_eq!(json(dir.path().join("conversion_rate.json"))["P"], 1.0);
}

#[test]
fn depolarized_conversion_rate() {
    let dir = tempfile::tempdir().unwrap();
    ok(dir.path(), &["truth-table", "--analytic", "--noise-p", "0.05"]);
    let p = json(dir.path().join("conversion_rate.json"))["P"].as_f64().unwrap();
    assert!((p - 0.95625).abs() < 1e-12);

    ok(dir.path(), &["truth-table", "--noise-p", "0.05", "--seed", "3"]);
    let rec = json(dir.path().join("conversion_rate.json"));
    let (p, err) = (rec["P"].as_f64().unwrap(), rec["uncertainty"].as_f64().unwrap());
    assert!(err > 0.0 && err < 0.01, "uncertainty {err}");
    assert!((p - 0.95625).abs() < 4.0 * err, "P = {p} +- {err}");
}

#[test]
fn superposition_table_has_both_branches() {
    let dir = tempfile::tempdir().unwrap();
    ok(dir.path(), &["truth-table", "--analytic"]);
    let csv = std::fs::read_to_string(dir.path().join("truth_table_superposition.csv")).unwrap();
    assert_eq!(
        csv,
        "input,|00>,|01>,|10>,|11>\n|+00>,1,0,0,0\n|+01>,0,0.5,0.5,0\n|+10>,0,0.5,0.5,0\n|+11>,0,0,0,1\n"
    );
}

#[test]
fn mermin_calibration_points() {
    let dir = tempfile::tempdir().unwrap();
    for (p, s_m) in [("0", 4.0), ("0.0455", 3.818), ("0.5", 2.0)] {
        ok(dir.path(), &["mermin", "--analytic", "--noise-p", p]);
        let value = mermin_row(dir.path().join("mermin.csv"), "value");
        assert_eq!(value.len(), 5);
        assert!((value[4] - s_m).abs() < 1e-9, "p = {p}: {value:?}");
    }
}

#[test]
fn sampled_mermin_near_calibration() {
    let dir = tempfile::tempdir().unwrap();
    ok(
        dir.path(),
        &["mermin", "--noise-p", "0.0455", "--resamples", "4", "--seed", "5"],
    );
    let value = mermin_row(dir.path().join("mermin.csv"), "value");
    let std = mermin_row(dir.path().join("mermin.csv"), "std");
    assert!((value[4] - 3.818).abs() < 0.05, "{value:?}");
    assert!(std.iter().all(|s| *s > 0.0 && *s < 0.05), "{std:?}");
}

#[test]
fn tomography_fidelities() {
    let dir = tempfile::tempdir().unwrap();
    for label in ["GHZ1", "GHZ2"] {
        ok(
            dir.path(),
            &["tomography", "--label", label, "--shots", "100000", "--resamples", "4"],
        );
        let rec = json(dir.path().join("fidelity.json"));
        assert_eq!(rec["label"], label);
        assert!(rec["fidelity"].as_f64().unwrap() >= 0.99, "{rec}");
    }
    ok(dir.path(), &["tomography", "--analytic", "--noise-p", "0.0455"]);
    let f = json(dir.path().join("fidelity.json"))["fidelity"].as_f64().unwrap();
    assert!((0.94..=0.99).contains(&f), "F = {f}");

    let re = json(dir.path().join("rho_real.json"));
    assert_eq!(re["values"].as_array().unwrap().len(), 8);
    assert_eq!(re["basis"][1], "|001>");
    let dataset = json(dir.path().join("dataset.json"));
    assert_eq!(dataset["probabilities"].as_object().unwrap().len(), 27);
}

#[test]
fn sampled_dataset_lists_all_settings() {
    let dir = tempfile::tempdir().unwrap();
    ok(dir.path(), &["tomography", "--shots", "1000", "--resamples", "2"]);
    let dataset = json(dir.path().join("dataset.json"));
    let map = dataset.as_object().unwrap();
    assert_eq!(map.len(), 27);
    let zzz: u64 = map["ZZZ"].as_array().unwrap().iter().map(|v| v.as_u64().unwrap()).sum();
    assert_eq!(zzz, 1000);
}

#[test]
fn seed_precedence() {
    let root = tempfile::tempdir().unwrap();
    let config = root.path().join("config.json");
    std::fs::write(&config, r#"{"seed": 1, "noise_p": 0.05, "shots": 2000}"#).unwrap();
    let cfg = config.to_str().unwrap();
    let run = |name: &str, env: Option<&str>, extra: &[&str]| -> String {
        let dir = root.path().join(name);
        let mut cmd = Command::new(env!("CARGO_BIN_EXE_hfsim"));
        cmd.args(["truth-table", "--config", cfg])
            .args(extra)
            .arg("--out")
            .arg(&dir);
        match env {
            Some(v) => cmd.env("HFSIM_SEED", v),
            None => cmd.env_remove("HFSIM_SEED"),
        };
        let out = cmd.output().unwrap();
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
        std::fs::read_to_string(dir.join("truth_table.csv")).unwrap()
    };
    let from_file = run("file", None, &[]);
    let seed_one = run("flag1", None, &["--seed", "1"]);
    let from_env = run("env", Some("9"), &[]);
    let seed_nine = run("flag9", None, &["--seed", "9"]);
    let flag_wins = run("both", Some("9"), &["--seed", "1"]);
    assert_eq!(from_file, seed_one);
    assert_eq!(from_env, seed_nine);
    assert_ne!(from_file, from_env);
    assert_eq!(flag_wins, seed_one);
    let rec = json(root.path().join("env").join("conversion_rate.json"));
    assert_eq!(rec["seed"], 9);
    assert_eq!(rec["shots"], 2000);
}

#[test]
fn exported_bench_runs_as_custom_bench() {
    let dir = tempfile::tempdir().unwrap();
    ok(dir.path(), &["export"]);
    let bench = dir.path().join("bench.json");
    let op = json(dir.path().join("operator.json"));
    assert_eq!(op["header"]["ordering_version"], 1);
    let custom = tempfile::tempdir().unwrap();
    ok(
        custom.path(),
        &["truth-table", "--analytic", "--bench", bench.to_str().unwrap()],
    );
    let reference = tempfile::tempdir().unwrap();
    ok(reference.path(), &["truth-table", "--analytic"]);
    for name in ["truth_table.csv", "conversion_rate.json"] {
        assert_eq!(
            std::fs::read(custom.path().join(name)).unwrap(),
            std::fs::read(reference.path().join(name)).unwrap()
        );
    }
}

#[test]
fn non_gate_bench_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let bench = dir.path().join("lossy.json");
    std::fs::write(
        &bench,
        r#"{"name": "lossy", "domain": "logical", "stages": [{"element": {"kind": "pbs_port", "params": {"port": "H"}}}]}"#,
    )
    .unwrap();
    let out = hfsim(
        dir.path(),
        &["truth-table", "--analytic", "--bench", bench.to_str().unwrap()],
    );
    assert!(!out.status.success());
    assert!(!dir.path().join("truth_table.csv").exists());
}

#[test]
fn bad_inputs_exit_nonzero() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("bad.json");
    std::fs::write(&config, r#"{"noise_p": "high"}"#).unwrap();
    let cases: [&[&str]; 5] = [
        &["truth-table", "--config", config.to_str().unwrap()],
        &["truth-table", "--noise-p", "1.5"],
        &["truth-table", "--bench", "/nonexistent/bench.json"],
        &["tomography", "--label", "GHZ7"],
        &["mermin", "--label", "000", "--analytic"],
    ];
    for args in cases {
        let out = hfsim(dir.path(), args);
        assert!(!out.status.success(), "{args:?} should fail");
        assert!(String::from_utf8_lossy(&out.stderr).starts_with("error:"), "{args:?}");
    }
}
