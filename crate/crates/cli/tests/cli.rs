use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

fn carleson(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_carleson")).args(args).output().expect("binary runs")
}

fn write(dir: &Path, name: &str, text: &str) -> PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p
}

fn json(out: &Output) -> Value {
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).unwrap()
}

const DISK: &str = r#"{"outer":{"center":[0,0],"radius":1}}"#;
const ANNULUS: &str = r#"{"outer":{"center":[0,0],"radius":1},"inner":[{"center":[0,0],"radius":0.25}]}"#;

#[test]
fn box_reports_kappa() {
    let dir = TempDir::new().unwrap();
    let ann = write(dir.path(), "ann.json", ANNULUS);
    // atom at depth 1/8 below the outer circle: κ = w / h
    let m = write(dir.path(), "m.json", r#"{"atoms":[{"z":[0.875,0],"w":0.5}]}"#);
    let r = json(&carleson(&["box", "--domain", ann.to_str().unwrap(), "--measure", m.to_str().unwrap()]));
    assert!((r["kappa"].as_f64().unwrap() - 4.0).abs() < 1e-12);
    assert_eq!(r["per_component"].as_array().unwrap().len(), 2);
    // inner circle: f_1 = 0.25/z puts the atom at |w| = 2/7, reached by an
    // admissible square of depth 5/7 and arclength 0.25 · 5/7
    let inner = 0.5 / (0.25 * (1.0 - 0.25 / 0.875));
    assert!((r["per_component"][1]["kappa"].as_f64().unwrap() - inner).abs() < 1e-12);

    let empty = write(dir.path(), "empty.json", r#"{"atoms":[]}"#);
    let r = json(&carleson(&["box", "--domain", ann.to_str().unwrap(), "--measure", empty.to_str().unwrap()]));
    assert_eq!(r["kappa"].as_f64().unwrap(), 0.0);
    assert!(r["witness"].is_null());
}

#[test]
fn family_input_writes_trend_and_csv() {
    let dir = TempDir::new().unwrap();
    let disk = write(dir.path(), "disk.json", DISK);
    let members: Vec<String> = (4..=11)
        .map(|k| {
            let d = 0.5f64.powi(k);
            format!(r#"{{"atoms":[{{"z":[{},0],"w":{}}}]}}"#, 1.0 - d, d.sqrt())
        })
        .collect();
    let fam = write(dir.path(), "fam.json", &format!("[{}]", members.join(",")));
    let out = dir.path().join("report.json");
    let status = carleson(&[
        "box",
        "--domain",
        disk.to_str().unwrap(),
        "--measure",
        fam.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
    ]);
    assert!(status.status.success());
    let r: Value = serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(r["trend"]["class"], "divergent");
    assert_eq!(r["members"].as_array().unwrap().len(), 8);
    let csv = std::fs::read_to_string(dir.path().join("report.csv")).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines[0], "index,value");
    assert_eq!(lines.len(), 9);
    let first: f64 = lines[1].split(',').nth(1).unwrap().parse().unwrap();
    assert!((first - 4.0).abs() < 1e-12);
}

#[test]
fn malformed_json_exits_2_with_position() {
    let dir = TempDir::new().unwrap();
    let disk = write(dir.path(), "disk.json", DISK);
    let bad = write(dir.path(), "bad.json", "{\"atoms\": [\n  {\"z\": [0.1, 0.2], \"w\": }\n]}");
    let out = carleson(&["box", "--domain", disk.to_str().unwrap(), "--measure", bad.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("line 2") && err.contains("column"), "{err}");

    let outside = write(dir.path(), "outside.json", r#"{"atoms":[{"z":[2,0],"w":1}]}"#);
    let out = carleson(&["box", "--domain", disk.to_str().unwrap(), "--measure", outside.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    let out = carleson(&["box", "--domain", "/nonexistent/domain.json", "--measure", outside.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn harmonic_is_deterministic() {
    let dir = TempDir::new().unwrap();
    let disk = write(dir.path(), "disk.json", DISK);
    let run = |threads: &str| {
        let out = Command::new(env!("CARGO_BIN_EXE_carleson"))
            .args(["harmonic", "--domain", disk.to_str().unwrap(), "--z0", "0,0", "--arcs-per-circle", "2"])
            .args(["--seed", "7", "--walks", "10000"])
            .env("CARLESON_THREADS", threads)
            .output()
            .unwrap();
        assert!(out.status.success());
        out.stdout
    };
    let a = run("1");
    assert_eq!(a, run("1"));
    assert_eq!(a, run("4"));
    let r: Value = serde_json::from_slice(&a).unwrap();
    let p = r["probabilities"].as_array().unwrap();
    let s = r["standard_errors"].as_array().unwrap();
    for k in 0..2 {
        assert!((p[k].as_f64().unwrap() - 0.5).abs() <= 3.0 * s[k].as_f64().unwrap());
    }
    assert_eq!(r["walks"], 10_000);

    let ann = write(dir.path(), "ann.json", ANNULUS);
    let out = carleson(&["harmonic", "--domain", ann.to_str().unwrap(), "--z0", "0.1,0"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn pushforward_round_trips() {
    let dir = TempDir::new().unwrap();
    let disk = write(dir.path(), "disk.json", DISK);
    let text = r#"{"atoms":[{"z":[0.1,-0.2],"w":0.5},{"z":[-0.7,0.3],"w":1.25}]}"#;
    let m = write(dir.path(), "m.json", text);
    let out = carleson(&["pushforward", "--domain", disk.to_str().unwrap(), "--measure", m.to_str().unwrap()]);
    assert_eq!(json(&out), serde_json::from_str::<Value>(text).unwrap());

    let map = write(
        dir.path(),
        "map.json",
        r#"{"kind":"compose","maps":[{"kind":"mobius","coeffs":[[1,0],[-0.3,0],[-0.3,0],[1,0]]},{"kind":"quadpoly","beta":[0.3,0.1]}]}"#,
    );
    let image = dir.path().join("image.json");
    let args = ["--domain", disk.to_str().unwrap(), "--map", map.to_str().unwrap()];
    let out = Command::new(env!("CARGO_BIN_EXE_carleson"))
        .arg("pushforward")
        .args(args)
        .args(["--measure", m.to_str().unwrap(), "--inverse", "--out", image.to_str().unwrap()])
        .output()
        .unwrap();
    assert!(out.status.success());
    let back = Command::new(env!("CARGO_BIN_EXE_carleson"))
        .arg("pushforward")
        .args(args)
        .args(["--measure", image.to_str().unwrap()])
        .output()
        .unwrap();
    let back = json(&back);
    let orig: Value = serde_json::from_str(text).unwrap();
    for (a, b) in back["atoms"].as_array().unwrap().iter().zip(orig["atoms"].as_array().unwrap()) {
        for i in 0..2 {
            assert!((a["z"][i].as_f64().unwrap() - b["z"][i].as_f64().unwrap()).abs() < 1e-10);
        }
        assert_eq!(a["w"], b["w"]);
    }
}

#[test]
fn constant_of_point_mass_at_centre() {
    let dir = TempDir::new().unwrap();
    let disk = write(dir.path(), "disk.json", DISK);
    let m = write(dir.path(), "m.json", r#"{"atoms":[{"z":[0,0],"w":1}]}"#);
    for q in ["1", "2", "4"] {
        let r = json(&carleson(&[
            "constant",
            "--domain",
            disk.to_str().unwrap(),
            "--measure",
            m.to_str().unwrap(),
            "--q",
            q,
            "--z0",
            "0,0",
        ]));
        assert!((r["c_hat"].as_f64().unwrap() - 1.0).abs() < 1e-9, "{r}");
    }
    let out = carleson(&["constant", "--domain", disk.to_str().unwrap(), "--measure", m.to_str().unwrap(), "--q", "0.5"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn openset_four_to_the_minus_n() {
    let dir = TempDir::new().unwrap();
    let open = write(
        dir.path(),
        "open.json",
        r#"{"components":[
            {"base":{"outer":{"center":[0,0],"radius":1}}},
            {"base":{"outer":{"center":[3,0],"radius":1}}},
            {"base":{"outer":{"center":[6,0],"radius":1}}}]}"#,
    );
    let m = write(
        dir.path(),
        "m.json",
        r#"{"atoms":[{"z":[0,0],"w":0.25},{"z":[3,0],"w":0.0625},{"z":[6,0],"w":0.015625}]}"#,
    );
    let r = json(&carleson(&["openset", "--openset", open.to_str().unwrap(), "--measure", m.to_str().unwrap()]));
    assert!((r["c_star"].as_f64().unwrap() - 0.5).abs() < 1e-12);
    assert_eq!(r["passed"], true);

    let r = json(&carleson(&[
        "openset",
        "--openset",
        open.to_str().unwrap(),
        "--measure",
        m.to_str().unwrap(),
        "--weights",
        "0.5,0.3,0.2",
    ]));
    let expected = (0.25f64 / 0.5).max(0.0625 / 0.3).max(0.015625 / 0.2);
    assert!((r["c_star"].as_f64().unwrap() - expected).abs() < 1e-12);

    let out = carleson(&["openset", "--openset", open.to_str().unwrap(), "--measure", m.to_str().unwrap(), "--weights", "0.9,0.9,0.1"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn suite_exit_codes() {
    let ok = carleson(&["suite", "--criterion", "1", "--criterion", "5"]);
    let report = json(&ok);
    assert_eq!(report["passed"], true);
    assert_eq!(report["outcomes"].as_array().unwrap().len(), 2);
    let keys: Vec<&String> = report["outcomes"][0].as_object().unwrap().keys().collect();
    assert_eq!(keys, ["budget_s", "checks", "elapsed_s", "error", "id", "name", "passed"]);

    // tolerances scaled to nothing: the sharpness check (error ~1e-16) must fail
    let bad = carleson(&["suite", "--criterion", "5", "--tolerance-scale", "1e-30"]);
    assert_eq!(bad.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&bad.stderr).contains("[FAIL]"));
    let r: Value = serde_json::from_slice(&bad.stdout).unwrap();
    assert_eq!(r["passed"], false);

    assert_eq!(carleson(&["suite", "--criterion", "42"]).status.code(), Some(2));
}
