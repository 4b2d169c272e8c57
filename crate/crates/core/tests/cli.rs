use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

const BIN: &str = env!("CARGO_BIN_EXE_spinform");

fn run(dir: &Path, args: &[&str]) -> Output {
    Command::new(BIN)
        .args(args)
        .current_dir(dir)
        .output()
        .expect("spawn spinform")
}

fn run_cfg(cmd: &str, cfg: &str, out: &str) -> (tempfile::TempDir, Output) {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("cfg.json"), cfg).unwrap();
    let o = run(dir.path(), &[cmd, "--config", "cfg.json", "--out", out]);
    (dir, o)
}

fn json(path: &Path) -> Value {
    serde_json::from_slice(&fs::read(path).unwrap()).unwrap()
}

#[test]
fn simulate_full_period() {
    let cfg = r#"{"laws": ["bloch"], "initial": {"theta": 1.5707963267948966, "phi": 0},
                  "t_end": 6.283185307179586, "dt": 0.001}"#;
    let (dir, o) = run_cfg("simulate", cfg, "traj.csv");
    assert_eq!(
        o.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&o.stderr)
    );
    let mut rdr = csv::Reader::from_path(dir.path().join("traj.csv")).unwrap();
    let header: Vec<String> = rdr.headers().unwrap().iter().map(String::from).collect();
    assert_eq!(header, ["t", "mx", "my", "mz", "norm_dev", "purity_dev"]);
    let rows: Vec<Vec<f64>> = rdr
        .records()
        .map(|r| r.unwrap().iter().map(|x| x.parse().unwrap()).collect())
        .collect();
    assert_eq!(rows.len(), 6285);
    let last = rows.last().unwrap();
    assert_eq!(last[0], std::f64::consts::TAU);
    assert!((last[1] - 1.0).abs() < 1e-9 && last[2].abs() < 1e-9 && last[3].abs() < 1e-9);
    let summary = json(&dir.path().join("traj.summary.json"));
    assert_eq!(summary["rows"], 6285);
    assert_eq!(summary["status"], "ok");
}

#[test]
fn simulate_single_step_and_layouts() {
    for (law, width) in [("von_neumann", 11), ("schrodinger_pauli", 7), ("llg", 6)] {
        let cfg = format!(
            r#"{{"laws": ["{law}"], "t_end": 0.01, "dt": 0.01, "params": {{"k_i": 0.2}}}}"#
        );
        let (dir, o) = run_cfg("simulate", &cfg, "t.csv");
        assert_eq!(o.status.code(), Some(0));
        let text = fs::read_to_string(dir.path().join("t.csv")).unwrap();
        let lines: Vec<_> = text.lines().collect();
        assert_eq!(lines.len(), 3, "{law}");
        assert!(lines.iter().all(|l| l.split(',').count() == width));
    }
}

#[test]
fn simulate_json_format() {
    let cfg = r#"{"laws": ["sp_collapse"], "t_end": 0.05, "dt": 0.01, "params": {"k_i": 0.3},
                  "output": {"format": "json"}}"#;
    let (dir, o) = run_cfg("simulate", cfg, "t.json");
    assert_eq!(o.status.code(), Some(0));
    let v = json(&dir.path().join("t.json"));
    assert_eq!(v["rows"].as_array().unwrap().len(), 6);
    assert_eq!(v["columns"][1], "psi_up_re");
}

#[test]
fn config_errors_exit_2() {
    let bad = [
        ("simulate", r#"{"laws": ["bloch"], "t_end": 1.0}"#),
        (
            "simulate",
            r#"{"laws": ["bloch", "llg"], "t_end": 1.0, "dt": 0.1}"#,
        ),
        (
            "simulate",
            r#"{"laws": ["bloch"], "t_end": 1.0, "dt": 0.1, "step": 3}"#,
        ),
        (
            "simulate",
            r#"{"laws": ["bloch"], "t_end": 0.01, "dt": 0.1}"#,
        ),
        (
            "simulate",
            r#"{"laws": ["bloch"], "t_end": 1.0, "dt": 0.1, "params": {"hbar": 0}}"#,
        ),
        ("simulate", r#"{"laws": ["warp"], "t_end": 1.0, "dt": 0.1}"#),
        (
            "simulate",
            r#"{"laws": ["bloch"], "t_end": 2.0, "dt": 0.1,
                "field": {"kind": "tabulated", "times": [0, 1], "samples": [[0,0,1],[0,0,1]]}}"#,
        ),
        ("compare", r#"{"laws": ["bloch"], "t_end": 1.0, "dt": 0.1}"#),
        (
            "collapse",
            r#"{"initial": {"theta": 0}, "ensemble_size": 10}"#,
        ),
        ("collapse", r#"{"initial": {"theta": 1.0}}"#),
        (
            "collapse",
            r#"{"initial": {"theta": 1.0}, "ensemble_size": 0}"#,
        ),
    ];
    for (cmd, cfg) in bad {
        let (dir, o) = run_cfg(cmd, cfg, "out");
        assert_eq!(o.status.code(), Some(2), "{cmd} {cfg}");
        assert!(!dir.path().join("out").exists());
    }
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(
        run(dir.path(), &["simulate", "--config", "missing.json"])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(run(dir.path(), &["bogus"]).status.code(), Some(2));
}

#[test]
fn non_finite_exits_1_with_snapshot() {
    let cfg = r#"{"laws": ["bloch"], "t_end": 1.0, "dt": 0.1,
                  "params": {"gamma": 1e300}, "field": {"kind": "constant", "b": [1e300, 0, 1e300]}}"#;
    let (dir, o) = run_cfg("simulate", cfg, "t.csv");
    assert_eq!(o.status.code(), Some(1));
    assert!(!dir.path().join("t.csv").exists());
    let s = json(&dir.path().join("t.summary.json"));
    assert_eq!(s["status"], "non_finite");
    assert_eq!(s["snapshot"]["step"], 1);
}

#[test]
fn compare_exit_codes() {
    let ok =
        r#"{"initial": {"theta": 1.0471975511965976}, "t_end": 62.83185307179586, "dt": 0.001}"#;
    let (dir, o) = run_cfg("compare", ok, "c.json");
    assert_eq!(o.status.code(), Some(0));
    let v = json(&dir.path().join("c.json"));
    assert_eq!(v["reports"].as_array().unwrap().len(), 3);
    assert_eq!(v["passed"], true);

    let coarse =
        r#"{"initial": {"theta": 1.0471975511965976}, "t_end": 125.66370614359172, "dt": 0.5}"#;
    let (dir, o) = run_cfg("compare", coarse, "c.json");
    assert_eq!(o.status.code(), Some(1));
    let v = json(&dir.path().join("c.json"));
    assert!(v["reports"]
        .as_array()
        .unwrap()
        .iter()
        .any(|r| r["status"] == "fail" && r["residual"].as_f64().unwrap() > 1e-6));

    let collapse = r#"{"laws": ["schrodinger_pauli", "sp_collapse"], "params": {"k_i": 0.5},
                       "t_end": 1.0, "dt": 0.01}"#;
    let (dir, o) = run_cfg("compare", collapse, "c.json");
    assert_eq!(o.status.code(), Some(0));
    let v = json(&dir.path().join("c.json"));
    assert!(v["reports"][0]["tolerance"].is_null());
}

#[test]
fn collapse_runs() {
    // seed from the command line overrides the config
    let d = tempfile::tempdir().unwrap();
    fs::write(
        d.path().join("cfg.json"),
        r#"{"initial": {"theta": 1.5707963267948966}, "ensemble_size": 100000}"#,
    )
    .unwrap();
    let o = run(
        d.path(),
        &[
            "collapse", "--config", "cfg.json", "--seed", "7", "--out", "e.json",
        ],
    );
    assert_eq!(o.status.code(), Some(0));
    let v = json(&d.path().join("e.json"));
    let f = v["summary"]["fraction_up"].as_f64().unwrap();
    assert!((f - 0.5).abs() <= 0.005);
    assert_eq!(v["summary"]["seed"], 7);

    let (dir, o) = run_cfg(
        "collapse",
        r#"{"initial": {"theta": 1.0}, "ensemble_size": 1}"#,
        "e.json",
    );
    assert_eq!(o.status.code(), Some(0));
    let f = json(&dir.path().join("e.json"))["summary"]["fraction_up"]
        .as_f64()
        .unwrap();
    assert!(f == 0.0 || f == 1.0);
}

#[test]
fn verify_filtering() {
    let d = tempfile::tempdir().unwrap();
    let o = run(
        d.path(),
        &["verify", "--filter", "pauli*", "--out", "v.json"],
    );
    assert_eq!(o.status.code(), Some(0));
    let v = json(&d.path().join("v.json"));
    let checks: Vec<_> = v["reports"]
        .as_array()
        .unwrap()
        .iter()
        .map(|r| r["check"].as_str().unwrap().to_owned())
        .collect();
    assert_eq!(checks, ["pauli.identity"]);
    let stdout = String::from_utf8_lossy(&o.stdout);
    assert_eq!(stdout.lines().filter(|l| l.starts_with("pauli")).count(), 1);

    let o = run(
        d.path(),
        &["verify", "--filter", "equivalence.*k_1", "--out", "v.json"],
    );
    assert_eq!(o.status.code(), Some(0));
    let v = json(&d.path().join("v.json"));
    assert_eq!(v["reports"].as_array().unwrap().len(), 2);

    assert_eq!(
        run(d.path(), &["verify", "--filter", "nope*"])
            .status
            .code(),
        Some(2)
    );
}
