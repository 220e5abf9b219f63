use std::path::Path;
use std::process::Command;

use serde_json::{json, Value};

fn knflow(cmd: &str, config: &Value, out: &Path) -> (i32, String) {
    let path = out.join(format!("{cmd}.config.json"));
    std::fs::write(&path, serde_json::to_vec_pretty(config).unwrap()).unwrap();
    let o = Command::new(env!("CARGO_BIN_EXE_knflow"))
        .args([cmd, "--config"])
        .arg(&path)
        .arg("--out")
        .arg(out)
        .output()
        .unwrap();
    (
        o.status.code().unwrap(),
        String::from_utf8_lossy(&o.stderr).into_owned(),
    )
}

fn read_json(p: &Path) -> Value {
    serde_json::from_slice(&std::fs::read(p).unwrap()).unwrap()
}

fn log_x_flow() -> Value {
    json!({
        "command": "flow",
        "method": "oracle",
        "functional": {"library": "log-x", "K": 0, "N": -1},
        "y0": 1.0,
        "grid": {"t_end": 0.49, "samples": 400, "include": [0.375]},
        "output": "logx.csv"
    })
}

fn evi_on(input: &str, k: f64) -> Value {
    json!({
        "command": "check-evi",
        "functional": {"library": "log-x", "K": 0, "N": -1},
        "K": k,
        "N": -1,
        "form": "raw",
        "samples": 100,
        "input": input
    })
}

#[test]
fn flow_writes_oracle_curve() {
    let dir = tempfile::tempdir().unwrap();
    let (code, err) = knflow("flow", &log_x_flow(), dir.path());
    assert_eq!(code, 0, "{err}");
    let text = std::fs::read_to_string(dir.path().join("logx.csv")).unwrap();
    assert!(text.starts_with("t,x0\n"));
    assert!(text.lines().any(|l| l == "0.375,0.5"));
    assert_eq!(text.lines().count(), 402);
    let meta = read_json(&dir.path().join("logx.meta.json"));
    assert_eq!(meta["method"], "oracle");
    let manifest = read_json(&dir.path().join("manifest.json"));
    assert_eq!(manifest["outputs"], json!(["logx.csv", "logx.meta.json"]));
    assert_eq!(manifest["config_sha256"].as_str().unwrap().len(), 64);
}

#[test]
fn check_evi_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(knflow("flow", &log_x_flow(), dir.path()).0, 0);

    let (code, err) = knflow("check-evi", &evi_on("logx.csv", 0.0), dir.path());
    assert_eq!(code, 0, "{err}");
    let rep = read_json(&dir.path().join("evi.json"));
    assert_eq!(rep["pass"], true);
    assert_eq!(rep["form"], "evi_kn_raw");

    let (code, _) = knflow("check-evi", &evi_on("logx.csv", 0.5), dir.path());
    assert_eq!(code, 2);
    let rep = read_json(&dir.path().join("evi.json"));
    assert_eq!(rep["pass"], false);
    assert!(rep["worst"]["t"].is_number());
    assert!(rep["max_violation"].as_f64().unwrap() > 0.0);
}

#[test]
fn errors_exit_one() {
    let dir = tempfile::tempdir().unwrap();
    let (code, err) = knflow("flow", &json!({"command": "flow", "bogus": 1}), dir.path());
    assert_eq!(code, 1);
    assert!(err.contains("bogus"), "{err}");
    let (code, _) = knflow("check-evi", &evi_on("missing.csv", 0.0), dir.path());
    assert_eq!(code, 1);
    let (code, _) = knflow("coeff", &log_x_flow(), dir.path());
    assert_eq!(code, 1);
    assert!(!dir.path().join("manifest.json").exists());
}

#[test]
fn coeff_table() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = json!({"command": "coeff", "K": 1, "N": -1, "theta": [0, 1], "t": [0.5]});
    assert_eq!(knflow("coeff", &cfg, dir.path()).0, 0);
    let text = std::fs::read_to_string(dir.path().join("coeff.csv")).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "theta,t,sigma");
    assert_eq!(lines[1], "0,0.5,0.5");
    let sigma: f64 = lines[2].split(',').nth(2).unwrap().parse().unwrap();
    assert!((sigma - (0.5f64).sinh() / (1.0f64).sinh()).abs() < 1e-14);
}

fn correspondence_pipeline() -> Value {
    json!({"stages": [
        log_x_flow(),
        {
            "command": "reparam",
            "direction": "r1",
            "functional": {"library": "log-x", "K": 0, "N": -1},
            "input": "logx.csv",
            "output": "z.csv"
        },
        {
            "command": "check-evi",
            "form": "lambda",
            "lambda": 0,
            "functional": {"library": "fN-linear", "K": 0, "N": -1},
            "samples": 100,
            "input": "z.csv"
        }
    ]})
}

#[test]
fn correspondence_pipeline_passes() {
    let dir = tempfile::tempdir().unwrap();
    let (code, err) = knflow("pipeline", &correspondence_pipeline(), dir.path());
    assert_eq!(code, 0, "{err}");
    let manifest = read_json(&dir.path().join("manifest.json"));
    assert_eq!(
        manifest["checks"],
        json!([{"stage": 2, "command": "check-evi", "pass": true}])
    );
}

#[test]
fn perturbed_pipeline_fails_check() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = json!({"stages": [
        log_x_flow(),
        {"command": "perturb", "input": "logx.csv", "amplitude": 0.05, "seed": 3, "output": "bad.csv"},
        evi_on("bad.csv", 0.0),
        evi_on("logx.csv", 0.0)
    ]});
    let (code, err) = knflow("pipeline", &cfg, dir.path());
    assert_eq!(code, 2, "{err}");
    let checks = &read_json(&dir.path().join("manifest.json"))["checks"];
    assert_eq!(checks[0]["pass"], false);
    assert_eq!(checks[1]["pass"], true);
}

#[test]
fn pipeline_stops_at_hard_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = json!({"stages": [evi_on("missing.csv", 0.0), log_x_flow()]});
    let (code, err) = knflow("pipeline", &cfg, dir.path());
    assert_eq!(code, 1);
    assert!(err.contains("stage 0"), "{err}");
    assert!(!dir.path().join("logx.csv").exists());
}

#[test]
fn empty_pipeline_is_a_no_op() {
    let dir = tempfile::tempdir().unwrap();
    let (code, _) = knflow("pipeline", &json!({"stages": []}), dir.path());
    assert_eq!(code, 0);
    let manifest = read_json(&dir.path().join("manifest.json"));
    assert_eq!(manifest["outputs"], json!([]));
    assert_eq!(manifest["checks"], json!([]));
}

#[test]
fn reruns_are_byte_identical() {
    let cfg = json!({"stages": [
        log_x_flow(),
        {"command": "perturb", "input": "logx.csv", "seed": 11, "output": "bad.csv"},
        evi_on("bad.csv", 0.0),
        {
            "command": "audit-energy",
            "functional": {"library": "log-x", "K": 0, "N": -1},
            "input": "logx.csv",
            "window": [0.01, 0.48]
        },
        {
            "command": "check-convexity",
            "functional": {"library": "log-cosh", "K": 1, "N": -1},
            "samples": 200,
            "seed": 5
        }
    ]});
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    knflow("pipeline", &cfg, a.path());
    knflow("pipeline", &cfg, b.path());
    let mut names: Vec<_> = std::fs::read_dir(a.path())
        .unwrap()
        .map(|e| e.unwrap().file_name())
        .collect();
    names.sort();
    assert!(names.len() >= 9);
    for n in names {
        let x = std::fs::read(a.path().join(&n)).unwrap();
        let y = std::fs::read(b.path().join(&n)).unwrap();
        assert_eq!(x, y, "{n:?} differs");
    }
}
