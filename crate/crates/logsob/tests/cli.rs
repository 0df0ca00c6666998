use std::process::Command as Process;

use logsob::config::{Command, Ineq, ScenarioConfig};
use logsob::execute;
use logsob::report::Status;
use serde_json::Value;

fn json(out: &logsob::Output, name: &str) -> Value {
    serde_json::from_slice(out.file(name).unwrap()).unwrap()
}

fn bin() -> Process {
    Process::new(env!("CARGO_BIN_EXE_logsob"))
}

#[test]
fn verify_wls_example() {
    let c = ScenarioConfig { r: Some(4.0), ..Default::default() };
    let out = execute(&c).unwrap();
    assert_eq!(out.exit_code(), 0);
    let v = json(&out, "report.json");
    let r = &v["result"]["reports"][0];
    assert!(r["residual"].as_f64().unwrap() >= -r["error_budget"].as_f64().unwrap());
    assert_eq!(v["config_hash"].as_str().unwrap(), c.hash());
    let csv = String::from_utf8(out.file("profile.csv").unwrap().to_vec()).unwrap();
    assert!(csv.starts_with("# logsob-csv/1 profile config="));
    assert_eq!(csv.lines().nth(1), Some("node,weight,value"));
}

#[test]
fn verify_each_inequality() {
    for ineq in [Ineq::InterpolationGap, Ineq::Mazya, Ineq::LogHardyChain, Ineq::Hardy, Ineq::LorentzSobolev] {
        let c = ScenarioConfig { ineq, r: Some(4.0), ..Default::default() };
        let out = execute(&c).unwrap();
        assert_eq!(out.status, Status::Ok, "{ineq:?}");
    }
    let g2 = ScenarioConfig { ineq: Ineq::Mazya, weight: "g2".into(), r: Some(5.0), ..Default::default() };
    let out = execute(&g2).unwrap();
    assert_eq!(out.status, Status::Ok);
    assert_eq!(json(&out, "report.json")["result"]["profile"], "cylindrical");
    let plane = ScenarioConfig { ineq: Ineq::LogHardyChain, set: "hyperplane".into(), ..Default::default() };
    assert_eq!(execute(&plane).unwrap().status, Status::Ok);
}

#[test]
fn window_policy() {
    let c = ScenarioConfig { ineq: Ineq::LogHardy, a: 0.6, ..Default::default() };
    let out = execute(&c).unwrap();
    assert_eq!(out.exit_code(), 3);
    assert!(out.warnings[0].contains("outside the admissible window (-1.5, 0.5)"));
    let c = ScenarioConfig { policy: logsob::config::Policy::Strict, ..c };
    assert_eq!(execute(&c).unwrap_err().exit_code(), 2);
}

#[test]
fn deterministic_outputs() {
    let c = ScenarioConfig { ineq: Ineq::InterpolationGap, r: Some(3.5), ..Default::default() };
    let a = execute(&c).unwrap();
    let b = execute(&ScenarioConfig { out: "other".into(), ..c }).unwrap();
    assert_eq!(a.files, b.files);
}

#[test]
fn best_constant_small() {
    let mut c = ScenarioConfig {
        command: Command::BestConstant,
        r: Some(4.0),
        gamma: Some(3.0),
        ..Default::default()
    };
    c.optimize.bumps = 3;
    c.optimize.restarts = 2;
    c.optimize.max_iter = 25;
    c.optimize.nodes = 1024;
    let out = execute(&c).unwrap();
    let v = json(&out, "best_constant.json");
    assert_eq!(v["result"]["monotone"], true);
    assert_eq!(v["result"]["restarts"].as_array().unwrap().len(), 2);
    let trace = String::from_utf8(out.file("trace.csv").unwrap().to_vec()).unwrap();
    assert_eq!(trace.lines().nth(1), Some("iteration,Q,A,D,diagnostic"));
    assert_eq!(out.files, execute(&c).unwrap().files);
}

#[test]
fn capacity_ball_and_mazya_table() {
    let c = ScenarioConfig { command: Command::Capacity, set: "ball".into(), r: Some(4.0), ..Default::default() };
    let out = execute(&c).unwrap();
    assert_eq!(out.status, Status::Ok);
    let v = json(&out, "capacity.json");
    assert!(v["result"]["relative_gap"].as_f64().unwrap().abs() < 0.02);
    assert!(out.file("mazya.csv").is_some());
}

#[test]
fn sweep_is_ordered_and_skips_invalid_points() {
    let mut c = ScenarioConfig { command: Command::Sweep, ineq: Ineq::Wls, ..Default::default() };
    c.sweep.n = vec![3, 4];
    c.sweep.p = vec![1.5, 2.0];
    c.sweep.r = vec![3.0, 4.5];
    let out = execute(&c).unwrap();
    let v = json(&out, "sweep.json");
    let pts = v["result"].as_array().unwrap();
    assert_eq!(pts.len(), 8);
    let order: Vec<(u64, f64, f64)> = pts
        .iter()
        .map(|p| (p["N"].as_u64().unwrap(), p["p"].as_f64().unwrap(), p["r"].as_f64().unwrap()))
        .collect();
    assert_eq!(order[0], (3, 1.5, 3.0));
    assert_eq!(order[7], (4, 2.0, 4.5));
    // r = 4.5 exceeds p* = 3 at (N, p) = (3, 1.5).
    assert!(pts[1]["reason"].as_str().unwrap().starts_with("skipped"));
    assert_eq!(out.exit_code(), 0);
}

#[test]
fn binary_exit_codes_and_config_file() {
    let dir = tempfile::tempdir().unwrap();
    let st = bin()
        .args(["verify", "--ineq", "wls", "--weight", "g1", "--N", "3", "--p", "2", "--r", "4", "--out"])
        .arg(dir.path().join("a"))
        .status()
        .unwrap();
    assert_eq!(st.code(), Some(0));
    assert!(dir.path().join("a/report.json").exists());
    let bad = bin().args(["verify", "--N", "3", "--p", "3", "--r", "4"]).output().unwrap();
    assert_eq!(bad.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&bad.stderr).contains("1 < p < N"));
    let cfg = dir.path().join("s.toml");
    std::fs::write(&cfg, "ineq = 'hardy'\nN = 4\np = 2.0\n").unwrap();
    let st = bin().arg("verify").arg("--config").arg(&cfg).arg("--out").arg(dir.path().join("b")).status().unwrap();
    assert_eq!(st.code(), Some(0));
    let v: Value = serde_json::from_slice(&std::fs::read(dir.path().join("b/report.json")).unwrap()).unwrap();
    assert_eq!(v["config"]["N"], 4);
    assert_eq!(v["result"]["reports"][0]["kind"], "hardy");
}
