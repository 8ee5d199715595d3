use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::Value;

fn kenergy(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_kenergy"))
        .args(args)
        .env_remove("KENERGY_THREADS")
        .output()
        .expect("binary runs")
}

fn json_of(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| {
        panic!("bad JSON ({e}): {}", String::from_utf8_lossy(&out.stdout))
    })
}

fn scratch(name: &str) -> PathBuf {
    let d = std::env::temp_dir().join(format!("kenergy-cli-{}-{name}", std::process::id()));
    let _ = std::fs::remove_dir_all(&d);
    std::fs::create_dir_all(&d).unwrap();
    d
}

const IDENTITY: &str = r#"{"rows":3,"cols":3,"entries":[
  {"re":"1","im":"0"},{"re":"0","im":"0"},{"re":"0","im":"0"},
  {"re":"0","im":"0"},{"re":"1","im":"0"},{"re":"0","im":"0"},
  {"re":"0","im":"0"},{"re":"0","im":"0"},{"re":"1","im":"0"}]}"#;

#[test]
fn build_then_energy_at_identity() {
    let dir = scratch("energy");
    let inst = dir.join("conic");
    let out = kenergy(&["catalog", "build", "conic", "--out", inst.to_str().unwrap()]);
    assert!(out.status.success());
    assert!(inst.join("chow.json").exists() && inst.join("hyper_1.json").exists());
    let sigma = dir.join("id.json");
    std::fs::write(&sigma, IDENTITY).unwrap();
    let out = kenergy(&[
        "energy",
        "--instance",
        inst.to_str().unwrap(),
        "--k",
        "1",
        "--sigma",
        sigma.to_str().unwrap(),
        "--breakdown",
    ]);
    assert!(out.status.success());
    let v = json_of(&out);
    assert_eq!(v["Mk"], 0.0);
    assert_eq!(v["viaPair"], 0.0);
    assert_eq!(v["config"]["k"], 1);
    assert_eq!(v["breakdown"].as_array().unwrap().len(), 1);

    let file = inst.join("hyper_1.json");
    let v = json_of(&kenergy(&["norm", file.to_str().unwrap()]));
    assert_eq!(v["normSq"], "33/2");
    let v = json_of(&kenergy(&["weight", "--lambda", "2,-1,-1", file.to_str().unwrap()]));
    assert_eq!(v["weight"], -2);
    std::fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn degrees_and_chern() {
    let v = json_of(&kenergy(&["degrees", "--n", "2", "--deg", "2", "--mu", "1,2,2", "--k", "1"]));
    assert_eq!(v["degree"], 4);
    assert_eq!(v["muRoundTrip"], true);
    let v = json_of(&kenergy(&["derive-chern", "--n", "4", "--k", "3"]));
    assert_eq!(v["status"], "PASS");
}

#[test]
fn slopes_and_scan() {
    let v = json_of(&kenergy(&["asymptotics", "--instance", "conic", "--k", "1", "--lambda", "2,-1,-1"]));
    assert_eq!(v["Ak"], -6);
    let v = json_of(&kenergy(&[
        "asymptotics", "--instance", "quadric_surface", "--k", "2", "--lambda", "3,-1,-1,-1", "--fit",
        "1e-1:1e-6:6",
    ]));
    assert_eq!(v["Ak"], -8);
    assert!((v["fit"]["slope"].as_f64().unwrap() + 8.0).abs() < 0.08);
    let v = json_of(&kenergy(&["scan", "--instance", "conic", "--k", "1", "--bound", "3", "--json"]));
    assert_eq!(v["positive"], 0);
    assert_eq!(v["scanned"], 37);
}

#[test]
fn numeric_checks_pass() {
    for check in ["mu", "path"] {
        let v = json_of(&kenergy(&["numeric", "--instance", "conic", "--check", check]));
        assert_eq!(v["pass"], true, "{check}: {v}");
    }
}

#[test]
fn minimize_trace_is_monotone() {
    let v = json_of(&kenergy(&["minimize", "--instance", "conic", "--k", "1", "--iters", "15"]));
    let e: Vec<f64> = v["table"]
        .as_array()
        .unwrap()
        .iter()
        .map(|r| r["energy"].as_f64().unwrap())
        .collect();
    assert!(e.windows(2).all(|w| w[1] <= w[0]));
    assert!(v["finalEnergy"].as_f64().unwrap() < v["initialEnergy"].as_f64().unwrap());
}

#[test]
fn exit_codes() {
    let out = kenergy(&["energy", "--instance", "conic", "--k", "2"]);
    assert_eq!(out.status.code(), Some(1));
    let v = json_of(&out);
    assert!(v["error"]["kind"].is_string() && v["error"]["message"].is_string());

    let out = kenergy(&["weight", "--lambda", "1,1,1", "/nonexistent.json"]);
    assert_eq!(out.status.code(), Some(1));

    assert_eq!(kenergy(&["frobnicate"]).status.code(), Some(2));
    assert_eq!(kenergy(&["energy", "--k", "1"]).status.code(), Some(2));

    let out = Command::new(env!("CARGO_BIN_EXE_kenergy"))
        .args(["scan", "--instance", "conic", "--k", "1", "--bound", "1"])
        .env("KENERGY_THREADS", "zero")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn output_is_deterministic() {
    let args = ["numeric", "--instance", "conic", "--check", "gauss-bonnet", "--count", "2"];
    let a = kenergy(&args);
    let b = kenergy(&args);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    let c = Command::new(env!("CARGO_BIN_EXE_kenergy"))
        .args(args)
        .env("KENERGY_THREADS", "1")
        .output()
        .unwrap();
    let strip = |o: &Output| {
        let mut v = json_of(o);
        v.as_object_mut().unwrap().remove("config");
        v
    };
    assert_eq!(strip(&a), strip(&c));
}

#[test]
fn csv_and_pretty_formats() {
    let out = kenergy(&["minimize", "--instance", "conic", "--k", "1", "--iters", "3", "--format", "csv"]);
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.starts_with("energy,grad_norm,iter,step\n"));
    assert_eq!(text.lines().count(), 5);
    let out = kenergy(&["degrees", "--n", "1", "--N", "2", "--deg", "2", "--mu", "1,1", "--k", "1", "--format", "pretty"]);
    let v = json_of(&out);
    assert_eq!(v["degree"], 2);
    assert_eq!(v["config"]["N"], 2);
}

#[test]
fn help_describes_every_command() {
    let out = kenergy(&["--help"]);
    let text = String::from_utf8(out.stdout).unwrap();
    for cmd in [
        "catalog", "degrees", "derive-chern", "norm", "weight", "energy", "asymptotics", "scan", "numeric",
        "minimize",
    ] {
        assert!(text.contains(cmd), "{cmd}");
    }
}
