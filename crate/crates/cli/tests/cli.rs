use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;
use smg_cert::load_controller;

fn run(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_smg-cert"))
        .current_dir(dir)
        .args(args)
        .output()
        .expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

fn generate(dir: &Path, name: &str, seed: &str, aggr: &str) {
    let out = run(dir, &["generate", "--seed", seed, "--aggressiveness", aggr, "--name", name]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
}

fn read_json(path: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn generate_is_deterministic_and_loads_back() {
    let dir = tempfile::tempdir().unwrap();
    generate(dir.path(), "a.json", "11", "1");
    generate(dir.path(), "b.json", "11", "1");
    generate(dir.path(), "c.json", "12", "1");
    let a = fs::read(dir.path().join("a.json")).unwrap();
    assert_eq!(a, fs::read(dir.path().join("b.json")).unwrap());
    assert_ne!(a, fs::read(dir.path().join("c.json")).unwrap());
    let ctrl = load_controller(dir.path().join("a.json")).unwrap();
    assert_eq!(ctrl.widths(), vec![7, 32, 32, 2]);
    let u = ctrl.forward(&[0.1, 1.0, 1.1, 0.1, 1.0, 1.1, 0.97]).unwrap();
    assert!(u.iter().all(|v| v.abs() <= 0.1));
}

#[test]
fn zero_aggressiveness_controller_is_constant_and_safe() {
    let dir = tempfile::tempdir().unwrap();
    generate(dir.path(), "z.json", "5", "0");
    let ctrl = load_controller(dir.path().join("z.json")).unwrap();
    let u0 = ctrl.forward(&[0.0; 7]).unwrap();
    let u1 = ctrl.forward(&[0.3, 1.2, 0.9, -0.2, 0.8, 1.4, 0.5]).unwrap();
    assert_eq!(u0, u1);
    let out = run(dir.path(), &["verify", "--controller", "z.json", "--no-timestamp"]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let cert = read_json(&dir.path().join("certificate.json"));
    assert_eq!(cert["saturation_free"], Value::Bool(true));
    for k in 0..2 {
        let w = cert["ub"][k].as_f64().unwrap() - cert["lb"][k].as_f64().unwrap();
        assert!(w.abs() < 1e-12, "channel {k} width {w}");
    }
}

#[test]
fn verify_and_mc_are_byte_identical_without_timestamp() {
    let dir = tempfile::tempdir().unwrap();
    generate(dir.path(), "ctrl.json", "2", "0.1");
    let mut files = Vec::new();
    for run_dir in ["r1", "r2"] {
        let out = run(dir.path(), &["verify", "--controller", "ctrl.json", "--out", run_dir, "--no-timestamp"]);
        assert_eq!(code(&out), 0, "{}", stderr(&out));
        let out = run(
            dir.path(),
            &["mc", "--controller", "ctrl.json", "--out", run_dir, "--samples", "3000", "--seed", "9", "--no-timestamp"],
        );
        assert_eq!(code(&out), 0, "{}", stderr(&out));
        files.push(
            ["certificate.json", "certificate.csv", "mc.json", "mc.csv"]
                .map(|f| fs::read(dir.path().join(run_dir).join(f)).unwrap()),
        );
    }
    assert_eq!(files[0], files[1]);
    let cert = read_json(&dir.path().join("r1/certificate.json"));
    assert!(cert.get("generated_at").is_none());

    let out = run(dir.path(), &["verify", "--controller", "ctrl.json", "--out", "r3", "--format", "json"]);
    assert_eq!(code(&out), 0);
    assert!(read_json(&dir.path().join("r3/certificate.json"))["generated_at"].is_u64());
    assert!(!dir.path().join("r3/certificate.csv").exists());
}

#[test]
fn single_sample_gives_zero_width() {
    let dir = tempfile::tempdir().unwrap();
    generate(dir.path(), "ctrl.json", "4", "1");
    let out = run(dir.path(), &["mc", "--controller", "ctrl.json", "--samples", "1", "--format", "json"]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let mc = read_json(&dir.path().join("mc.json"));
    let (lb, ub) = (mc["lb"].as_array().unwrap(), mc["ub"].as_array().unwrap());
    assert_eq!(lb, ub);
}

#[test]
fn pipeline_compare_is_sound_for_json_and_csv() {
    let dir = tempfile::tempdir().unwrap();
    generate(dir.path(), "ctrl.json", "6", "1");
    assert_eq!(code(&run(dir.path(), &["verify", "--controller", "ctrl.json", "--no-timestamp"])), 0);
    let out = run(dir.path(), &["mc", "--controller", "ctrl.json", "--samples", "5000", "--no-timestamp"]);
    assert_eq!(code(&out), 0);
    for mc in ["mc.json", "mc.csv"] {
        let out = run(dir.path(), &["compare", "--certificate", "certificate.json", "--mc", mc, "--out", "cmp"]);
        assert_eq!(code(&out), 0, "{}", stderr(&out));
        let csv = fs::read_to_string(dir.path().join("cmp/comparison.csv")).unwrap();
        assert!(csv.starts_with("controller,channel,mc_lb,mc_ub,dbbp_lb,dbbp_ub,gap_lb,gap_ub,sound,level"));
        assert_eq!(csv.lines().count(), 3);
    }
}

#[test]
fn shrunken_certificate_is_reported_unsound() {
    let dir = tempfile::tempdir().unwrap();
    generate(dir.path(), "ctrl.json", "6", "1");
    run(dir.path(), &["verify", "--controller", "ctrl.json", "--no-timestamp"]);
    run(dir.path(), &["mc", "--controller", "ctrl.json", "--samples", "2000", "--no-timestamp"]);
    let mut cert = read_json(&dir.path().join("certificate.json"));
    let mid = 0.5 * (cert["lb"][0].as_f64().unwrap() + cert["ub"][0].as_f64().unwrap());
    cert["lb"][0] = mid.into();
    cert["ub"][0] = mid.into();
    fs::write(dir.path().join("bad.json"), cert.to_string()).unwrap();
    let out = run(dir.path(), &["compare", "--certificate", "bad.json", "--mc", "mc.json"]);
    assert_eq!(code(&out), 3);
    assert!(String::from_utf8_lossy(&out.stdout).contains("UNSOUND"));
}

#[test]
fn aggressive_controller_flags_saturation_risk_confirmed_by_mc() {
    let dir = tempfile::tempdir().unwrap();
    generate(dir.path(), "ctrl.json", "1", "5");
    let out = run(dir.path(), &["verify", "--controller", "ctrl.json", "--no-timestamp"]);
    assert_eq!(code(&out), 2, "{}", stderr(&out));
    let cert = read_json(&dir.path().join("certificate.json"));
    assert_eq!(cert["excitation_within_limits"], Value::Bool(false));
    let out = run(dir.path(), &["mc", "--controller", "ctrl.json", "--samples", "5000", "--no-timestamp"]);
    assert_eq!(code(&out), 0);
    let mc = read_json(&dir.path().join("mc.json"));
    let labels = mc["labels"].as_array().unwrap();
    let saturating = cert["excitation"].as_array().unwrap().iter().any(|e| {
        let i = e["index"].as_u64().unwrap() as usize;
        assert_eq!(labels[i].as_str().unwrap(), format!("E_dem{}", i - 1));
        mc["lb"][i].as_f64().unwrap() < 0.0 || mc["ub"][i].as_f64().unwrap() > e["e_max"].as_f64().unwrap()
    });
    assert!(saturating, "sampled excitation demand never leaves the exciter range");
}

#[test]
fn missing_controller_names_path() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(dir.path(), &["verify", "--controller", "no_such_ctrl.json"]);
    assert_eq!(code(&out), 1);
    assert!(stderr(&out).contains("no_such_ctrl.json"));
}

#[test]
fn bad_config_names_field() {
    let dir = tempfile::tempdir().unwrap();
    let default = include_str!("../../core/configs/smg_default.json");
    fs::write(dir.path().join("bad.json"), default.replacen("\"H\": 1.5", "\"H\": -1.5", 1)).unwrap();
    let out = run(dir.path(), &["generate", "--config", "bad.json"]);
    assert_eq!(code(&out), 1);
    assert!(stderr(&out).contains("sg[0].H"), "{}", stderr(&out));
}

#[test]
fn usage_errors_exit_one() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(code(&run(dir.path(), &["verify", "--bogus"])), 1);
    assert_eq!(code(&run(dir.path(), &["frobnicate"])), 1);
    assert_eq!(code(&run(dir.path(), &["--help"])), 0);
}

#[test]
fn unsorted_levels_rejected() {
    let dir = tempfile::tempdir().unwrap();
    generate(dir.path(), "ctrl.json", "0", "0.1");
    let out = run(dir.path(), &["sweep", "--controller", "ctrl.json", "--levels", "0.2,0.1"]);
    assert_eq!(code(&out), 1);
    assert!(stderr(&out).contains("sorted"));
}

#[test]
fn single_level_sweep_matches_standalone_commands() {
    let dir = tempfile::tempdir().unwrap();
    generate(dir.path(), "ctrl.json", "8", "0.1");
    let common = ["--no-timestamp", "--samples", "2000", "--seed", "3"];
    let mut sweep_args = vec!["sweep", "--controller", "ctrl.json", "--levels", "0.04", "--out", "sw"];
    sweep_args.extend(common);
    let out = run(dir.path(), &sweep_args);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    run(dir.path(), &["verify", "--controller", "ctrl.json", "--no-timestamp"]);
    let mut mc_args = vec!["mc", "--controller", "ctrl.json"];
    mc_args.extend(common);
    run(dir.path(), &mc_args);
    let rows = read_json(&dir.path().join("sw/sweep.json"));
    let row = &rows.as_array().unwrap()[0];
    assert_eq!(row["certificate"], read_json(&dir.path().join("certificate.json")));
    assert_eq!(row["mc"], read_json(&dir.path().join("mc.json")));
    let plot = fs::read_to_string(dir.path().join("sw/plot_data.csv")).unwrap();
    assert!(plot.starts_with("level,radius,channel,"));
    assert!(plot.lines().nth(1).unwrap().ends_with("-0.1,0.1"));
}

#[test]
fn stable_sweep_is_monotone_and_safe() {
    let dir = tempfile::tempdir().unwrap();
    generate(dir.path(), "ctrl.json", "0", "0.1");
    let out = run(dir.path(), &["sweep", "--controller", "ctrl.json", "--samples", "1000", "--no-timestamp"]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let rows = read_json(&dir.path().join("sweep.json"));
    assert_eq!(rows.as_array().unwrap().len(), 10);
}
