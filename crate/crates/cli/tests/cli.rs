use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn config(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs").join(name)
}

fn pcone(args: &[&str], out: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_pcone"))
        .args(args)
        .arg("--out")
        .arg(out)
        .output()
        .expect("binary runs")
}

fn run_config(command: &str, name: &str) -> Value {
    let tmp = tempfile::tempdir().unwrap();
    let path = config(name);
    let out = pcone(&[command, "--config", path.to_str().unwrap()], tmp.path());
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let report: Value = serde_json::from_slice(&std::fs::read(tmp.path().join("report.json")).unwrap()).unwrap();
    assert_eq!(report["tool"], "pcone");
    assert_eq!(report["command"], command);
    report["results"].clone()
}

fn write_config(dir: &Path, text: &str) -> PathBuf {
    let path = dir.join("config.json");
    std::fs::write(&path, text).unwrap();
    path
}

#[test]
fn dirac_axioms_all_pass() {
    let r = run_config("axioms", "axioms_dirac.json");
    assert_eq!(r["report"]["all_pass"], true);
    assert_eq!(r["flags"].as_array().unwrap().len(), 0);
}

#[test]
fn cone_gaussian_axioms_flag_asymmetry_and_sub_distribution() {
    let r = run_config("axioms", "axioms_cone_gaussian.json");
    let flags: Vec<&str> = r["flags"]
        .as_array()
        .unwrap()
        .iter()
        .map(|v| v.as_str().unwrap())
        .collect();
    assert!(flags.contains(&"sub-distribution"));
    assert!(flags.contains(&"asymmetry"));
    assert!(r["report"]["symmetry"]["witness"].is_object());
}

#[test]
fn halving_map_is_banach() {
    let r = run_config("classify", "classify_scale.json");
    assert_eq!(r["passing"]["banach"], serde_json::json!([0.6]));
    assert_eq!(r["certificates"]["banach"][0]["witness"], Value::Null);
}

#[test]
fn identity_fails_kannan_with_witness() {
    let r = run_config("classify", "classify_identity.json");
    let cert = &r["certificates"]["kannan"][0];
    assert_eq!(cert["pass"], false);
    assert!(cert["witness"]["t"].is_number());
}

#[test]
fn rotation_sweep_reports_every_alpha() {
    let r = run_config("classify", "classify_rotation_sweep.json");
    let certs = r["certificates"]["kannan"].as_array().unwrap();
    assert_eq!(certs.len(), 8);
    assert!(r["notes"][0].as_str().unwrap().contains("T(0) = 0"));
}

#[test]
fn rotation_orbit_shrinks_geometrically() {
    let r = run_config("solve", "solve_rotation.json");
    assert_eq!(r["trace"]["stopped_reason"], "converged");
    for ratio in r["norm_ratios"].as_array().unwrap().iter().take(40) {
        assert!((ratio.as_f64().unwrap() - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-9);
    }
    for c in r["trace"]["limit"].as_array().unwrap() {
        assert!(c.as_f64().unwrap().abs() < 1e-9);
    }
    assert_eq!(r["uniqueness"]["unique"], true);
}

#[test]
fn constant_map_lands_on_its_value_after_one_step() {
    let tmp = tempfile::tempdir().unwrap();
    let path = config("solve_constant.json");
    let out = pcone(&["solve", "--config", path.to_str().unwrap()], tmp.path());
    assert!(out.status.success());
    let report: Value = serde_json::from_slice(&std::fs::read(tmp.path().join("report.json")).unwrap()).unwrap();
    let r = &report["results"];
    assert_eq!(r["trace"]["limit"], serde_json::json!([0.3, 0.3]));
    assert_eq!(r["bounds"]["holds"], true);
    let csv = std::fs::read_to_string(tmp.path().join("trace.csv")).unwrap();
    let second = csv.lines().nth(2).unwrap();
    assert!(second.starts_with("1,0.3,0.3,"), "{second}");
}

#[test]
fn shift_runs_to_max_iter() {
    let r = run_config("solve", "solve_shift.json");
    assert_eq!(r["trace"]["stopped_reason"], "max_iter");
    assert_eq!(r["trace"]["n_iters"], 50);
    assert_eq!(r["fixed_point"]["is_fixed"], false);
}

#[test]
fn linear_volterra_matches_exponential() {
    let r = run_config("sie", "sie_linear.json");
    assert!((r["conditions"]["k_const"].as_f64().unwrap() - 0.4).abs() < 1e-12);
    assert_eq!(r["warnings"].as_array().unwrap().len(), 0);
    assert!((r["mean_at_end"].as_f64().unwrap() - 0.4f64.exp()).abs() < 1e-6);
}

#[test]
fn non_contractive_volterra_warns_but_solves() {
    let r = run_config("sie", "sie_not_contractive.json");
    assert_eq!(r["conditions"]["satisfied"], false);
    assert!(r["warnings"][0]
        .as_str()
        .unwrap()
        .starts_with("conditions not satisfied"));
    assert!(r["iterations"].as_u64().unwrap() > 1);
}

#[test]
fn zero_nonlinearity_takes_one_iteration() {
    let r = run_config("sie", "sie_zero.json");
    assert_eq!(r["iterations"], 1);
    assert_eq!(r["converged"], true);
}

#[test]
fn malformed_config_exits_2_and_names_the_field() {
    let tmp = tempfile::tempdir().unwrap();
    let path = write_config(
        tmp.path(),
        r#"{"space": {"dim": 2, "distance": {"kind": "cone-gaussian", "cone": {"type": "orthant", "dim": 2}, "delta": "half"}}, "n_points": 5}"#,
    );
    let out = pcone(&["axioms", "--config", path.to_str().unwrap()], tmp.path());
    assert_eq!(out.status.code(), Some(2));
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("space.distance.delta"), "{stderr}");
    assert!(!tmp.path().join("report.json").exists());
}

#[test]
fn unknown_field_and_bad_mapping_exit_2() {
    let tmp = tempfile::tempdir().unwrap();
    let path = write_config(
        tmp.path(),
        r#"{"space": {"dim": 2, "distance": {"kind": "dirac"}}, "mapping": "rotate-all", "x0": [1, 0], "eps": 0.1}"#,
    );
    let out = pcone(&["solve", "--config", path.to_str().unwrap()], tmp.path());
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("mapping"));

    let path = write_config(tmp.path(), r#"{"problem": {}, "eps": 0.1, "iterations": 3}"#);
    let out = pcone(&["sie", "--config", path.to_str().unwrap()], tmp.path());
    assert_eq!(out.status.code(), Some(2));

    let path = write_config(
        tmp.path(),
        r#"{"space": {"dim": 2, "distance": {"kind": "dirac"}}, "mapping": "rotation-half", "x0": [1, 0, 0], "eps": 0.1}"#,
    );
    let out = pcone(&["solve", "--config", path.to_str().unwrap()], tmp.path());
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn divergence_exits_1_and_keeps_the_trace() {
    let tmp = tempfile::tempdir().unwrap();
    let path = write_config(
        tmp.path(),
        r#"{"space": {"dim": 1, "distance": {"kind": "dirac"}}, "mapping": "scale:1e200", "x0": [1], "eps": 0.1}"#,
    );
    let out = pcone(&["solve", "--config", path.to_str().unwrap()], tmp.path());
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("diverg"));
    assert!(tmp.path().join("trace.csv").exists());
}

#[test]
fn seed_flag_overrides_config_seed() {
    let tmp = tempfile::tempdir().unwrap();
    let path = config("axioms_dirac.json");
    let out = pcone(
        &["axioms", "--config", path.to_str().unwrap(), "--seed", "99"],
        tmp.path(),
    );
    assert!(out.status.success());
    let report: Value = serde_json::from_slice(&std::fs::read(tmp.path().join("report.json")).unwrap()).unwrap();
    assert_eq!(report["seed"], 99);
    assert_eq!(report["results"]["report"]["seed"], 99);
}

#[test]
fn zero_workers_is_rejected() {
    let tmp = tempfile::tempdir().unwrap();
    let out = pcone(&["demo", "--workers", "0"], tmp.path());
    assert_eq!(out.status.code(), Some(2));
}
