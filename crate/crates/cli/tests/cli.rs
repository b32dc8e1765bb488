use std::path::PathBuf;
use std::process::{Command as Process, Output, Stdio};

use proptest::prelude::*;
use serde_json::Value;
use symred_cli::report::{num, render};
use symred_cli::{exit, run, CaseConfig, Command};

fn cfg(text: &str) -> CaseConfig {
    CaseConfig::from_json_str(text).unwrap()
}

fn bin(args: &[&str]) -> Output {
    Process::new(env!("CARGO_BIN_EXE_symred"))
        .args(args)
        .stderr(Stdio::piped())
        .output()
        .unwrap()
}

fn write_config(tag: &str, text: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("symred-cli-test-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let p = dir.join(format!("{tag}.json"));
    std::fs::write(&p, text).unwrap();
    p
}

fn run_bin(verb: &str, tag: &str, text: &str, extra: &[&str]) -> (i32, Value) {
    let path = write_config(tag, text);
    let mut args = vec![verb, "--config", path.to_str().unwrap()];
    args.extend_from_slice(extra);
    let out = bin(&args);
    (out.status.code().unwrap(), serde_json::from_slice(&out.stdout).unwrap())
}

#[test]
fn flagship_verify_passes_and_is_deterministic() {
    let c = cfg(r#"{"group": "so3", "mu": [0, 0, 1], "seed": 11}"#);
    let a = run(Command::Verify, &c);
    let b = run(Command::Verify, &c);
    assert_eq!(a.exit_code, exit::OK);
    assert!(a.all_passed(), "{:?}", a.checks.iter().filter(|c| !c.passed()).collect::<Vec<_>>());
    assert_eq!(render(&a.to_json_without_timings()), render(&b.to_json_without_timings()));
    let j = a.to_json();
    assert_eq!(j["stages"]["reduce"]["sigma"], -1);
    assert_eq!(j["schema_version"], 1);
    for stage in ["setup", "validate", "connection", "reduce", "curvature"] {
        assert!(j["stages"][stage].is_object(), "{stage}");
        assert!(j["timings"][stage].is_number(), "{stage}");
    }
}

#[test]
fn seed_changes_samples_but_not_verdict() {
    let a = run(Command::Reduce, &cfg(r#"{"group": "se2", "mu": [0, 1, 0.5], "seed": 1}"#));
    let b = run(Command::Reduce, &cfg(r#"{"group": "se2", "mu": [0, 1, 0.5], "seed": 2}"#));
    assert!(a.all_passed() && b.all_passed());
    assert_ne!(a.check("reduced.torsion").unwrap().value, b.check("reduced.torsion").unwrap().value);
}

#[test]
fn negative_control_fails_only_the_parallel_check() {
    let r = run(Command::Verify, &cfg(r#"{"group": "so3", "mu": [0, 0, 1], "connection": "baseline"}"#));
    assert_eq!(r.exit_code, exit::NUMERICAL);
    let failed: Vec<&str> = r.checks.iter().filter(|c| !c.passed()).map(|c| c.name.as_str()).collect();
    assert_eq!(failed, ["connection.nabla_omega"]);
}

#[test]
fn halving_the_step_shrinks_the_curvature_gap_fourfold() {
    let base = cfg(r#"{"group": "so3", "mu": [0, 0, 1], "seed": 5}"#);
    let half = base.clone().with_overrides(None, Some(base.fd_step / 2.0), None).unwrap();
    assert_eq!(half.fd_step2, base.fd_step2 / 2.0);
    let g = |c: &CaseConfig| run(Command::Curvature, c).check("curvature.formula_vs_oracle").unwrap().value.unwrap();
    let ratio = g(&base) / g(&half);
    assert!((3.0..=5.0).contains(&ratio), "{ratio}");
}

#[test]
fn zero_dimensional_base_is_flagged() {
    let r = run(Command::Verify, &cfg(r#"{"group": "abelian(3)", "mu": [1, 2, 3]}"#));
    assert_eq!(r.exit_code, exit::OK);
    let j = r.to_json();
    assert_eq!(j["stages"]["validate"]["zero_dimensional"], true);
    assert_eq!(j["stages"]["reduce"]["skipped"], true);
    assert!(j["stages"].get("curvature").is_none());
}

#[test]
fn exit_codes_follow_error_classes() {
    let cases = [
        (r#"{"group": "so3", "mu": [0, 1]}"#, exit::CONFIG, "Config"),
        (r#"{"group": "so4", "mu": [0, 0, 1]}"#, exit::CONFIG, "InvalidInput"),
        (r#"{"group": {"dim": 2, "brackets": [[0, 1, [1, 1.0]]]}, "mu": [0, 1]}"#, exit::CONFIG, "NoRealization"),
        (r#"{"group": "sl2r", "mu": [0, 1, 0]}"#, exit::ASSUMPTION, "NonReductiveStabilizer"),
        (r#"{"group": "so3", "mu": [0, 0, 1], "s_tilde": [[1, 0, 0, 0, 0, 0]]}"#, exit::ASSUMPTION, "AssumptionTwoFailure"),
    ];
    for (text, code, kind) in cases {
        let r = run(Command::Validate, &cfg(text));
        assert_eq!(r.exit_code, code, "{text}");
        assert_eq!(r.error.as_ref().unwrap().kind, kind, "{text}");
        assert_eq!(r.to_json()["status"], "error");
    }
}

#[test]
fn binary_emits_reports_on_failure() {
    let (code, j) = run_bin("verify", "nilpotent", r#"{"group": "sl2r", "mu": [0, 1, 0]}"#, &[]);
    assert_eq!(code, 3);
    assert_eq!(j["error"]["kind"], "NonReductiveStabilizer");
    assert_eq!(j["exit_code"], 3);
    assert_eq!(j["all_checks_passed"], false);

    let (code, j) = run_bin("validate", "unknown-key", r#"{"group": "so3", "mu": [0, 0, 1], "bogus": 1}"#, &[]);
    assert_eq!(code, 2);
    assert_eq!(j["error"]["stage"], "config");

    let (code, _) = run_bin("validate", "bad-scale", r#"{"group": "so3", "mu": [0, 0, 1]}"#, &["--tol-scale=-1"]);
    assert_eq!(code, 2);
}

#[test]
fn binary_overrides_and_out_file() {
    let path = write_config("overrides", r#"{"group": "su2", "mu": [0, 0, 1]}"#);
    let out = path.with_extension("report.json");
    let o = bin(&[
        "reduce",
        "--config",
        path.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
        "--seed",
        "42",
        "--fd-step",
        "2e-5",
        "--tol-scale",
        "10",
    ]);
    assert_eq!(o.status.code(), Some(0));
    assert!(o.stdout.is_empty());
    let j: Value = serde_json::from_str(&std::fs::read_to_string(out).unwrap()).unwrap();
    assert_eq!(j["config"]["seed"], 42);
    assert_eq!(j["config"]["fd_step"].as_f64(), Some(2e-5));
    assert_eq!(j["config"]["fd_step2"].as_f64(), Some(2e-4));
    assert_eq!(j["config"]["tol"]["kks"].as_f64(), Some(1e-7));
}

#[test]
fn export_writes_coefficients_at_requested_covectors() {
    let (code, j) = run_bin(
        "export-connection",
        "export",
        r#"{"group": "heis3", "mu": [0, 0, 1], "export_xi": [[0, 0, 1], [1, 2, 3]]}"#,
        &[],
    );
    assert_eq!(code, 0);
    let samples = j["stages"]["export"]["samples"].as_array().unwrap();
    assert_eq!(samples.len(), 2);
    assert_eq!(samples[1]["gamma"].as_array().unwrap().len(), 6);
}

#[test]
fn help_documents_every_flag() {
    let o = bin(&["verify", "--help"]);
    let text = String::from_utf8(o.stdout).unwrap();
    for flag in ["--config", "--out", "--seed", "--fd-step", "--tol-scale"] {
        assert!(text.contains(flag), "{flag}");
    }
    let o = bin(&["--help"]);
    let text = String::from_utf8(o.stdout).unwrap();
    for verb in ["validate", "reduce", "curvature", "verify", "export-connection"] {
        assert!(text.contains(verb), "{verb}");
    }
}

proptest! {
    #[test]
    fn rendered_floats_round_trip(x in proptest::num::f64::NORMAL | proptest::num::f64::SUBNORMAL | proptest::num::f64::ZERO) {
        let text = render(&serde_json::json!({"x": num(x), "v": [num(x), num(-x)]}));
        let back: Value = serde_json::from_str(&text).unwrap();
        prop_assert_eq!(back["x"].as_f64().unwrap().to_bits(), x.to_bits());
        prop_assert_eq!(back["v"][1].as_f64().unwrap(), -x);
    }
}

#[test]
fn non_finite_values_render_as_null() {
    let text = render(&serde_json::json!({"x": num(f64::NAN), "y": num(f64::INFINITY)}));
    let back: Value = serde_json::from_str(&text).unwrap();
    assert!(back["x"].is_null() && back["y"].is_null());
}
