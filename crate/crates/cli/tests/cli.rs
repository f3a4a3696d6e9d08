use std::path::PathBuf;
use std::process::{Command, Output};

use freeprod_cli::{run, Certificate, ConfigError, Report, RunError, TaskConfig};

fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fixtures").join(name)
}

fn freeprod(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_freeprod"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn run_fixture(name: &str, extra: &[&str]) -> (i32, Report, String) {
    let path = fixture(name);
    let mut args = vec!["--config", path.to_str().unwrap(), "--quiet"];
    args.extend_from_slice(extra);
    let out = freeprod(&args);
    let stdout = String::from_utf8(out.stdout).unwrap();
    let report: Report = serde_json::from_str(&stdout).expect("report parses");
    (out.status.code().unwrap(), report, stdout)
}

fn load(name: &str) -> TaskConfig {
    TaskConfig::from_json(&std::fs::read_to_string(fixture(name)).unwrap()).unwrap()
}

fn config_error(text: &str) -> ConfigError {
    match TaskConfig::from_json(text) {
        Err(e) => e,
        Ok(cfg) => match run(&cfg) {
            Err(RunError::Config(e)) => e,
            other => panic!("expected a config error, got {other:?}"),
        },
    }
}

#[test]
fn verify_kd_fixture_has_ratio_one() {
    let (code, report, _) = run_fixture("verify_kd_u1u2.json", &[]);
    assert_eq!(code, 0);
    assert!(report.passed);
    assert_eq!(report.get("ratio"), Some(1.0));
    assert_eq!(report.get("constant"), Some(5.0));
}

#[test]
fn haagerup_fixture_bounds() {
    let (code, report, _) = run_fixture("haagerup_g1.json", &[]);
    assert_eq!(code, 0);
    let l2 = report.get("l2_norm").unwrap();
    let t = report.get("truncated_norm").unwrap();
    assert_eq!(l2, 1.0);
    assert_eq!(l2 * report.get("constant").unwrap(), 2.0);
    assert!((t - 1.0).abs() < 1e-12);
}

#[test]
fn missing_rho_exits_two_with_a_pointer() {
    let path = fixture("malformed_missing_rho.json");
    let out = freeprod(&["--config", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    let stderr = String::from_utf8(out.stderr).unwrap();
    assert!(stderr.contains("/algebras/1/rho"), "{stderr}");
    assert!(out.stdout.is_empty());
}

#[test]
fn reports_are_byte_identical() {
    for name in [
        "verify_kd_amplified.json",
        "poisson_random.json",
        "cbnorm_rotation.json",
    ] {
        let (_, _, a) = run_fixture(name, &[]);
        let (_, _, b) = run_fixture(name, &[]);
        assert_eq!(a, b, "{name}");
        assert!(!a.contains("timing_ms"));
    }
}

#[test]
fn out_path_and_timing() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("report.json");
    let path = fixture("haagerup_g1.json");
    let status = freeprod(&[
        "--config",
        path.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
        "--timing",
        "--quiet",
    ]);
    assert_eq!(status.status.code(), Some(0));
    assert!(status.stdout.is_empty() && status.stderr.is_empty());
    let report: Report = serde_json::from_str(&std::fs::read_to_string(out).unwrap()).unwrap();
    assert!(report.timing_ms.is_some());
}

#[test]
fn seed_and_tol_overrides() {
    let (_, base, _) = run_fixture("verify_kd_amplified.json", &[]);
    assert_eq!(base.seed, Some(5));
    let (code, other, _) = run_fixture("verify_kd_amplified.json", &["--seed", "6"]);
    assert_eq!(code, 0);
    assert_eq!(other.seed, Some(6));
    assert_eq!(other.config.generator.as_ref().unwrap().seed, 6);
    assert_ne!(base.get("ed_norm"), other.get("ed_norm"));

    let (_, tight, _) = run_fixture("cbnorm_rotation.json", &["--tol", "1e-10"]);
    assert_eq!(tight.get("tol"), Some(1e-10));

    let path = fixture("haagerup_g1.json");
    let out = freeprod(&["--config", path.to_str().unwrap(), "--seed", "3"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn every_fixture_report_certifies_its_numbers() {
    for entry in std::fs::read_dir(fixture("")).unwrap() {
        let path = entry.unwrap().path();
        let name = path.file_name().unwrap().to_str().unwrap().to_string();
        if name.starts_with("malformed") {
            continue;
        }
        let report = run(&load(&name)).unwrap();
        assert!(report.passed, "{name}");
        assert!(!report.quantities.is_empty());
        let json: serde_json::Value = serde_json::from_str(&report.to_json()).unwrap();
        for q in json["quantities"].as_array().unwrap() {
            let kind = q["certificate"].as_str().unwrap();
            assert!(
                ["exact", "svd-certified", "sdp-bracketed"].contains(&kind),
                "{name}: {q}"
            );
        }
    }
}

#[test]
fn enclosure_fixture() {
    let r = run(&load("enclose_norm_u1_plus_u2.json")).unwrap();
    assert!((r.get("upper").unwrap() - 2.0 * 2f64.sqrt()).abs() < 1e-9);
    let lower = r.get("lower").unwrap();
    assert!(lower <= 2.0 && lower > 1.9);
}

#[test]
fn certificates_by_task() {
    let r = run(&load("cbnorm_rotation.json")).unwrap();
    let kind = |name: &str| r.quantities.iter().find(|q| q.name == name).unwrap().certificate;
    assert_eq!(kind("cb_norm.upper"), Certificate::SdpBracketed);
    assert_eq!(kind("tol"), Certificate::Exact);
    assert!((r.get("cb_norm.upper").unwrap() - 2f64.sqrt()).abs() < 1e-8);
}

#[test]
fn config_round_trips() {
    for name in [
        "verify_kd_u1u2.json",
        "poisson_random.json",
        "polarize_radial.json",
        "leinert_e11_e21.json",
    ] {
        let cfg = load(name);
        let text = serde_json::to_string(&cfg).unwrap();
        assert_eq!(TaskConfig::from_json(&text).unwrap(), cfg);
    }
}

#[test]
fn config_errors_point_at_the_field() {
    let e = config_error(
        r#"{"task": "verify-kd", "algebras": [{"n": 2, "rho": [[[1,0],[0,0]],[[0,0],[1,0]]]}], "element": {}, "parameters": {"L": 2}}"#,
    );
    assert_eq!(e.pointer, "/algebras/0/rho");

    let e = config_error(
        r#"{"task": "verify-kd", "algebras": [{"n": 2, "rho": [[[0.5,0],[0,0]],[[0,0],[0.5,0]]]}], "element": {}}"#,
    );
    assert_eq!(e.pointer, "/parameters/L");

    let e = config_error(r#"{"task": "frobnicate"}"#);
    assert_eq!(e.pointer, "/task");

    let e = config_error(
        r#"{"task": "haagerup", "group": {"k": 2, "coeffs": [{"word": [3], "coeff": [1, 0]}]}, "parameters": {"R": 2}}"#,
    );
    assert_eq!(e.pointer, "/group/coeffs/0/word");

    let e =
        config_error(r#"{"task": "cbnorm", "symbol": {"matrix": [[[1,0]]]}, "parameters": {"tol": 1e-6, "extra": 1}}"#);
    assert_eq!(e.pointer, "/parameters/extra");

    let uncentered = r#"{"task": "enclose-norm",
        "algebras": [{"n": 2, "rho": [[[0.5,0],[0,0]],[[0,0],[0.5,0]]]}],
        "element": {"terms": [{"coeff": [1,0], "letters": [{"algebra": 0, "matrix": [[[1,0],[0,0]],[[0,0],[0,0]]]}]}]},
        "parameters": {"L": 2}}"#;
    assert_eq!(config_error(uncentered).pointer, "/element/terms/0");

    let ragged = r#"{"task": "cbnorm", "symbol": {"matrix": [[[1,0],[0,0]],[[1,0]]]}}"#;
    assert_eq!(config_error(ragged).pointer, "/symbol/matrix/1");

    let e = config_error(r#"{"version": 9, "task": "cbnorm", "symbol": {"matrix": [[[1,0]]]}}"#);
    assert_eq!(e.pointer, "/version");
}

#[test]
fn failed_checks_fail_the_report() {
    let cfg = load("haagerup_g1.json");
    let mut report = run(&cfg).unwrap();
    assert!(report.passed);
    report.note("informational", 2.0, 1.0);
    assert!(report.passed);
    report.check("enforced", 2.0, 1.0);
    assert!(!report.passed);
    assert_eq!(report.assertions.iter().filter(|a| !a.passed).count(), 2);
}
