use std::path::Path;
use std::process::{Command, Output};

use mmse_workbench::experiment::{ExperimentConfig, Sidecar, CSV_HEADER};

fn mmse(args: &[&str], threads: usize) -> Output {
    Command::new(env!("CARGO_BIN_EXE_mmse"))
        .args(args)
        .env("MMSE_THREADS", threads.to_string())
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn metric(csv: &str, name: &str) -> Vec<f64> {
    // trailing fields never contain commas
    csv.lines()
        .skip(1)
        .filter_map(|l| {
            let f: Vec<&str> = l.rsplitn(4, ',').collect();
            (f[2] == name).then(|| f[1].parse().unwrap())
        })
        .collect()
}

const RLC: &str = r#"{"model":"rlc","m":8,"n":4}"#;

#[test]
fn rlc_curve_endpoints() {
    let csv = stdout(&mmse(
        &["mmse-curve", "--params", RLC, "--rho-grid", "0,1", "--trials", "50", "--full-rank"],
        2,
    ));
    assert_eq!(csv.lines().next().unwrap(), CSV_HEADER);
    assert_eq!(metric(&csv, "nmmse"), vec![0.0, 0.5]);
}

#[test]
fn identical_runs_are_byte_identical() {
    let args = ["stability", "--params", RLC, "--trials", "40", "--seed", "5", "--estimator", "f2_round"];
    let a = stdout(&mmse(&args, 1));
    let b = stdout(&mmse(&args, 4));
    let c = stdout(&mmse(&args, 4));
    assert_eq!(a, b);
    assert_eq!(b, c);
}

#[test]
fn unknown_estimator_is_usage_error() {
    let out = mmse(&["stability", "--params", RLC, "--estimator", "magic"], 1);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("posterior_mean") && err.contains("lll_subset_indicator"), "{err}");
}

#[test]
fn invalid_field_names_the_field() {
    let out = mmse(&["mmse-curve", "--params", RLC, "--rho-grid", "0,1.5"], 1);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("rho_grid"));
    let out = mmse(&["mmse-curve"], 1);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("params"));
}

#[test]
fn budget_error_is_runtime_error() {
    let out = mmse(&["mmse-curve", "--params", r#"{"model":"rlc","m":80,"n":40}"#, "--trials", "1"], 1);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("budget"));
}

#[test]
fn config_file_with_flag_overrides() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("cfg.json");
    std::fs::write(
        &cfg,
        r#"{"command":"stability","params":{"model":"gss","N":8,"k":2},"rho_grid":[0.5],"trials":7,"seed":3}"#,
    )
    .unwrap();
    let csv_path = dir.path().join("out.csv");
    let out = mmse(
        &[
            "mmse-curve",
            "--config",
            cfg.to_str().unwrap(),
            "--trials",
            "9",
            "--output",
            csv_path.to_str().unwrap(),
            "--svg",
        ],
        2,
    );
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = std::fs::read_to_string(&csv_path).unwrap();
    assert!(csv.lines().skip(1).all(|l| l.starts_with("gss,") && l.contains(",0.5,9,")));
    assert!(metric(&csv, "nmmse").len() == 1);

    let sidecar: Sidecar = serde_json::from_str(&std::fs::read_to_string(csv_path.with_extension("json")).unwrap()).unwrap();
    assert_eq!(sidecar.config.trials, 9);
    assert_eq!(sidecar.config.seed, 3);
    assert_eq!(sidecar.config.command.name(), "mmse-curve");
    assert_eq!(sidecar.rows.len(), csv.lines().count() - 1);
    let echo = serde_json::to_string(&sidecar.config).unwrap();
    assert_eq!(serde_json::from_str::<ExperimentConfig>(&echo).unwrap(), sidecar.config);
    assert!(Path::new(&csv_path.with_extension("svg")).exists());
}
