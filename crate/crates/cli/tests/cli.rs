//! End-to-end checks of the binary: flag handling, exit codes, output
//! stability, and the documented defaults.

use std::path::PathBuf;
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_wsncov"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn metric(out: &Output, name: &str) -> f64 {
    stdout(out)
        .lines()
        .find(|l| l.split_whitespace().next() == Some(name))
        .unwrap_or_else(|| panic!("no row {name}"))
        .split_whitespace()
        .nth(1)
        .unwrap()
        .parse()
        .unwrap()
}

fn tmp(name: &str) -> PathBuf {
    let dir = PathBuf::from(env!("CARGO_TARGET_TMPDIR"));
    std::fs::create_dir_all(&dir).unwrap();
    dir.join(name)
}

#[test]
fn analyze_reports_closed_forms() {
    let out = run(&["analyze", "--density-km2", "80", "--rs", "80", "--tau", "0", "--r", "0"]);
    assert!(out.status.success());
    assert!((metric(&out, "nu_tau") - 0.7998).abs() < 1e-3);
    assert!((metric(&out, "density_per_m2") - 8e-5).abs() < 1e-18);
    assert_eq!(metric(&out, "eta_tau"), 1.0);
}

#[test]
fn analyze_with_empty_network() {
    let out = run(&["analyze", "--lambda", "0", "--rs", "80", "--tau", "10", "--r", "50"]);
    assert!(out.status.success());
    assert_eq!(metric(&out, "nu_tau"), 0.0);
    assert_eq!(metric(&out, "vacancy_tau"), 1.0);
    assert_eq!(metric(&out, "mu_tau"), 0.0);
    assert_eq!(metric(&out, "beta_tau"), 0.0);
    assert!(stdout(&out).contains("eta_tau              nan"));
}

#[test]
fn no_profile_matches_zero_tolerance() {
    let a = run(&["analyze", "--no-profile", "--tau", "10", "--rs", "150", "--r", "100"]);
    let b = run(&["analyze", "--tau", "0", "--rs", "150", "--r", "100"]);
    assert!(a.status.success() && b.status.success());
    assert_eq!(stdout(&a), stdout(&b));
}

#[test]
fn analyze_json_embeds_resolved_config() {
    let out = run(&["analyze", "--format", "json", "--m", "2"]);
    assert!(out.status.success());
    let doc: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(doc["config"]["density_per_km2"], 20.0);
    assert_eq!(doc["config"]["sensing_radius_m"], 150.0);
    assert_eq!(doc["config"]["tolerance"], 5.0);
    assert!(doc["metrics"]["mu_max"].as_f64().unwrap() > 0.27);
}

#[test]
fn invalid_parameters_exit_2() {
    for args in [
        vec!["analyze", "--lambda=-4"],
        vec!["analyze", "--lambda", "1e-5", "--density-km2", "10"],
        vec!["analyze", "--w", "0"],
        vec!["analyze", "--tau=-1"],
        vec!["analyze", "--m", "0"],
        vec!["simulate", "--replications", "0"],
        vec!["figure", "5"],
        vec!["figure", "1", "--m", "3"],
    ] {
        let out = run(&args);
        assert_eq!(out.status.code(), Some(2), "args {args:?}");
    }
}

#[test]
fn simulate_is_deterministic_for_a_seed() {
    let args = [
        "simulate",
        "--density-km2",
        "30",
        "--seed",
        "99",
        "--replications",
        "20",
        "--test-points",
        "400",
        "--window",
        "800",
    ];
    let a = run(&args);
    let b = run(&args);
    assert!(a.status.success());
    assert_eq!(stdout(&a), stdout(&b));

    // the environment variable supplies the default seed
    let via_env = bin()
        .args([
            "simulate",
            "--density-km2",
            "30",
            "--replications",
            "20",
            "--test-points",
            "400",
            "--window",
            "800",
        ])
        .env("WSNCOV_SEED", "99")
        .output()
        .unwrap();
    assert_eq!(stdout(&a), stdout(&via_env));
}

#[test]
fn simulate_single_replication_reports_undefined_error() {
    let out = run(&[
        "simulate",
        "--replications",
        "1",
        "--test-points",
        "400",
        "--window",
        "800",
    ]);
    assert!(out.status.success());
    let nu_row = stdout(&out)
        .lines()
        .find(|l| l.starts_with("nu_tau"))
        .unwrap()
        .to_string();
    assert!(nu_row.ends_with("nan"), "row: {nu_row}");
}

#[test]
fn simulate_check_passes_on_matching_configuration() {
    let out = run(&[
        "simulate",
        "--density-km2",
        "20",
        "--seed",
        "7",
        "--replications",
        "60",
        "--test-points",
        "900",
        "--window",
        "1500",
        "--check",
    ]);
    assert!(out.status.success(), "stderr: {:?}", String::from_utf8(out.stderr));
}

#[test]
fn figure1_is_reproducible_and_sane() {
    let path = tmp("fig1.csv");
    let args = ["figure", "1", "--out", path.to_str().unwrap()];
    let out = run(&args);
    assert!(out.status.success());
    assert!(stdout(&out).contains("rows ->"));

    let csv = std::fs::read_to_string(&path).unwrap();
    let mut lines = csv.lines();
    assert_eq!(
        lines.next().unwrap(),
        "lambda_per_m2,w_per_m,nu_0,nu_tau,eta_tau"
    );
    for line in lines {
        let eta: f64 = line.rsplit(',').next().unwrap().parse().unwrap();
        assert!(eta >= 1.0);
    }
    let summary = std::fs::read_to_string(path.with_extension("json")).unwrap();

    run(&args);
    assert_eq!(csv, std::fs::read_to_string(&path).unwrap());
    assert_eq!(
        summary,
        std::fs::read_to_string(path.with_extension("json")).unwrap()
    );
}

#[test]
fn figure3_peak_independent_of_region() {
    let path = tmp("fig3.csv");
    let out = run(&[
        "figure",
        "3",
        "--m",
        "1",
        "--r",
        "100",
        "--r",
        "300",
        "--out",
        path.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    let doc: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(path.with_extension("json")).unwrap())
            .unwrap();
    let peaks: Vec<&str> = doc["findings"]
        .as_array()
        .unwrap()
        .iter()
        .filter(|f| f["metric"] == "optimal_density_per_m2")
        .map(|f| f["note"].as_str().unwrap())
        .collect();
    assert_eq!(peaks.len(), 2);
    assert_eq!(peaks[0], peaks[1], "analytic peaks differ between radii");
}

#[test]
fn sweep_round_trip_and_errors() {
    let spec_path = tmp("sweep_spec.json");
    let out_path = tmp("sweep_out.csv");
    std::fs::write(
        &spec_path,
        r#"{"variable": "tolerance",
            "grid": {"values": [0, 2, 5, 10]},
            "fixed": {"density_per_m2": 2e-5}}"#,
    )
    .unwrap();
    let out = run(&[
        "sweep",
        spec_path.to_str().unwrap(),
        "--out",
        out_path.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    let csv = std::fs::read_to_string(&out_path).unwrap();
    assert_eq!(csv.lines().count(), 5); // header + 4 grid points
    // sensed fraction nondecreasing in tolerance
    let nu: Vec<f64> = csv
        .lines()
        .skip(1)
        .map(|l| l.split(',').nth(2).unwrap().parse().unwrap())
        .collect();
    assert!(nu.windows(2).all(|w| w[0] <= w[1]));

    // swept variable also fixed: bad spec
    let bad = tmp("sweep_bad.json");
    std::fs::write(
        &bad,
        r#"{"variable": "tolerance", "grid": {"values": [0, 1]}, "fixed": {"tolerance": 5}}"#,
    )
    .unwrap();
    assert_eq!(run(&["sweep", bad.to_str().unwrap()]).status.code(), Some(2));

    // malformed json: bad spec
    let broken = tmp("sweep_broken.json");
    std::fs::write(&broken, "{").unwrap();
    assert_eq!(
        run(&["sweep", broken.to_str().unwrap()]).status.code(),
        Some(2)
    );

    // unwritable output: i/o failure
    let out = run(&[
        "sweep",
        spec_path.to_str().unwrap(),
        "--out",
        "/nonexistent-dir/out.csv",
    ]);
    assert_eq!(out.status.code(), Some(4));
}

#[test]
fn validate_small_grid_passes() {
    let path = tmp("report.csv");
    let out = run(&[
        "validate",
        "--replications",
        "40",
        "--test-points",
        "900",
        "--window",
        "1500",
        "--out",
        path.to_str().unwrap(),
    ]);
    assert!(
        out.status.success(),
        "stdout: {} stderr: {:?}",
        stdout(&out),
        String::from_utf8(out.stderr)
    );
    assert!(stdout(&out).contains("within 4 standard errors"));
    let report = std::fs::read_to_string(&path).unwrap();
    assert_eq!(report.lines().count(), 25); // header + 24 cells
    assert!(path.with_extension("json").exists());
}
