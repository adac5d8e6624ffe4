use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn run(args: &[&str], out: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_halfline"))
        .args(args)
        .arg("--out")
        .arg(out)
        .output()
        .expect("binary runs")
}

fn diagnostics(out: &Path) -> serde_json::Value {
    serde_json::from_str(&fs::read_to_string(out.join("diagnostics.json")).unwrap()).unwrap()
}

#[test]
fn validate_scalar_drift_reports_y_norm() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&["validate", "--preset", "scalar-drift"], dir.path());
    assert_eq!(o.status.code(), Some(0));
    let norm = diagnostics(dir.path())["result"]["y_norm"]["value"].as_f64().unwrap();
    assert!((norm - 4.0).abs() < 1e-4, "{norm}");
    assert!(String::from_utf8_lossy(&o.stdout).contains("y_norm"));
}

#[test]
fn validate_rejects_slow_forcing() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&["validate", "--preset", "power-forcing", "--delta", "0"], dir.path());
    assert_eq!(o.status.code(), Some(2));
    assert_eq!(diagnostics(dir.path())["status"], "invalid");
}

#[test]
fn unknown_preset_and_bad_config_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(run(&["solve", "--preset", "nope"], dir.path()).status.code(), Some(2));
    let cfg = dir.path().join("bad.json");
    fs::write(&cfg, r#"{"preset": "linear", "tolerance": 1}"#).unwrap();
    let o = run(&["solve", "--config", cfg.to_str().unwrap()], dir.path());
    assert_eq!(o.status.code(), Some(2));
    assert_eq!(run(&["solve", "--preset", "linear", "--tol", "-1"], dir.path()).status.code(), Some(2));
}

#[test]
fn cascade_budget_exhaustion_exits_3_with_partial_report() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(
        &["solve", "--preset", "power-forcing", "--max-doublings", "1", "--tol", "1e-6"],
        dir.path(),
    );
    assert_eq!(o.status.code(), Some(3));
    let d = diagnostics(dir.path());
    assert_eq!(d["status"], "not-converged");
    assert_eq!(d["cascade"]["horizons"].as_array().unwrap().len(), 2);
    assert!(dir.path().join("cascade.csv").exists());
}

#[test]
fn solve_is_deterministic() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let args = ["solve", "--preset", "obstacle", "--R", "4", "--n0", "8"];
    assert_eq!(run(&args, a.path()).status.code(), Some(0));
    assert_eq!(run(&args, b.path()).status.code(), Some(0));
    for name in ["solution.csv", "diagnostics.json", "cascade.csv"] {
        assert_eq!(
            fs::read(a.path().join(name)).unwrap(),
            fs::read(b.path().join(name)).unwrap(),
            "{name}"
        );
    }
}

#[test]
fn config_echo_reproduces_the_run() {
    let first = tempfile::tempdir().unwrap();
    let o = run(
        &["solve", "--preset", "power-forcing", "--delta", "0.5", "--x", "2", "--R", "3", "--n0", "6"],
        first.path(),
    );
    assert_eq!(o.status.code(), Some(0));
    let echo = first.path().join("echo.json");
    let config = diagnostics(first.path())["config"].clone();
    fs::write(&echo, serde_json::to_string(&config).unwrap()).unwrap();

    let second = tempfile::tempdir().unwrap();
    let o = run(&["solve", "--config", echo.to_str().unwrap()], second.path());
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(
        fs::read(first.path().join("solution.csv")).unwrap(),
        fs::read(second.path().join("solution.csv")).unwrap()
    );
    assert_eq!(diagnostics(second.path())["config"], config);
}

#[test]
fn solution_csv_layout() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&["solve", "--preset", "scalar-drift"], dir.path());
    assert_eq!(o.status.code(), Some(0));
    let text = fs::read_to_string(dir.path().join("solution.csv")).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("t,u_1"));
    let rows: Vec<(f64, f64)> = lines
        .map(|l| {
            let mut it = l.split(',').map(|v| v.parse::<f64>().unwrap());
            (it.next().unwrap(), it.next().unwrap())
        })
        .collect();
    assert_eq!(rows.len(), 1001);
    let err = rows.iter().map(|(t, u)| (u - (5.0 - t)).abs()).fold(0.0, f64::max);
    assert!(err <= 5e-3, "{err}");
}

#[test]
fn sweeps_write_tables() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&["sweep-lambda", "--preset", "linear", "--horizon", "4", "--lambdas", "1,0.1,0.01"], dir.path());
    assert_eq!(o.status.code(), Some(0));
    let table = fs::read_to_string(dir.path().join("sweep_lambda.csv")).unwrap();
    assert_eq!(table.lines().count(), 4);

    let o = run(&["sweep-n", "--preset", "linear", "--R", "2", "--horizons", "4,8,16"], dir.path());
    assert_eq!(o.status.code(), Some(0));
    let table = fs::read_to_string(dir.path().join("sweep_n.csv")).unwrap();
    assert!(table.starts_with("horizon,window_gap_to_previous"));

    let o = run(
        &["viscosity", "--preset", "linear", "--R", "2", "--n0", "4", "--eps", "0.2,0.1"],
        dir.path(),
    );
    assert_eq!(o.status.code(), Some(0));
    let table = fs::read_to_string(dir.path().join("viscosity.csv")).unwrap();
    assert!(table.starts_with("eps,sup_error,solver_status,horizon_used\n"));
    assert_eq!(table.lines().count(), 3);
}

#[test]
fn semigroup_and_variational_commands() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&["semigroup", "--preset", "linear", "--R", "2", "--n0", "4", "--tol", "1e-5"], dir.path());
    assert_eq!(o.status.code(), Some(0));
    let d = diagnostics(dir.path());
    assert_eq!(d["result"]["law"]["pass"], true);
    assert!(d["result"]["generator"]["max_error"].as_f64().unwrap() < 1e-3);

    let o = run(&["variational", "--preset", "obstacle", "--horizon", "3", "--h", "0.05"], dir.path());
    assert_eq!(o.status.code(), Some(0));
    let gap = diagnostics(dir.path())["result"]["bvp_sup_distance"].as_f64().unwrap();
    assert!(gap < 1e-6, "{gap}");
}
