use std::fs;
use std::process::{Command, Output};

use serde_json::Value;

fn invode(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_invode"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn json_stdout(out: &Output) -> Value {
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).expect("stdout is json")
}

#[test]
fn solve_prints_a_json_report() {
    let v = json_stdout(&invode(&["solve", "--preset", "fig2"]));
    assert_eq!(v["kind"], "solve");
    assert_eq!(v["partial"], false);
    let run = &v["runs"][0];
    assert_eq!(run["spec"]["scheme"], "invariant_implicit");
    assert!(run["max_error"].as_f64().unwrap() < 1e-2);
}

#[test]
fn config_file_overrides_flags_which_override_the_preset() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.cfg");
    fs::write(&cfg, "# finer step\nh = 0.025\n").unwrap();
    let cfg = cfg.to_str().unwrap();
    let v = json_stdout(&invode(&["solve", "--preset", "fig2", "--h", "0.1", "--x-max", "3", "--config", cfg]));
    let spec = &v["runs"][0]["spec"];
    assert_eq!(spec["h"], 0.025);
    assert_eq!(spec["x_max"], 3.0);
    assert_eq!(spec["ic"]["ypp0"], -4.0);
}

#[test]
fn flags_alone_describe_a_problem() {
    let v = json_stdout(&invode(&[
        "solve", "--ode", "second_order", "--gamma", "1", "--ic", "0.1,1.8973665961010275,-1.0540925533894598",
        "--h", "0.01", "--x-max", "0.5",
    ]));
    assert_eq!(v["runs"][0]["oracle"]["kind"], "closed_form_second_order");
}

#[test]
fn configuration_errors_exit_with_2() {
    for args in [
        &["solve", "--preset", "fig2", "--h", "abc"][..],
        &["solve", "--preset", "fig9"],
        &["solve", "--preset", "fig2", "--scheme", "leapfrog"],
        &["solve", "--ode", "second_order", "--ic", "1,1,1"],
        &["solve", "--preset", "fig2", "--scheme", "standard_euler"],
        &["compare", "--preset", "fig2", "--against", "nope"],
    ] {
        let out = invode(args);
        assert_eq!(out.status.code(), Some(2), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
        assert!(String::from_utf8_lossy(&out.stderr).contains("configuration error"));
    }
}

#[test]
fn unreadable_config_is_an_io_error() {
    let out = invode(&["solve", "--preset", "fig2", "--config", "/nonexistent/run.cfg"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("/nonexistent/run.cfg"));
}

#[test]
fn unavailable_reference_exits_with_3_and_still_writes() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("r.json");
    let out = invode(&["solve", "--preset", "fig2", "--rk-tol", "1e-300", "--out", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(3));
    let v: Value = serde_json::from_str(&fs::read_to_string(&path).unwrap()).unwrap();
    assert_eq!(v["partial"], true);
    assert!(v["runs"][0]["max_error"].is_null());
}

#[test]
fn csv_goes_to_stdout_for_one_run() {
    let out = invode(&["solve", "--preset", "convergence", "--format", "csv"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("n,x,y,I1,I2_or_J,err_vs_oracle"));
    assert_eq!(lines.next().unwrap().split(',').count(), 6);
}

#[test]
fn compare_writes_one_csv_per_scheme() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("fig2.csv");
    let out = invode(&[
        "compare", "--preset", "fig2", "--against", "standard_fd,rk_reference", "--format", "csv", "--out",
        path.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    for label in ["invariant_implicit", "standard_fd", "rk_reference"] {
        let text = fs::read_to_string(dir.path().join(format!("fig2_{label}.csv"))).unwrap();
        assert!(text.starts_with("n,x,y,I1,I2_or_J,err_vs_oracle\n"), "{label}");
    }
    let stdout_csv = invode(&["compare", "--preset", "fig2", "--format", "csv"]);
    assert_eq!(stdout_csv.status.code(), Some(2));
}

#[test]
fn output_is_byte_stable() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = (dir.path().join("a.json"), dir.path().join("b.json"));
    for p in [&a, &b] {
        let out = invode(&["singularity", "--preset", "fig1", "--out", p.to_str().unwrap()]);
        assert!(out.status.success());
    }
    assert_eq!(fs::read(&a).unwrap(), fs::read(&b).unwrap());
}

#[test]
fn converge_reports_second_order_slope() {
    let v = json_stdout(&invode(&["converge", "--preset", "convergence"]));
    let slope = v["convergence"]["slope"].as_f64().unwrap();
    assert!((1.8..=2.2).contains(&slope), "{slope}");
    assert!(v["convergence"]["fit_residual"].is_number());
}

#[test]
fn singularity_finds_the_fold() {
    let v = json_stdout(&invode(&["singularity", "--preset", "fig3"]));
    let x = v["singularity"]["estimate"].as_f64().unwrap();
    assert!((1.5..=1.9).contains(&x), "{x}");
}

#[test]
fn props_passes_for_seed_zero() {
    let v = json_stdout(&invode(&["props", "--seed", "0"]));
    assert_eq!(v["properties"]["seed"], 0);
    assert_eq!(v["properties"]["all_passed"], true);
}
