//! End-to-end tests of the `hawkmass` binary: exit codes, artifact layout,
//! determinism of emitted CSVs, and the config echo round-trip.

use std::path::Path;
use std::process::{Command, Output};

use hawkmass::config::parse_config;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_hawkmass"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary spawns")
}

fn write_config(dir: &Path, name: &str, body: &str) -> String {
    let path = dir.join(name);
    std::fs::write(&path, body).unwrap();
    path.display().to_string()
}

#[test]
fn simulate_defaults_exit_zero_with_artifacts() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("run");
    let output = run(&["simulate", "--out", out.to_str().unwrap()]);
    assert!(output.status.success(), "stderr: {}", String::from_utf8_lossy(&output.stderr));
    let stdout = String::from_utf8(output.stdout).unwrap();
    assert!(stdout.contains("r0 = 10"), "stdout: {stdout}");
    for name in [
        "sphere_0_r10.csv",
        "sphere_1_r20.csv",
        "sphere_2_r50.csv",
        "sphere_3_r100.csv",
        "summary.txt",
        "resolved_config.cfg",
    ] {
        assert!(out.join(name).is_file(), "missing {name}");
    }
}

#[test]
fn simulate_csvs_are_byte_identical_across_runs() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(
        dir.path(),
        "run.cfg",
        "flow.t_end = 2e-4\noutput.directory = unused\n",
    );
    let out_a = dir.path().join("a");
    let out_b = dir.path().join("b");
    for out in [&out_a, &out_b] {
        let output = run(&["simulate", "--config", &config, "--out", out.to_str().unwrap()]);
        assert!(output.status.success());
    }
    for name in [
        "sphere_0_r10.csv",
        "sphere_1_r20.csv",
        "sphere_2_r50.csv",
        "sphere_3_r100.csv",
    ] {
        let a = std::fs::read(out_a.join(name)).unwrap();
        let b = std::fs::read(out_b.join(name)).unwrap();
        assert_eq!(a, b, "{name} differs between identical runs");
    }
    // The resolved configs differ only in the --out override.
    let a = std::fs::read_to_string(out_a.join("resolved_config.cfg")).unwrap();
    let b = std::fs::read_to_string(out_b.join("resolved_config.cfg")).unwrap();
    assert!(a.contains(&out_a.display().to_string()));
    let strip = |text: &str| -> String {
        text.lines()
            .filter(|l| !l.starts_with("output.directory"))
            .collect::<Vec<_>>()
            .join("\n")
    };
    assert_eq!(strip(&a), strip(&b));
}

#[test]
fn summary_echo_round_trips_through_the_parser() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("echo");
    let body = format!(
        "grid.n_points = 256\nflow.t_end = 1e-4\ninitial_data.mass = 0.8\n\
         surfaces.radii = 12, 40\noutput.directory = {}\n",
        out.display()
    );
    let config_path = write_config(dir.path(), "echo.cfg", &body);
    let output = run(&["simulate", "--config", &config_path]);
    assert!(output.status.success(), "stderr: {}", String::from_utf8_lossy(&output.stderr));

    let summary = std::fs::read_to_string(out.join("summary.txt")).unwrap();
    let echo = summary
        .split("--- resolved configuration ---\n")
        .nth(1)
        .expect("summary embeds the resolved config")
        .split("--- end resolved configuration ---")
        .next()
        .unwrap();
    assert_eq!(
        parse_config(echo).unwrap(),
        parse_config(&body).unwrap(),
        "config echo does not round-trip"
    );
}

#[test]
fn simulate_svg_flag_emits_plots() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path(), "svg.cfg", "flow.t_end = 1e-5\n");
    let out = dir.path().join("plots");
    let output = run(&[
        "simulate",
        "--config",
        &config,
        "--out",
        out.to_str().unwrap(),
        "--svg",
    ]);
    assert!(output.status.success());
    for name in ["mass_vs_time.svg", "rate_vs_radius.svg"] {
        let svg = std::fs::read_to_string(out.join(name)).unwrap();
        assert!(svg.starts_with("<svg"), "{name} is not an SVG");
        assert!(svg.contains("<polyline"), "{name} has no data series");
    }
}

#[test]
fn zero_horizon_exits_zero() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path(), "zero.cfg", "flow.t_end = 0.0\n");
    let out = dir.path().join("zero");
    let output = run(&["simulate", "--config", &config, "--out", out.to_str().unwrap()]);
    assert_eq!(output.status.code(), Some(0));
}

#[test]
fn scalar_flat_initial_data_exits_four() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(
        dir.path(),
        "schw.cfg",
        "initial_data.family = schwarzschild\ninitial_data.mass = 1.0\n",
    );
    let out = dir.path().join("schw");
    let output = run(&["simulate", "--config", &config, "--out", out.to_str().unwrap()]);
    assert_eq!(output.status.code(), Some(4), "stderr: {}", String::from_utf8_lossy(&output.stderr));
}

#[test]
fn bad_config_exits_two() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path(), "bad.cfg", "grid.colour = 3\n");
    let output = run(&["simulate", "--config", &config]);
    assert_eq!(output.status.code(), Some(2));
    let stderr = String::from_utf8(output.stderr).unwrap();
    assert!(stderr.contains("colour"), "stderr should name the key: {stderr}");
}

#[test]
fn horizon_violation_exits_two() {
    let dir = tempfile::tempdir().unwrap();
    // r_min = 1 sits inside the Schwarzschild horizon for M = 1.
    let config = write_config(
        dir.path(),
        "horizon.cfg",
        "grid.r_min = 1.0\ninitial_data.family = schwarzschild\ninitial_data.mass = 1.0\n\
         surfaces.radii = 1.5\n",
    );
    let output = run(&["simulate", "--config", &config]);
    assert_eq!(output.status.code(), Some(2));
}

#[test]
fn missing_config_file_exits_one() {
    let dir = tempfile::tempdir().unwrap();
    let missing = dir.path().join("nope.cfg");
    let output = run(&["simulate", "--config", missing.to_str().unwrap()]);
    assert_eq!(output.status.code(), Some(1));
}

#[test]
fn verify_flip_flag_fails_the_identity_check() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path(), "v.cfg", "grid.n_points = 128\n");
    let output = run(&[
        "verify",
        "--config",
        &config,
        "--flip-radial-curvature-sign",
    ]);
    assert_eq!(output.status.code(), Some(3));
    let stdout = String::from_utf8(output.stdout).unwrap();
    assert!(
        stdout.contains("CHECK dm/dr identity refinement: FAIL"),
        "stdout: {stdout}"
    );
    assert!(stdout.contains("verify: failed"));
}

#[test]
fn verify_coarse_grid_reports_skips() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path(), "coarse.cfg", "grid.n_points = 16\n");
    let output = run(&["verify", "--config", &config]);
    let stdout = String::from_utf8(output.stdout).unwrap();
    assert!(stdout.contains("CHECK convergence order: SKIP"), "stdout: {stdout}");
    assert!(stdout.contains("CHECK gauge residual separation: SKIP"));
}

#[test]
fn sweep_writes_sorted_rows_and_isolates_failures() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path(), "sweep.cfg", "flow.t_end = 1e-5\n");
    let out = dir.path().join("sweep");
    // M = 1.6 violates the horizon bound of the family on this grid and must
    // fail in isolation while the other points succeed.
    let output = run(&[
        "sweep",
        "--config",
        &config,
        "--out",
        out.to_str().unwrap(),
        "--sweep",
        "initial_data.mass=0.4:1.6:4",
    ]);
    assert_eq!(output.status.code(), Some(0), "stderr: {}", String::from_utf8_lossy(&output.stderr));
    let csv = std::fs::read_to_string(out.join("sweep.csv")).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines[0], "initial_data.mass,r0,min_dmdt_at_r0,wall_ms,status");
    assert_eq!(lines.len(), 5);
    assert!(lines[1].starts_with("0.4,"));
    assert!(lines[4].starts_with("1.6,"));
    assert!(lines[4].contains("failed("), "divergent point not isolated: {}", lines[4]);
    for line in &lines[1..4] {
        assert!(line.ends_with(",ok"), "healthy point flagged: {line}");
    }
}

#[test]
fn sweep_two_axes_multiplies_points() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path(), "sweep2.cfg", "flow.t_end = 1e-5\n");
    let out = dir.path().join("sweep2");
    let output = run(&[
        "sweep",
        "--config",
        &config,
        "--out",
        out.to_str().unwrap(),
        "--sweep",
        "initial_data.mass=0.5:1.0:2",
        "--sweep",
        "initial_data.scale=1.0:2.0:3",
    ]);
    assert_eq!(output.status.code(), Some(0));
    let csv = std::fs::read_to_string(out.join("sweep.csv")).unwrap();
    assert_eq!(csv.lines().count(), 1 + 2 * 3);
    assert!(csv.lines().nth(1).unwrap().starts_with("0.5,1.0,") || csv.lines().nth(1).unwrap().starts_with("0.5,1,"));
}

#[test]
fn malformed_sweep_spec_exits_two() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path(), "s.cfg", "flow.t_end = 1e-5\n");
    let output = run(&["sweep", "--config", &config, "--sweep", "initial_data.mass=1:2:0"]);
    assert_eq!(output.status.code(), Some(2));
}
