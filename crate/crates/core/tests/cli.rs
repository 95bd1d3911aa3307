use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;
use tangent_body::cli::{run_simulation, RunConfig};

fn configs() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs")
}

fn run(args: &[&str], out: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_tangent-body"))
        .args(args)
        .arg("--out-dir")
        .arg(out)
        .output()
        .unwrap()
}

fn write_config(dir: &Path, name: &str, text: &str) -> String {
    let path = dir.join(name);
    std::fs::write(&path, text).unwrap();
    path.to_str().unwrap().to_string()
}

fn config(name: &str) -> String {
    configs().join(name).to_str().unwrap().to_string()
}

fn read_json(path: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

fn csv_rows(path: &Path) -> (Vec<String>, Vec<Vec<f64>>) {
    let text = std::fs::read_to_string(path).unwrap();
    let mut lines = text.lines();
    let header = lines.next().unwrap().split(',').map(String::from).collect();
    let rows = lines
        .map(|l| l.split(',').map(|v| v.parse().unwrap()).collect())
        .collect();
    (header, rows)
}

#[test]
fn geometry_check_sphere_reports_unit_curvature() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "s.json",
        r#"{"scenario": {"name": "sphere", "radius": 1.0}}"#,
    );
    let out = run(&["geometry-check", &cfg], dir.path());
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let report = read_json(&dir.path().join("geometry_report.json"));
    let ks = report["sectional_curvatures"].as_array().unwrap();
    assert_eq!(ks.len(), 25);
    for k in ks {
        assert!((k[0].as_f64().unwrap() - 1.0).abs() < 1e-6);
    }
    assert_eq!(report["passed"], Value::Bool(true));
}

#[test]
fn geometry_check_polar_is_flat() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(
        &["geometry-check", &config("flat_polar_2d.json")],
        dir.path(),
    );
    assert_eq!(out.status.code(), Some(0));
    let report = read_json(&dir.path().join("geometry_report.json"));
    let flat = report["checks"]
        .as_array()
        .unwrap()
        .iter()
        .find(|c| c["name"] == "flat_curvature_max")
        .unwrap();
    assert!(flat["measured"].as_f64().unwrap() < 1e-9);
}

#[test]
fn geometry_check_threshold_failure_exits_4() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "s.json",
        r#"{"scenario": {"name": "sphere"}, "derivatives": {"backend": "finite_difference"}}"#,
    );
    let out = run(&["geometry-check", &cfg], dir.path());
    assert_eq!(out.status.code(), Some(4));
    let out = run(&["geometry-check", &cfg, "--tol-scale", "1e5"], dir.path());
    assert_eq!(out.status.code(), Some(0));
}

#[test]
fn config_errors_exit_2_with_location() {
    let dir = tempfile::tempdir().unwrap();
    let unknown = write_config(dir.path(), "u.json", r#"{"scenario": {"name": "torus"}}"#);
    let out = run(&["geometry-check", &unknown], dir.path());
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("scenario.name"));

    let typo = write_config(
        dir.path(),
        "t.json",
        "{\n  \"scenario\": {\"name\": \"sphere\", \"radious\": 2}\n}",
    );
    let out = run(&["geometry-check", &typo], dir.path());
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("line 2") && err.contains("radious"), "{err}");

    let broken = write_config(dir.path(), "b.json", "{\"scenario\": ");
    assert_eq!(
        run(&["simulate", &broken], dir.path()).status.code(),
        Some(2)
    );

    let missing = run(&["simulate", "/nonexistent/config.json"], dir.path());
    assert_eq!(missing.status.code(), Some(2));

    let no_body = write_config(dir.path(), "n.json", r#"{"scenario": {"name": "sphere"}}"#);
    let out = run(&["simulate", &no_body], dir.path());
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("missing section"));

    let both = write_config(
        dir.path(),
        "both.json",
        r#"{"scenario": {"name": "sphere"},
            "body": {"mass": 1, "inertia": 1, "mass_points": [{"mass": 1, "offset": [0, 0]}]},
            "initial": {"position": [1, 0], "velocity": [0, 1]},
            "stepper": {"method": "rk4", "step": 0.1, "t_end": 1}}"#,
    );
    assert_eq!(run(&["simulate", &both], dir.path()).status.code(), Some(2));
}

#[test]
fn axis_pair_body_rejected_as_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "pair.json",
        r#"{"scenario": {"name": "sphere"},
            "body": {"mass_points": [{"mass": 1, "offset": [1, 0]}, {"mass": 1, "offset": [-1, 0]}]},
            "initial": {"position": [1, 0], "velocity": [0, 1]},
            "stepper": {"method": "rk4", "step": 0.1, "t_end": 1}}"#,
    );
    let out = run(&["simulate", &cfg], dir.path());
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("not isotropic"));
}

#[test]
fn flat_simulation_writes_straight_line() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&["simulate", &config("flat_cartesian_2d.json")], dir.path());
    assert_eq!(out.status.code(), Some(0));
    let (header, rows) = csv_rows(&dir.path().join("trajectory.csv"));
    assert_eq!(
        header,
        ["t", "x1", "x2", "p1", "p2", "S12", "H", "spin_norm"]
    );
    assert_eq!(rows.len(), 21);
    for row in &rows {
        assert!((row[1] - row[0]).abs() < 1e-13 && (row[2] - 0.5 * row[0]).abs() < 1e-13);
        assert_eq!(&row[3..6], &[1.0, 0.5, 0.8]);
    }
    // 17 significant digits
    let text = std::fs::read_to_string(dir.path().join("trajectory.csv")).unwrap();
    let cell = text.lines().nth(1).unwrap().split(',').nth(6).unwrap();
    assert_eq!(
        cell.split('e')
            .next()
            .unwrap()
            .replace(['.', '-'], "")
            .len(),
        17
    );
}

#[test]
fn trajectory_columns_for_three_dimensions() {
    let dir = tempfile::tempdir().unwrap();
    run(&["simulate", &config("sphere3.json")], dir.path());
    let (header, _) = csv_rows(&dir.path().join("trajectory.csv"));
    assert_eq!(
        header,
        [
            "t",
            "x1",
            "x2",
            "x3",
            "p1",
            "p2",
            "p3",
            "S12",
            "S13",
            "S23",
            "H",
            "spin_norm"
        ]
    );
}

#[test]
fn sphere_geodesic_closes_after_one_period() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&["simulate", &config("sphere_geodesic.json")], dir.path());
    assert_eq!(out.status.code(), Some(0));
    let d = read_json(&dir.path().join("diagnostics.json"));
    assert!(d["oracle_endpoint_error"].as_f64().unwrap() < 1e-8);
    assert_eq!(d["termination_reason"], "completed");
}

#[test]
fn diagnostics_match_library_exactly() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&["simulate", &config("sphere.json")], dir.path());
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let d = read_json(&dir.path().join("diagnostics.json"));
    let sim = run_simulation(
        &RunConfig::load(&configs().join("sphere.json")).unwrap(),
        1.0,
    )
    .unwrap();
    let lib = &sim.report.diagnostics;
    for (key, value) in [
        ("energy_drift_rel", lib.energy_drift_rel),
        ("spin_norm_drift_rel", Some(lib.spin_norm_drift_rel)),
        ("covariant_spin_residual", lib.covariant_spin_residual),
        ("papapetrou_residual", lib.papapetrou_residual),
        ("geodesic_curvature_mean", lib.geodesic_curvature_mean),
        ("geodesic_curvature_std", lib.geodesic_curvature_std),
    ] {
        assert_eq!(d[key].as_f64(), value, "{key}");
    }
    assert_eq!(d["termination_reason"], "completed");
    let (mean, std) = (
        lib.geodesic_curvature_mean.unwrap(),
        lib.geodesic_curvature_std.unwrap(),
    );
    assert!(std / mean.abs() < 1e-3);
}

#[test]
fn chart_exit_writes_partial_trajectory() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "pole.json",
        r#"{"scenario": {"name": "sphere"},
            "body": {"mass": 1, "inertia": 0.5, "spin": [0]},
            "initial": {"position": [1, 0], "velocity": [-1, 0]},
            "stepper": {"method": "rk4", "step": 0.01, "t_end": 3}}"#,
    );
    let out = run(&["simulate", &cfg], dir.path());
    assert_eq!(out.status.code(), Some(3));
    let (_, rows) = csv_rows(&dir.path().join("trajectory.csv"));
    assert!(rows.len() > 50 && rows.last().unwrap()[0] < 1.0);
    assert_eq!(
        read_json(&dir.path().join("diagnostics.json"))["termination_reason"],
        "chart_exit"
    );
}

#[test]
fn validation_threshold_exits_4() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "tight.json",
        r#"{"scenario": {"name": "sphere"},
            "body": {"mass": 1, "inertia": 0.5, "spin": [0.3]},
            "initial": {"position": [1.2, 0], "velocity": [0.3, 0.9]},
            "stepper": {"method": "rk4", "step": 0.05, "t_end": 1},
            "tolerances": {"papapetrou": 1e-12}}"#,
    );
    let out = run(&["simulate", &cfg], dir.path());
    assert_eq!(out.status.code(), Some(4));
    let d = read_json(&dir.path().join("diagnostics.json"));
    assert_eq!(d["threshold_failures"][0]["name"], "papapetrou_residual");
}

#[test]
fn nonconvergence_exits_5() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "stiff.json",
        r#"{"scenario": {"name": "flat_polar_2d"},
            "body": {"mass": 1, "inertia": 0.5, "spin": [0]},
            "initial": {"position": [10, 0], "velocity": [0, 3]},
            "stepper": {"method": "implicit_midpoint", "step": 2.0, "t_end": 4}}"#,
    );
    let out = run(&["simulate", &cfg], dir.path());
    assert_eq!(
        out.status.code(),
        Some(5),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
}

#[test]
fn spin_sweep_curvature_is_odd_in_spin() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&["sweep", &config("sweep_spin.json")], dir.path());
    assert_eq!(out.status.code(), Some(0));
    let text = std::fs::read_to_string(dir.path().join("sweep_summary.csv")).unwrap();
    let mut lines = text.lines();
    let header: Vec<&str> = lines.next().unwrap().split(',').collect();
    let col = header
        .iter()
        .position(|h| *h == "geodesic_curvature_mean")
        .unwrap();
    let kappa: Vec<f64> = lines
        .map(|l| l.split(',').nth(col).unwrap().parse().unwrap())
        .collect();
    assert_eq!(kappa.len(), 3);
    assert!(kappa[1].abs() < 1e-6);
    assert!((kappa[0] + kappa[2]).abs() < 1e-4 * kappa[0].abs() && kappa[0] != 0.0);
}

#[test]
fn step_sweep_drift_shrinks_at_fourth_order() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(
        run(&["sweep", &config("sweep_step.json")], dir.path())
            .status
            .code(),
        Some(0)
    );
    let text = std::fs::read_to_string(dir.path().join("sweep_summary.csv")).unwrap();
    let drift: Vec<f64> = text
        .lines()
        .skip(1)
        .map(|l| l.split(',').nth(3).unwrap().parse().unwrap())
        .collect();
    for w in drift.windows(2) {
        assert!((12.0..=20.0).contains(&(w[0] / w[1])), "{drift:?}");
    }
}

#[test]
fn sweep_errors_and_failed_points() {
    let dir = tempfile::tempdir().unwrap();
    let empty = write_config(
        dir.path(),
        "e.json",
        r#"{"scenario": {"name": "sphere"},
            "body": {"mass": 1, "inertia": 0.5, "spin": [0]},
            "initial": {"position": [1.2, 0], "velocity": [0.3, 0.9]},
            "stepper": {"method": "rk4", "step": 0.01, "t_end": 1},
            "sweep": {}}"#,
    );
    assert_eq!(run(&["sweep", &empty], dir.path()).status.code(), Some(2));

    let partial = write_config(
        dir.path(),
        "p.json",
        r#"{"scenario": {"name": "sphere"},
            "body": {"mass": 1, "inertia": 0.5, "spin": [0]},
            "initial": {"position": [1.2, 0], "velocity": [0.3, 0.9]},
            "stepper": {"method": "rk4", "step": 0.01, "t_end": 0.5},
            "sweep": {"step": [0.01, -1.0, 0.005]}}"#,
    );
    let out = run(&["sweep", &partial], dir.path());
    assert_eq!(out.status.code(), Some(5));
    let text = std::fs::read_to_string(dir.path().join("sweep_summary.csv")).unwrap();
    let status: Vec<&str> = text
        .lines()
        .skip(1)
        .map(|l| l.split(',').nth(2).unwrap())
        .collect();
    assert_eq!(status, ["completed", "failed", "completed"]);
}

#[test]
fn sweep_output_is_bitwise_reproducible() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let c = tempfile::tempdir().unwrap();
    run(
        &["sweep", &config("sweep_spin.json"), "--jobs", "1"],
        a.path(),
    );
    run(
        &["sweep", &config("sweep_spin.json"), "--jobs", "1"],
        b.path(),
    );
    run(
        &["sweep", &config("sweep_spin.json"), "--jobs", "3"],
        c.path(),
    );
    let read = |d: &tempfile::TempDir| std::fs::read(d.path().join("sweep_summary.csv")).unwrap();
    assert_eq!(read(&a), read(&b));
    assert_eq!(read(&a), read(&c));
    run(&["simulate", &config("sphere.json")], a.path());
    run(&["simulate", &config("sphere.json")], b.path());
    for file in ["trajectory.csv", "diagnostics.json"] {
        assert_eq!(
            std::fs::read(a.path().join(file)).unwrap(),
            std::fs::read(b.path().join(file)).unwrap()
        );
    }
}

#[test]
fn every_example_config_runs() {
    for entry in std::fs::read_dir(configs()).unwrap() {
        let path = entry.unwrap().path();
        let name = path.file_name().unwrap().to_str().unwrap().to_string();
        let dir = tempfile::tempdir().unwrap();
        let cmd = if name.starts_with("sweep") {
            "sweep"
        } else {
            "simulate"
        };
        let out = run(&[cmd, path.to_str().unwrap()], dir.path());
        assert_eq!(
            out.status.code(),
            Some(0),
            "{name}: {}",
            String::from_utf8_lossy(&out.stderr)
        );
        assert_eq!(
            run(&["geometry-check", path.to_str().unwrap()], dir.path())
                .status
                .code(),
            Some(0),
            "{name}"
        );
    }
}
