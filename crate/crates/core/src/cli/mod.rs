//! Command-line front end.

pub mod config;

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use rayon::prelude::*;
use serde::Serialize;

pub use config::{ConfigError, RunConfig};

use crate::dynamics::TangentBody;
use crate::geometry::{verify_structure_equations, JetOrder, PointGeometry};
use crate::integrate::{integrate, Termination, TrajectoryRecord};
use crate::validate::{diagnose, Diagnostics};
use crate::Error;

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_CHART: i32 = 3;
pub const EXIT_THRESHOLD: i32 = 4;
pub const EXIT_NUMERICAL: i32 = 5;

#[derive(Debug, Parser)]
#[command(
    name = "tangent-body",
    version,
    about = "Spinning tangent rigid bodies on curved spaces"
)]
pub struct Cli {
    /// Maximum number of concurrent sweep points.
    #[arg(long, global = true, default_value_t = 1)]
    pub jobs: usize,
    /// Directory for output files.
    #[arg(long, global = true, default_value = ".")]
    pub out_dir: PathBuf,
    /// Multiplies every tolerance in the config.
    #[arg(long, global = true, default_value_t = 1.0)]
    pub tol_scale: f64,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Structure-equation, symmetry and curvature checks on a grid.
    GeometryCheck { config: PathBuf },
    /// Integrate one trajectory and write trajectory CSV and diagnostics JSON.
    Simulate { config: PathBuf },
    /// Run a grid of simulations and write a summary CSV.
    Sweep { config: PathBuf },
}

/// Parses arguments, runs the command and returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
        }
    };
    if !(cli.tol_scale > 0.0 && cli.tol_scale.is_finite()) {
        eprintln!("--tol-scale must be positive");
        return EXIT_CONFIG;
    }
    if cli.jobs == 0 {
        eprintln!("--jobs must be at least 1");
        return EXIT_CONFIG;
    }
    let path = match &cli.command {
        Command::GeometryCheck { config }
        | Command::Simulate { config }
        | Command::Sweep { config } => config,
    };
    let config = match RunConfig::load(path) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("{e}");
            return EXIT_CONFIG;
        }
    };
    if let Err(e) = std::fs::create_dir_all(&cli.out_dir) {
        eprintln!("cannot create {}: {e}", cli.out_dir.display());
        return EXIT_NUMERICAL;
    }
    let result = match cli.command {
        Command::GeometryCheck { .. } => geometry_check(&config, &cli),
        Command::Simulate { .. } => simulate(&config, &cli),
        Command::Sweep { .. } => sweep(&config, &cli),
    };
    match result {
        Ok(code) => code,
        Err(Failure::Config(e)) => {
            eprintln!("{e}");
            EXIT_CONFIG
        }
        Err(Failure::Numerical(e)) => {
            eprintln!("numerical failure: {e}");
            EXIT_NUMERICAL
        }
        Err(Failure::Io(e)) => {
            eprintln!("output error: {e}");
            EXIT_NUMERICAL
        }
    }
}

#[derive(Debug)]
enum Failure {
    Config(ConfigError),
    Numerical(Error),
    Io(std::io::Error),
}

impl From<ConfigError> for Failure {
    fn from(e: ConfigError) -> Self {
        Failure::Config(e)
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Numerical(e)
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Io(e)
    }
}

fn output_path(dir: &Path, configured: &Option<String>, default: &str) -> PathBuf {
    dir.join(configured.as_deref().unwrap_or(default))
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> std::io::Result<()> {
    let mut text = serde_json::to_string_pretty(value).map_err(std::io::Error::other)?;
    text.push('\n');
    std::fs::write(path, text)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub measured: f64,
    pub threshold: f64,
    pub passed: bool,
}

impl Check {
    fn new(name: impl Into<String>, measured: f64, threshold: f64) -> Self {
        Self {
            name: name.into(),
            measured,
            threshold,
            passed: measured <= threshold,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GeometryReport {
    pub scenario: String,
    pub points: usize,
    pub sectional_curvature_oracle: Option<f64>,
    /// Sectional curvature `R_abab` for every plane `a < b` at every point.
    pub sectional_curvatures: Vec<Vec<f64>>,
    pub checks: Vec<Check>,
    pub passed: bool,
}

pub fn geometry_report(config: &RunConfig, tol_scale: f64) -> Result<GeometryReport, ConfigError> {
    let scenario = config.scenario()?;
    let derivatives = config.derivatives()?;
    let tol = config.tolerances.scaled(tol_scale);
    let n = scenario.dim();
    let points = scenario.grid(config.grid.per_axis);
    let (mut first, mut second, mut form, mut matrix, mut bianchi, mut oracle, mut max_r) = (
        0.0_f64, 0.0_f64, 0.0_f64, 0.0_f64, 0.0_f64, 0.0_f64, 0.0_f64,
    );
    let mut sectional = Vec::with_capacity(points.len());
    let mut failures = Vec::new();
    for x in &points {
        let evaluated = verify_structure_equations(scenario.frame.as_ref(), x, &derivatives)
            .and_then(|res| {
                let geometry = PointGeometry::evaluate(
                    scenario.frame.as_ref(),
                    x,
                    &derivatives,
                    JetOrder::Second,
                )?;
                Ok((res, geometry.curvature()?))
            });
        let (res, curvature) = match evaluated {
            Ok(v) => v,
            Err(e) => {
                failures.push(Check {
                    name: format!("evaluate at {x:?}: {e}"),
                    measured: f64::NAN,
                    threshold: 0.0,
                    passed: false,
                });
                continue;
            }
        };
        first = first.max(res.first);
        second = second.max(res.second);
        let (f, m) = curvature.antisymmetry_defects();
        form = form.max(f);
        matrix = matrix.max(m);
        bianchi = bianchi.max(curvature.bianchi_defect());
        max_r = max_r.max(curvature.0.max_abs());
        let mut row = Vec::new();
        for a in 0..n {
            for b in (a + 1)..n {
                let k = curvature.sectional(a, b);
                if let Some(k0) = scenario.sectional_curvature {
                    oracle = oracle.max((k - k0).abs());
                }
                row.push(k);
            }
        }
        sectional.push(row);
    }
    let mut checks = vec![
        Check::new("first_structure_residual", first, tol.structure),
        Check::new("second_structure_residual", second, tol.structure),
        Check::new("curvature_form_antisymmetry", form, tol.antisymmetry),
        Check::new("curvature_matrix_antisymmetry", matrix, tol.antisymmetry),
        Check::new("bianchi", bianchi, tol.bianchi),
    ];
    match scenario.sectional_curvature {
        Some(0.0) => checks.push(Check::new("flat_curvature_max", max_r, tol.flat_curvature)),
        Some(_) => checks.push(Check::new(
            "sectional_curvature_oracle",
            oracle,
            tol.curvature,
        )),
        None => {}
    }
    checks.extend(failures);
    let passed = checks.iter().all(|c| c.passed);
    Ok(GeometryReport {
        scenario: scenario.name.clone(),
        points: points.len(),
        sectional_curvature_oracle: scenario.sectional_curvature,
        sectional_curvatures: sectional,
        checks,
        passed,
    })
}

fn geometry_check(config: &RunConfig, cli: &Cli) -> Result<i32, Failure> {
    let report = geometry_report(config, cli.tol_scale)?;
    write_json(
        &output_path(&cli.out_dir, &config.output.report, "geometry_report.json"),
        &report,
    )?;
    for check in &report.checks {
        println!(
            "{} {}: {:e} (threshold {:e})",
            if check.passed { "ok  " } else { "FAIL" },
            check.name,
            check.measured,
            check.threshold
        );
    }
    Ok(if report.passed {
        EXIT_OK
    } else {
        EXIT_THRESHOLD
    })
}

/// Diagnostics plus the simulate-level extras written to JSON.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimulationReport {
    #[serde(flatten)]
    pub diagnostics: Diagnostics,
    pub scenario: String,
    /// Distance to the closed-form geodesic at the final time (spin-free
    /// runs on scenarios with an oracle).
    pub oracle_endpoint_error: Option<f64>,
    pub threshold_failures: Vec<Check>,
}

pub struct Simulation {
    pub system: TangentBody,
    pub trajectory: TrajectoryRecord,
    pub report: SimulationReport,
}

impl Simulation {
    pub fn exit_code(&self) -> i32 {
        if self.trajectory.termination != Termination::Completed {
            EXIT_CHART
        } else if !self.report.threshold_failures.is_empty() {
            EXIT_THRESHOLD
        } else {
            EXIT_OK
        }
    }
}

pub fn run_simulation(config: &RunConfig, tol_scale: f64) -> Result<Simulation, FailureKind> {
    let scenario = config.scenario().map_err(FailureKind::Config)?;
    let stepper = config.stepper().map_err(FailureKind::Config)?;
    let (system, initial) = config.system().map_err(FailureKind::Config)?;
    let trajectory = integrate(&initial, &system, &stepper).map_err(FailureKind::Numerical)?;
    let diagnostics = diagnose(&trajectory, &system).map_err(FailureKind::Numerical)?;
    let oracle_endpoint_error = if initial.spin.is_zero()
        && scenario.has_geodesic_oracle()
        && trajectory.termination == Termination::Completed
    {
        let v0 = system.velocity(&initial).map_err(FailureKind::Numerical)?;
        let g = system
            .geometry(&initial.position, JetOrder::First)
            .map_err(FailureKind::Numerical)?;
        let n = v0.len();
        let coord: Vec<f64> = (0..n)
            .map(|i| (0..n).map(|a| g.jet.inverse[(i, a)] * v0[a]).sum())
            .collect();
        let exact = scenario
            .geodesic_oracle(&initial.position, &coord, trajectory.final_time())
            .map_err(FailureKind::Numerical)?;
        Some(
            exact
                .iter()
                .zip(&trajectory.final_state().position)
                .fold(0.0_f64, |m, (a, b)| m.max((a - b).abs())),
        )
    } else {
        None
    };
    let tol = config.tolerances.scaled(tol_scale);
    let mut failures = Vec::new();
    let mut check = |name: &str, measured: Option<f64>, threshold: Option<f64>| {
        if let (Some(m), Some(t)) = (measured, threshold) {
            let c = Check::new(name, m, t);
            if !c.passed {
                failures.push(c);
            }
        }
    };
    check(
        "energy_drift_rel",
        diagnostics.energy_drift_rel,
        tol.energy_drift,
    );
    check(
        "spin_norm_drift_rel",
        Some(diagnostics.spin_norm_drift_rel),
        tol.spin_norm_drift,
    );
    check(
        "covariant_spin_residual",
        diagnostics.covariant_spin_residual,
        tol.covariant_spin,
    );
    check(
        "papapetrou_residual",
        diagnostics.papapetrou_residual,
        tol.papapetrou,
    );
    let spread = match (
        diagnostics.geodesic_curvature_mean,
        diagnostics.geodesic_curvature_std,
    ) {
        (Some(m), Some(s)) => Some(s / m.abs()),
        _ => None,
    };
    check(
        "geodesic_curvature_spread",
        spread,
        tol.geodesic_curvature_spread,
    );
    Ok(Simulation {
        report: SimulationReport {
            diagnostics,
            scenario: scenario.name,
            oracle_endpoint_error,
            threshold_failures: failures,
        },
        system,
        trajectory,
    })
}

#[derive(Debug)]
pub enum FailureKind {
    Config(ConfigError),
    Numerical(Error),
}

impl From<FailureKind> for Failure {
    fn from(e: FailureKind) -> Self {
        match e {
            FailureKind::Config(c) => Failure::Config(c),
            FailureKind::Numerical(n) => Failure::Numerical(n),
        }
    }
}

fn fmt17(v: f64) -> String {
    format!("{v:.16e}")
}

/// Trajectory CSV: `t, x.., p.., S_ab (a<b).., H, spin_norm`.
pub fn trajectory_csv(trajectory: &TrajectoryRecord) -> String {
    let n = trajectory.final_state().dim();
    let mut out = String::from("t");
    for i in 1..=n {
        let _ = write!(out, ",x{i}");
    }
    for i in 1..=n {
        let _ = write!(out, ",p{i}");
    }
    for a in 1..=n {
        for b in (a + 1)..=n {
            let _ = write!(out, ",S{a}{b}");
        }
    }
    out.push_str(",H,spin_norm\n");
    for s in &trajectory.samples {
        let mut row = vec![fmt17(s.t)];
        row.extend(s.state.position.iter().map(|v| fmt17(*v)));
        row.extend(s.state.momentum.iter().map(|v| fmt17(*v)));
        row.extend(s.state.spin.upper().iter().map(|v| fmt17(*v)));
        row.push(s.hamiltonian.map_or_else(|| "nan".into(), fmt17));
        row.push(fmt17(s.spin_norm));
        out.push_str(&row.join(","));
        out.push('\n');
    }
    out
}

fn simulate(config: &RunConfig, cli: &Cli) -> Result<i32, Failure> {
    let sim = run_simulation(config, cli.tol_scale)?;
    std::fs::write(
        output_path(&cli.out_dir, &config.output.trajectory, "trajectory.csv"),
        trajectory_csv(&sim.trajectory),
    )?;
    write_json(
        &output_path(&cli.out_dir, &config.output.diagnostics, "diagnostics.json"),
        &sim.report,
    )?;
    if let Termination::ChartExit { t, position } = &sim.trajectory.termination {
        eprintln!("trajectory left the chart at t = {t} (position {position:?})");
    }
    for f in &sim.report.threshold_failures {
        eprintln!(
            "threshold exceeded: {} = {:e} > {:e}",
            f.name, f.measured, f.threshold
        );
    }
    Ok(sim.exit_code())
}

/// One grid point: parameter names and values.
pub type SweepPoint = Vec<(&'static str, f64)>;

pub fn sweep_points(config: &RunConfig) -> Result<Vec<SweepPoint>, ConfigError> {
    let sweep = config
        .sweep
        .as_ref()
        .ok_or_else(|| ConfigError::field("sweep", "missing section, required for sweep"))?;
    let axes: Vec<(&'static str, &Vec<f64>)> = [
        ("spin", &sweep.spin),
        ("step", &sweep.step),
        ("t_end", &sweep.t_end),
        ("mass", &sweep.mass),
        ("radius", &sweep.radius),
    ]
    .into_iter()
    .filter_map(|(name, values)| values.as_ref().map(|v| (name, v)))
    .collect();
    if axes.is_empty() {
        return Err(ConfigError::field("sweep", "parameter grid is empty"));
    }
    if axes.len() > 2 {
        return Err(ConfigError::field(
            "sweep",
            "at most two parameters may be swept",
        ));
    }
    for (name, values) in &axes {
        if values.is_empty() {
            return Err(ConfigError::field(
                format!("sweep.{name}"),
                "parameter grid is empty",
            ));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(ConfigError::field(
                format!("sweep.{name}"),
                "values must be finite",
            ));
        }
    }
    let mut points: Vec<SweepPoint> = vec![Vec::new()];
    for (name, values) in axes {
        points = points
            .into_iter()
            .flat_map(|p| {
                values.iter().map(move |v| {
                    let mut q = p.clone();
                    q.push((name, *v));
                    q
                })
            })
            .collect();
    }
    Ok(points)
}

/// Applies one grid point to a copy of the base config.
pub fn apply_point(base: &RunConfig, point: &SweepPoint) -> Result<RunConfig, ConfigError> {
    let mut config = base.clone();
    let n = base.scenario()?.dim();
    for &(name, value) in point {
        match name {
            "spin" => {
                let body = config
                    .body
                    .as_mut()
                    .ok_or_else(|| ConfigError::field("body", "missing"))?;
                if body.mass_points.is_some() {
                    return Err(ConfigError::field(
                        "sweep.spin",
                        "requires a body given by mass/inertia/spin",
                    ));
                }
                if n < 2 {
                    return Err(ConfigError::field(
                        "sweep.spin",
                        "needs at least two dimensions",
                    ));
                }
                let mut spin = body
                    .spin
                    .clone()
                    .unwrap_or_else(|| vec![0.0; n * (n - 1) / 2]);
                if spin.is_empty() {
                    return Err(ConfigError::field("body.spin", "has no components"));
                }
                spin[0] = value;
                body.spin = Some(spin);
            }
            "step" => {
                config
                    .stepper
                    .as_mut()
                    .ok_or_else(|| ConfigError::field("stepper", "missing"))?
                    .step = value;
            }
            "t_end" => {
                config
                    .stepper
                    .as_mut()
                    .ok_or_else(|| ConfigError::field("stepper", "missing"))?
                    .t_end = value;
            }
            "mass" => {
                let body = config
                    .body
                    .as_mut()
                    .ok_or_else(|| ConfigError::field("body", "missing"))?;
                if body.mass_points.is_some() {
                    return Err(ConfigError::field(
                        "sweep.mass",
                        "requires a body given by mass/inertia/spin",
                    ));
                }
                body.mass = Some(value);
            }
            "radius" => config.scenario.radius = value,
            _ => unreachable!("sweep parameter names are fixed"),
        }
    }
    Ok(config)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    pub index: usize,
    pub parameters: SweepPoint,
    pub status: String,
    pub exit_code: i32,
    pub report: Option<SimulationReport>,
    pub error: Option<String>,
}

pub fn run_sweep(
    config: &RunConfig,
    jobs: usize,
    tol_scale: f64,
) -> Result<Vec<SweepRow>, ConfigError> {
    let points = sweep_points(config)?;
    // reject structural problems up front so they surface as config errors
    let first = apply_point(config, &points[0])?;
    first.stepper()?;
    first
        .body
        .as_ref()
        .ok_or_else(|| ConfigError::field("body", "missing section, required for sweep"))?;
    let one = |(index, point): (usize, &SweepPoint)| {
        let outcome = apply_point(config, point)
            .map_err(FailureKind::Config)
            .and_then(|c| run_simulation(&c, tol_scale));
        match outcome {
            Ok(sim) => SweepRow {
                index,
                parameters: point.clone(),
                status: sim.report.diagnostics.termination_reason.clone(),
                exit_code: sim.exit_code(),
                report: Some(sim.report),
                error: None,
            },
            Err(e) => {
                let (code, msg) = match e {
                    FailureKind::Config(c) => (EXIT_CONFIG, c.to_string()),
                    FailureKind::Numerical(n) => (EXIT_NUMERICAL, n.to_string()),
                };
                SweepRow {
                    index,
                    parameters: point.clone(),
                    status: "failed".into(),
                    exit_code: code,
                    report: None,
                    error: Some(msg),
                }
            }
        }
    };
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .map_err(|e| ConfigError::general(format!("cannot start worker pool: {e}")))?;
    Ok(pool.install(|| points.par_iter().enumerate().map(one).collect()))
}

fn csv_opt(v: Option<f64>) -> String {
    v.map_or_else(String::new, fmt17)
}

/// Summary CSV with one row per grid point, in grid order.
pub fn sweep_csv(rows: &[SweepRow]) -> String {
    let names: Vec<&str> = rows
        .first()
        .map_or_else(Vec::new, |r| r.parameters.iter().map(|p| p.0).collect());
    let mut out = String::from("index");
    for name in &names {
        let _ = write!(out, ",{name}");
    }
    out.push_str(",status,energy_drift_rel,spin_norm_drift_rel,covariant_spin_residual,papapetrou_residual,geodesic_curvature_mean,geodesic_curvature_std,final_time,error\n");
    for row in rows {
        let _ = write!(out, "{}", row.index);
        for (_, v) in &row.parameters {
            let _ = write!(out, ",{}", fmt17(*v));
        }
        let _ = write!(out, ",{}", row.status);
        match &row.report {
            Some(r) => {
                let d = &r.diagnostics;
                let _ = write!(
                    out,
                    ",{},{},{},{},{},{},{},",
                    csv_opt(d.energy_drift_rel),
                    fmt17(d.spin_norm_drift_rel),
                    csv_opt(d.covariant_spin_residual),
                    csv_opt(d.papapetrou_residual),
                    csv_opt(d.geodesic_curvature_mean),
                    csv_opt(d.geodesic_curvature_std),
                    fmt17(d.final_time)
                );
            }
            None => {
                let msg = row.error.as_deref().unwrap_or("").replace(['"', '\n'], "'");
                let _ = write!(out, ",,,,,,,,\"{msg}\"");
            }
        }
        out.push('\n');
    }
    out
}

fn sweep(config: &RunConfig, cli: &Cli) -> Result<i32, Failure> {
    let rows = run_sweep(config, cli.jobs, cli.tol_scale)?;
    std::fs::write(
        output_path(&cli.out_dir, &config.output.summary, "sweep_summary.csv"),
        sweep_csv(&rows),
    )?;
    for row in rows.iter().filter(|r| r.error.is_some()) {
        eprintln!(
            "point {} failed: {}",
            row.index,
            row.error.as_deref().unwrap_or("")
        );
    }
    Ok(rows.iter().map(|r| r.exit_code).max().unwrap_or(EXIT_OK))
}
