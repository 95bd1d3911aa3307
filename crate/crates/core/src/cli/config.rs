//! JSON run configuration.

use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::body::{build_body, MassPoint, DEFAULT_CENTER_TOL};
use crate::dynamics::{AngularVelocity, BodyParams, BodyState, SpinTensor, TangentBody};
use crate::geometry::{Derivatives, FiniteDifference};
use crate::integrate::StepperConfig;
use crate::scenarios::{builtin_with, Scenario, ScenarioParams, DEFAULT_MARGIN};
use crate::Error;

/// Invalid configuration: what went wrong and where.
#[derive(Debug, Clone, PartialEq)]
pub struct ConfigError {
    /// Dotted path of the offending field, when known.
    pub field: Option<String>,
    pub line: Option<usize>,
    pub column: Option<usize>,
    pub message: String,
}

impl ConfigError {
    pub fn field(field: impl Into<String>, message: impl Into<String>) -> Self {
        Self {
            field: Some(field.into()),
            line: None,
            column: None,
            message: message.into(),
        }
    }

    pub fn general(message: impl Into<String>) -> Self {
        Self {
            field: None,
            line: None,
            column: None,
            message: message.into(),
        }
    }
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "config error")?;
        if let Some(line) = self.line {
            write!(f, " at line {line}")?;
            if let Some(column) = self.column {
                write!(f, ", column {column}")?;
            }
        }
        if let Some(field) = &self.field {
            write!(f, " in field '{field}'")?;
        }
        write!(f, ": {}", self.message)
    }
}

impl std::error::Error for ConfigError {}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub name: String,
    #[serde(default = "one")]
    pub radius: f64,
    #[serde(default = "default_margin")]
    pub margin: f64,
    #[serde(default = "default_rotation")]
    pub rotation_rate: f64,
}

fn one() -> f64 {
    1.0
}

fn default_margin() -> f64 {
    DEFAULT_MARGIN
}

fn default_rotation() -> f64 {
    ScenarioParams::default().rotation_rate
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BodyConfig {
    /// Direct form: total mass.
    pub mass: Option<f64>,
    /// Direct form: scalar inertia.
    pub inertia: Option<f64>,
    /// Direct form: upper-triangle spin components `S_12, S_13, ...`.
    pub spin: Option<Vec<f64>>,
    /// Mass-point form.
    pub mass_points: Option<Vec<MassPoint>>,
    /// Mass-point form: upper-triangle angular velocity `eta_12, ...`.
    pub angular_velocity: Option<Vec<f64>>,
    #[serde(default = "default_isotropy_tol")]
    pub isotropy_tol: f64,
    #[serde(default = "default_center_tol")]
    pub center_tol: f64,
}

fn default_isotropy_tol() -> f64 {
    1e-9
}

fn default_center_tol() -> f64 {
    DEFAULT_CENTER_TOL
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InitialConfig {
    pub position: Vec<f64>,
    /// Coordinate velocity `dx^i/dt`.
    pub velocity: Option<Vec<f64>>,
    /// Coordinate momentum `p_i`.
    pub momentum: Option<Vec<f64>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Backend {
    #[default]
    Analytic,
    FiniteDifference,
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DerivativeConfig {
    #[serde(default)]
    pub backend: Backend,
    /// Relative step for both first and second differences.
    pub step: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    pub trajectory: Option<String>,
    pub diagnostics: Option<String>,
    pub report: Option<String>,
    pub summary: Option<String>,
}

/// Thresholds; unset simulation thresholds are not checked.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Tolerances {
    pub curvature: f64,
    pub flat_curvature: f64,
    pub structure: f64,
    pub antisymmetry: f64,
    pub bianchi: f64,
    pub energy_drift: Option<f64>,
    pub spin_norm_drift: Option<f64>,
    pub covariant_spin: Option<f64>,
    pub papapetrou: Option<f64>,
    /// Bound on `std / |mean|` of the geodesic-curvature profile.
    pub geodesic_curvature_spread: Option<f64>,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            curvature: 1e-6,
            flat_curvature: 1e-9,
            structure: 1e-10,
            antisymmetry: 1e-12,
            bianchi: 1e-10,
            energy_drift: None,
            spin_norm_drift: None,
            covariant_spin: None,
            papapetrou: None,
            geodesic_curvature_spread: None,
        }
    }
}

impl Tolerances {
    pub fn scaled(&self, factor: f64) -> Self {
        let s = |v: Option<f64>| v.map(|x| x * factor);
        Self {
            curvature: self.curvature * factor,
            flat_curvature: self.flat_curvature * factor,
            structure: self.structure * factor,
            antisymmetry: self.antisymmetry * factor,
            bianchi: self.bianchi * factor,
            energy_drift: s(self.energy_drift),
            spin_norm_drift: s(self.spin_norm_drift),
            covariant_spin: s(self.covariant_spin),
            papapetrou: s(self.papapetrou),
            geodesic_curvature_spread: s(self.geodesic_curvature_spread),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    pub per_axis: usize,
}

impl Default for GridConfig {
    fn default() -> Self {
        Self { per_axis: 5 }
    }
}

/// Parameter grid for `sweep`; at most two entries may be set.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    /// Values for `S_12`.
    pub spin: Option<Vec<f64>>,
    pub step: Option<Vec<f64>>,
    pub t_end: Option<Vec<f64>>,
    pub mass: Option<Vec<f64>>,
    pub radius: Option<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub scenario: ScenarioConfig,
    pub body: Option<BodyConfig>,
    pub initial: Option<InitialConfig>,
    pub stepper: Option<StepperConfig>,
    #[serde(default)]
    pub derivatives: DerivativeConfig,
    #[serde(default)]
    pub output: OutputConfig,
    #[serde(default)]
    pub tolerances: Tolerances,
    #[serde(default)]
    pub grid: GridConfig,
    pub sweep: Option<SweepConfig>,
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self, ConfigError> {
        let de = &mut serde_json::Deserializer::from_str(text);
        let config: RunConfig = serde_path_to_error::deserialize(de).map_err(|e| {
            let path = e.path().to_string();
            let inner = e.into_inner();
            ConfigError {
                field: (path != "." && !path.is_empty()).then_some(path),
                line: Some(inner.line()),
                column: Some(inner.column()),
                message: inner.to_string(),
            }
        })?;
        config.scenario()?;
        if config.grid.per_axis == 0 {
            return Err(ConfigError::field("grid.per_axis", "must be at least 1"));
        }
        if let Some(stepper) = &config.stepper {
            stepper
                .validate()
                .map_err(|e| ConfigError::field("stepper", e.to_string()))?;
        }
        Ok(config)
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| ConfigError::general(format!("cannot read {}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn scenario(&self) -> Result<Scenario, ConfigError> {
        let params = ScenarioParams {
            radius: self.scenario.radius,
            margin: self.scenario.margin,
            rotation_rate: self.scenario.rotation_rate,
        };
        builtin_with(&self.scenario.name, &params).map_err(|e| match e {
            Error::UnknownScenario(_) => ConfigError::field("scenario.name", e.to_string()),
            other => ConfigError::field("scenario", other.to_string()),
        })
    }

    pub fn derivatives(&self) -> Result<Derivatives, ConfigError> {
        match self.derivatives.backend {
            Backend::Analytic => {
                if self.derivatives.step.is_some() {
                    return Err(ConfigError::field(
                        "derivatives.step",
                        "only used by the finite_difference backend",
                    ));
                }
                Ok(Derivatives::Analytic)
            }
            Backend::FiniteDifference => match self.derivatives.step {
                None => Ok(Derivatives::FiniteDifference(FiniteDifference::default())),
                Some(h) if h > 0.0 && h.is_finite() => Ok(Derivatives::FiniteDifference(
                    FiniteDifference::with_step(h),
                )),
                Some(h) => Err(ConfigError::field(
                    "derivatives.step",
                    format!("must be positive, got {h}"),
                )),
            },
        }
    }

    pub fn stepper(&self) -> Result<StepperConfig, ConfigError> {
        self.stepper.ok_or_else(|| {
            ConfigError::field("stepper", "missing section, required for simulation")
        })
    }

    /// Dynamical system and initial state described by the config.
    pub fn system(&self) -> Result<(TangentBody, BodyState), ConfigError> {
        let scenario = self.scenario()?;
        let n = scenario.dim();
        let body = self.body.as_ref().ok_or_else(|| {
            ConfigError::field("body", "missing section, required for simulation")
        })?;
        let initial = self.initial.as_ref().ok_or_else(|| {
            ConfigError::field("initial", "missing section, required for simulation")
        })?;
        check_len("initial.position", &initial.position, n)?;
        if !scenario.frame.in_chart(&initial.position) {
            return Err(ConfigError::field(
                "initial.position",
                format!(
                    "{:?} lies outside the chart of '{}'",
                    initial.position, scenario.name
                ),
            ));
        }
        let upper = n * (n - 1) / 2;
        let derivatives = self.derivatives()?;
        let field_err = |field: &str| {
            let field = field.to_string();
            move |e: Error| ConfigError::field(field.clone(), e.to_string())
        };

        let direct = body.mass.is_some() || body.inertia.is_some() || body.spin.is_some();
        let points = body.mass_points.is_some() || body.angular_velocity.is_some();
        match (direct, points) {
            (true, true) => {
                return Err(ConfigError::field(
                    "body",
                    "give either mass/inertia/spin or mass_points/angular_velocity, not both",
                ))
            }
            (false, false) => {
                return Err(ConfigError::field(
                    "body",
                    "needs mass/inertia/spin or mass_points",
                ));
            }
            _ => {}
        }

        if direct {
            let mass = body
                .mass
                .ok_or_else(|| ConfigError::field("body.mass", "missing"))?;
            let inertia = body.inertia.unwrap_or(0.0);
            let params = BodyParams::new(mass, inertia).map_err(field_err("body"))?;
            let spin_values = body.spin.clone().unwrap_or_else(|| vec![0.0; upper]);
            check_len("body.spin", &spin_values, upper)?;
            let spin = SpinTensor::from_upper(n, spin_values).map_err(field_err("body.spin"))?;
            let system =
                TangentBody::new(scenario.frame.clone(), params).with_derivatives(derivatives);
            let state = match (&initial.velocity, &initial.momentum) {
                (Some(v), None) => {
                    check_len("initial.velocity", v, n)?;
                    system
                        .state_from_spin(&initial.position, v, spin)
                        .map_err(field_err("initial"))?
                }
                (None, Some(p)) => {
                    check_len("initial.momentum", p, n)?;
                    BodyState::new(initial.position.clone(), p.clone(), spin)
                        .map_err(field_err("initial"))?
                }
                _ => {
                    return Err(ConfigError::field(
                        "initial",
                        "give exactly one of velocity or momentum",
                    ))
                }
            };
            return Ok((system, state));
        }

        let points = body
            .mass_points
            .clone()
            .ok_or_else(|| ConfigError::field("body.mass_points", "missing"))?;
        for (k, p) in points.iter().enumerate() {
            check_len(&format!("body.mass_points[{k}].offset"), &p.offset, n)?;
        }
        let model = build_body(points, body.center_tol).map_err(field_err("body.mass_points"))?;
        let params = BodyParams::from_body(&model, body.isotropy_tol)
            .map_err(field_err("body.mass_points"))?;
        let eta_values = body
            .angular_velocity
            .clone()
            .unwrap_or_else(|| vec![0.0; upper]);
        check_len("body.angular_velocity", &eta_values, upper)?;
        let eta = AngularVelocity::new(
            SpinTensor::from_upper(n, eta_values)
                .map_err(field_err("body.angular_velocity"))?
                .matrix(),
        )
        .map_err(field_err("body.angular_velocity"))?;
        let velocity = match (&initial.velocity, &initial.momentum) {
            (Some(v), None) => v,
            _ => {
                return Err(ConfigError::field(
                    "initial.velocity",
                    "a mass-point body needs an initial velocity (and no momentum)",
                ))
            }
        };
        check_len("initial.velocity", velocity, n)?;
        let system = TangentBody::new(scenario.frame.clone(), params).with_derivatives(derivatives);
        let state = system
            .state_from_angular_velocity(&initial.position, velocity, &eta)
            .map_err(field_err("initial"))?;
        Ok((system, state))
    }
}

fn check_len(field: &str, values: &[f64], expected: usize) -> Result<(), ConfigError> {
    if values.len() != expected {
        return Err(ConfigError::field(
            field,
            format!("expected {expected} components, got {}", values.len()),
        ));
    }
    if values.iter().any(|v| !v.is_finite()) {
        return Err(ConfigError::field(field, "components must be finite"));
    }
    Ok(())
}
