//! Fixed-step time integration of the phase-space vector field.

use serde::{Deserialize, Serialize};

use crate::dynamics::{BodyState, StateRate, TangentBody};
use crate::{Error, Result};

pub const MIDPOINT_TOL: f64 = 1e-13;
pub const MIDPOINT_MAX_ITER: usize = 50;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Rk4,
    ImplicitMidpoint,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StepperConfig {
    pub method: Method,
    pub step: f64,
    pub t_end: f64,
    #[serde(default = "default_monitor")]
    pub monitor_every: usize,
}

fn default_monitor() -> usize {
    1
}

impl StepperConfig {
    pub fn new(method: Method, step: f64, t_end: f64, monitor_every: usize) -> Result<Self> {
        let config = Self {
            method,
            step,
            t_end,
            monitor_every,
        };
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.step > 0.0 && self.step.is_finite()) {
            return Err(Error::InvalidInput(format!(
                "step must be positive, got {}",
                self.step
            )));
        }
        if !(self.t_end > 0.0 && self.t_end.is_finite()) {
            return Err(Error::InvalidInput(format!(
                "t_end must be positive, got {}",
                self.t_end
            )));
        }
        if self.monitor_every == 0 {
            return Err(Error::InvalidInput(
                "monitor_every must be at least 1".into(),
            ));
        }
        Ok(())
    }

    /// Number of steps to reach `t_end`; the last one may be shorter.
    pub fn step_count(&self) -> usize {
        let ratio = self.t_end / self.step;
        let rounded = ratio.round();
        if (ratio - rounded).abs() <= 1e-9 * rounded.max(1.0) {
            rounded.max(1.0) as usize
        } else {
            ratio.ceil() as usize
        }
    }
}

/// Anything that yields the phase-space time derivative of a state.
pub trait VectorField {
    fn rate(&self, state: &BodyState) -> Result<StateRate>;

    fn in_chart(&self, _x: &[f64]) -> bool {
        true
    }

    /// Evolved Hamiltonian, recorded at monitor points when available.
    fn energy(&self, _state: &BodyState) -> Option<f64> {
        None
    }
}

impl VectorField for TangentBody {
    fn rate(&self, state: &BodyState) -> Result<StateRate> {
        TangentBody::rate(self, state)
    }

    fn in_chart(&self, x: &[f64]) -> bool {
        TangentBody::in_chart(self, x)
    }

    fn energy(&self, state: &BodyState) -> Option<f64> {
        self.hamiltonian(state).ok()
    }
}

impl<F: VectorField + ?Sized> VectorField for &F {
    fn rate(&self, state: &BodyState) -> Result<StateRate> {
        (**self).rate(state)
    }

    fn in_chart(&self, x: &[f64]) -> bool {
        (**self).in_chart(x)
    }

    fn energy(&self, state: &BodyState) -> Option<f64> {
        (**self).energy(state)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct StepInfo {
    /// Largest symmetric part dropped from a spin rate during the step.
    pub projection: f64,
    /// Fixed-point iterations (implicit midpoint only).
    pub iterations: usize,
}

fn packed_rate<F: VectorField + ?Sized>(
    field: &F,
    y: &[f64],
    dim: usize,
    info: &mut StepInfo,
) -> Result<Vec<f64>> {
    let state = BodyState::from_vector(dim, y)?;
    if !field.in_chart(&state.position) {
        return Err(Error::OutOfChart(state.position));
    }
    let (rate, projection) = field.rate(&state)?.to_vector();
    info.projection = info.projection.max(projection);
    Ok(rate)
}

fn axpy(y: &[f64], h: f64, k: &[f64]) -> Vec<f64> {
    y.iter().zip(k).map(|(a, b)| a + h * b).collect()
}

/// Advances `state` by one step of size `h`.
pub fn step<F: VectorField + ?Sized>(
    state: &BodyState,
    field: &F,
    h: f64,
    method: Method,
) -> Result<(BodyState, StepInfo)> {
    if !(h > 0.0 && h.is_finite()) {
        return Err(Error::InvalidInput(format!(
            "step must be positive, got {h}"
        )));
    }
    let dim = state.dim();
    let y = state.to_vector();
    let mut info = StepInfo::default();
    let next = match method {
        Method::Rk4 => {
            let k1 = packed_rate(field, &y, dim, &mut info)?;
            let k2 = packed_rate(field, &axpy(&y, 0.5 * h, &k1), dim, &mut info)?;
            let k3 = packed_rate(field, &axpy(&y, 0.5 * h, &k2), dim, &mut info)?;
            let k4 = packed_rate(field, &axpy(&y, h, &k3), dim, &mut info)?;
            (0..y.len())
                .map(|i| y[i] + h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]))
                .collect::<Vec<_>>()
        }
        Method::ImplicitMidpoint => {
            let mut next = axpy(&y, h, &packed_rate(field, &y, dim, &mut info)?);
            let mut last_update = f64::INFINITY;
            let mut converged = false;
            for _ in 0..MIDPOINT_MAX_ITER {
                info.iterations += 1;
                let mid: Vec<f64> = y.iter().zip(&next).map(|(a, b)| 0.5 * (a + b)).collect();
                let candidate = axpy(&y, h, &packed_rate(field, &mid, dim, &mut info)?);
                let scale = candidate.iter().fold(1.0_f64, |m, v| m.max(v.abs()));
                last_update = candidate
                    .iter()
                    .zip(&next)
                    .fold(0.0_f64, |m, (a, b)| m.max((a - b).abs()));
                next = candidate;
                if last_update <= MIDPOINT_TOL * scale {
                    converged = true;
                    break;
                }
            }
            if !converged {
                return Err(Error::NonConvergence {
                    iterations: MIDPOINT_MAX_ITER,
                    last_update,
                });
            }
            next
        }
    };
    if next.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite { t: f64::NAN });
    }
    Ok((BodyState::from_vector(dim, &next)?, info))
}

#[derive(Debug, Clone, PartialEq)]
pub struct Sample {
    pub t: f64,
    pub state: BodyState,
    /// Evolved Hamiltonian, `None` when the field does not provide one.
    pub hamiltonian: Option<f64>,
    /// `1/2 sum_ab S_ab S_ab`.
    pub spin_norm: f64,
    /// Largest spin-rate projection since the previous sample.
    pub projection: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Termination {
    Completed,
    /// The trajectory left the chart; the last sample is the last valid state.
    ChartExit {
        t: f64,
        position: Vec<f64>,
    },
}

impl Termination {
    pub fn label(&self) -> &'static str {
        match self {
            Termination::Completed => "completed",
            Termination::ChartExit { .. } => "chart_exit",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrajectoryRecord {
    pub config: StepperConfig,
    pub samples: Vec<Sample>,
    pub termination: Termination,
    pub steps_taken: usize,
    pub max_projection: f64,
}

impl TrajectoryRecord {
    pub fn final_state(&self) -> &BodyState {
        &self
            .samples
            .last()
            .expect("trajectory always holds the initial sample")
            .state
    }

    pub fn final_time(&self) -> f64 {
        self.samples.last().map_or(0.0, |s| s.t)
    }

    pub fn times(&self) -> Vec<f64> {
        self.samples.iter().map(|s| s.t).collect()
    }

    /// Largest `|H(t) - H(0)| / |H(0)|` over the samples (absolute when
    /// `H(0) = 0`).
    pub fn energy_drift_rel(&self) -> Option<f64> {
        let values: Option<Vec<f64>> = self.samples.iter().map(|s| s.hamiltonian).collect();
        values.map(|v| relative_drift(&v))
    }

    pub fn spin_norm_drift_rel(&self) -> f64 {
        relative_drift(&self.samples.iter().map(|s| s.spin_norm).collect::<Vec<_>>())
    }
}

fn relative_drift(values: &[f64]) -> f64 {
    let Some(&first) = values.first() else {
        return 0.0;
    };
    let scale = if first == 0.0 { 1.0 } else { first.abs() };
    values.iter().fold(0.0_f64, |m, v| m.max((v - first).abs())) / scale
}

fn sample<F: VectorField + ?Sized>(field: &F, t: f64, state: BodyState, projection: f64) -> Sample {
    Sample {
        t,
        hamiltonian: field.energy(&state),
        spin_norm: state.spin.casimir(),
        state,
        projection,
    }
}

/// Marches from `initial` to `config.t_end`.  Leaving the chart (at a step
/// endpoint or an intermediate stage) ends the run with `ChartExit`.
pub fn integrate<F: VectorField + ?Sized>(
    initial: &BodyState,
    field: &F,
    config: &StepperConfig,
) -> Result<TrajectoryRecord> {
    config.validate()?;
    if !initial.is_finite() {
        return Err(Error::InvalidInput("initial state must be finite".into()));
    }
    if !field.in_chart(&initial.position) {
        return Err(Error::OutOfChart(initial.position.clone()));
    }
    let n_steps = config.step_count();
    let mut samples = vec![sample(field, 0.0, initial.clone(), 0.0)];
    let mut state = initial.clone();
    let mut t = 0.0;
    let mut pending_projection = 0.0_f64;
    let mut max_projection = 0.0_f64;
    let mut termination = Termination::Completed;
    let mut steps_taken = 0;

    for k in 1..=n_steps {
        let t_next = if k == n_steps {
            config.t_end
        } else {
            k as f64 * config.step
        };
        let h = t_next - t;
        match step(&state, field, h, config.method) {
            Ok((next, info)) if field.in_chart(&next.position) => {
                state = next;
                t = t_next;
                steps_taken = k;
                pending_projection = pending_projection.max(info.projection);
                max_projection = max_projection.max(info.projection);
                if k % config.monitor_every == 0 || k == n_steps {
                    samples.push(sample(field, t, state.clone(), pending_projection));
                    pending_projection = 0.0;
                }
            }
            Ok((next, _)) => {
                termination = Termination::ChartExit {
                    t: t_next,
                    position: next.position,
                };
                break;
            }
            Err(Error::OutOfChart(position)) => {
                termination = Termination::ChartExit { t, position };
                break;
            }
            Err(Error::NonFinite { .. }) => return Err(Error::NonFinite { t }),
            Err(e) => return Err(e),
        }
    }
    if termination != Termination::Completed && samples.last().is_some_and(|s| s.t < t) {
        samples.push(sample(field, t, state, pending_projection));
    }
    Ok(TrajectoryRecord {
        config: *config,
        samples,
        termination,
        steps_taken,
        max_projection,
    })
}
