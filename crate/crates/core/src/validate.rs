//! Post-hoc checks of the transport and force laws along a trajectory.

use nalgebra::DMatrix;
use serde::Serialize;

use crate::dynamics::TangentBody;
use crate::geometry::JetOrder;
use crate::integrate::TrajectoryRecord;
use crate::{Error, Result};

/// Weights of the three-point first derivative at the middle of
/// `t0 < t1 < t2`.
fn first_weights(t0: f64, t1: f64, t2: f64) -> [f64; 3] {
    let (h1, h2) = (t1 - t0, t2 - t1);
    [
        -h2 / (h1 * (h1 + h2)),
        (h2 - h1) / (h1 * h2),
        h1 / (h2 * (h1 + h2)),
    ]
}

fn second_weights(t0: f64, t1: f64, t2: f64) -> [f64; 3] {
    let (h1, h2) = (t1 - t0, t2 - t1);
    [
        2.0 / (h1 * (h1 + h2)),
        -2.0 / (h1 * h2),
        2.0 / (h2 * (h1 + h2)),
    ]
}

fn require(traj: &TrajectoryRecord, required: usize) -> Result<()> {
    if traj.samples.len() < required {
        return Err(Error::TooFewSamples {
            required,
            found: traj.samples.len(),
        });
    }
    Ok(())
}

fn combine(w: [f64; 3], f: [&[f64]; 3]) -> Vec<f64> {
    (0..f[0].len())
        .map(|i| w[0] * f[0][i] + w[1] * f[1][i] + w[2] * f[2][i])
        .collect()
}

/// `DS_ab/dt` at each interior sample.
pub fn covariant_spin_derivative(
    traj: &TrajectoryRecord,
    system: &TangentBody,
) -> Result<Vec<DMatrix<f64>>> {
    require(traj, 3)?;
    let s = &traj.samples;
    let mut out = Vec::with_capacity(s.len() - 2);
    for k in 1..s.len() - 1 {
        let w = first_weights(s[k - 1].t, s[k].t, s[k + 1].t);
        let spin = s[k].state.spin.matrix();
        let mut ds = s[k - 1].state.spin.matrix() * w[0]
            + &spin * w[1]
            + s[k + 1].state.spin.matrix() * w[2];
        let geometry = system.geometry(&s[k].state.position, JetOrder::First)?;
        let v = system.velocity(&s[k].state)?;
        let omega = geometry.gamma.contract_first(&v);
        // DS_ab = dS_ab + w_ad S_db + w_bd S_ad, with w_ab = gamma_cab v^c
        ds += &omega * &spin - &spin * &omega;
        out.push(ds);
    }
    Ok(out)
}

/// Largest `|DS_ab/dt|` over interior samples.
pub fn covariant_spin_residual(traj: &TrajectoryRecord, system: &TangentBody) -> Result<f64> {
    Ok(covariant_spin_derivative(traj, system)?
        .iter()
        .fold(0.0_f64, |m, d| m.max(d.amax())))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PapapetrouReport {
    /// Largest `|m Dv^a/dt - F^a|` over interior samples.
    pub residual: f64,
    pub times: Vec<f64>,
    pub residuals: Vec<f64>,
    /// Measured `m Dv/dt` per interior sample.
    pub measured_force: Vec<Vec<f64>>,
    /// Curvature force `R_cdab v^b S_cd` per interior sample.
    pub curvature_force: Vec<Vec<f64>>,
    /// Frame speed `|v|` per interior sample.
    pub speed: Vec<f64>,
    /// Signed component of the measured force along `(-v_2, v_1)/|v|`
    /// (two dimensions only, empty otherwise).
    pub transverse_force: Vec<f64>,
}

pub fn papapetrou(traj: &TrajectoryRecord, system: &TangentBody) -> Result<PapapetrouReport> {
    require(traj, 3)?;
    let s = &traj.samples;
    let velocities = s
        .iter()
        .map(|sample| system.velocity(&sample.state))
        .collect::<Result<Vec<_>>>()?;
    let mass = system.params.mass;
    let n = system.dim();
    let mut report = PapapetrouReport {
        residual: 0.0,
        times: Vec::new(),
        residuals: Vec::new(),
        measured_force: Vec::new(),
        curvature_force: Vec::new(),
        speed: Vec::new(),
        transverse_force: Vec::new(),
    };
    for k in 1..s.len() - 1 {
        let w = first_weights(s[k - 1].t, s[k].t, s[k + 1].t);
        let v = &velocities[k];
        let mut accel = combine(w, [&velocities[k - 1], v, &velocities[k + 1]]);
        let geometry = system.geometry(&s[k].state.position, JetOrder::Second)?;
        for (a, acc) in accel.iter_mut().enumerate() {
            for c in 0..n {
                for b in 0..n {
                    *acc += geometry.gamma.get(c, a, b) * v[c] * v[b];
                }
            }
        }
        let measured: Vec<f64> = accel.iter().map(|x| mass * x).collect();
        let force = geometry
            .curvature()?
            .spin_force(v, &s[k].state.spin.matrix());
        let residual = measured
            .iter()
            .zip(&force)
            .fold(0.0_f64, |m, (x, y)| m.max((x - y).abs()));
        let speed = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if n == 2 {
            report
                .transverse_force
                .push((v[0] * measured[1] - v[1] * measured[0]) / speed);
        }
        report.residual = report.residual.max(residual);
        report.times.push(s[k].t);
        report.residuals.push(residual);
        report.measured_force.push(measured);
        report.curvature_force.push(force);
        report.speed.push(speed);
    }
    Ok(report)
}

pub fn papapetrou_residual(traj: &TrajectoryRecord, system: &TangentBody) -> Result<f64> {
    Ok(papapetrou(traj, system)?.residual)
}

/// Signed geodesic curvature of the centre-of-mass path at interior
/// samples, from positions alone.
pub fn geodesic_curvature_profile(
    traj: &TrajectoryRecord,
    system: &TangentBody,
) -> Result<Vec<f64>> {
    if system.dim() != 2 {
        return Err(Error::DimensionMismatch {
            expected: 2,
            found: system.dim(),
        });
    }
    require(traj, 5)?;
    let s = &traj.samples;
    let mut out = Vec::with_capacity(s.len() - 2);
    for k in 1..s.len() - 1 {
        let (t0, t1, t2) = (s[k - 1].t, s[k].t, s[k + 1].t);
        let x = [
            &s[k - 1].state.position[..],
            &s[k].state.position,
            &s[k + 1].state.position,
        ];
        let xdot = combine(first_weights(t0, t1, t2), x);
        let xddot = combine(second_weights(t0, t1, t2), x);
        let geometry = system.geometry(x[1], JetOrder::First)?;
        let jet = &geometry.jet;
        let mut u = [0.0; 2];
        let mut acc = [0.0; 2];
        for a in 0..2 {
            for i in 0..2 {
                u[a] += jet.coframe[(a, i)] * xdot[i];
                acc[a] += jet.coframe[(a, i)] * xddot[i];
                for j in 0..2 {
                    acc[a] += jet.first[j][(a, i)] * xdot[j] * xdot[i];
                }
            }
        }
        for a in 0..2 {
            for c in 0..2 {
                for b in 0..2 {
                    acc[a] += geometry.gamma.get(c, a, b) * u[c] * u[b];
                }
            }
        }
        let speed = (u[0] * u[0] + u[1] * u[1]).sqrt();
        out.push((u[0] * acc[1] - u[1] * acc[0]) / speed.powi(3));
    }
    Ok(out)
}

/// Mean and population standard deviation.
pub fn mean_std(values: &[f64]) -> (f64, f64) {
    if values.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
    (mean, var.sqrt())
}

/// Everything reported for one simulated trajectory.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Diagnostics {
    pub energy_drift_rel: Option<f64>,
    pub spin_norm_drift_rel: f64,
    pub covariant_spin_residual: Option<f64>,
    pub papapetrou_residual: Option<f64>,
    pub geodesic_curvature_mean: Option<f64>,
    pub geodesic_curvature_std: Option<f64>,
    pub termination_reason: String,
    pub final_time: f64,
    pub steps_taken: usize,
    pub max_spin_projection: f64,
    pub final_position: Vec<f64>,
}

/// Residuals that need more samples than the trajectory has are `None`.
pub fn diagnose(traj: &TrajectoryRecord, system: &TangentBody) -> Result<Diagnostics> {
    let optional = |r: Result<f64>| match r {
        Ok(v) => Ok(Some(v)),
        Err(Error::TooFewSamples { .. }) => Ok(None),
        Err(e) => Err(e),
    };
    let (mean, std) = match geodesic_curvature_profile(traj, system) {
        Ok(profile) => {
            let (m, s) = mean_std(&profile);
            (Some(m), Some(s))
        }
        Err(Error::TooFewSamples { .. } | Error::DimensionMismatch { .. }) => (None, None),
        Err(e) => return Err(e),
    };
    Ok(Diagnostics {
        energy_drift_rel: traj.energy_drift_rel(),
        spin_norm_drift_rel: traj.spin_norm_drift_rel(),
        covariant_spin_residual: optional(covariant_spin_residual(traj, system))?,
        papapetrou_residual: optional(papapetrou_residual(traj, system))?,
        geodesic_curvature_mean: mean,
        geodesic_curvature_std: std,
        termination_reason: traj.termination.label().to_string(),
        final_time: traj.final_time(),
        steps_taken: traj.steps_taken,
        max_spin_projection: traj.max_projection,
        final_position: traj.final_state().position.clone(),
    })
}
