//! Built-in manifolds with analytic coframe derivatives and closed-form
//! oracles (sectional curvature, geodesics).

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::geometry::FrameField;

pub const DEFAULT_MARGIN: f64 = 1e-6;

pub const BUILTIN_NAMES: &[&str] = &[
    "flat_cartesian_2d",
    "flat_polar_2d",
    "sphere",
    "hyperbolic_upper_half",
    "flat_cartesian_3d",
    "sphere3",
    "flat_rotated_2d",
];

fn diag(values: &[f64]) -> DMatrix<f64> {
    DMatrix::from_diagonal(&nalgebra::DVector::from_row_slice(values))
}

fn zeros(n: usize, count: usize) -> Vec<DMatrix<f64>> {
    vec![DMatrix::zeros(n, n); count]
}

/// Identity coframe on `R^n`.
#[derive(Debug, Clone)]
pub struct CartesianFrame {
    pub dim: usize,
}

impl FrameField for CartesianFrame {
    fn dim(&self) -> usize {
        self.dim
    }
    fn coframe(&self, _x: &[f64]) -> DMatrix<f64> {
        DMatrix::identity(self.dim, self.dim)
    }
    fn coframe_derivatives(&self, _x: &[f64]) -> Option<Vec<DMatrix<f64>>> {
        Some(zeros(self.dim, self.dim))
    }
    fn coframe_second_derivatives(&self, _x: &[f64]) -> Option<Vec<DMatrix<f64>>> {
        Some(zeros(self.dim, self.dim * self.dim))
    }
}

/// Flat plane in polar coordinates `(r, phi)`: `theta^1 = dr`, `theta^2 = r dphi`.
#[derive(Debug, Clone)]
pub struct PolarFrame {
    pub margin: f64,
}

impl FrameField for PolarFrame {
    fn dim(&self) -> usize {
        2
    }
    fn coframe(&self, x: &[f64]) -> DMatrix<f64> {
        diag(&[1.0, x[0]])
    }
    fn coframe_derivatives(&self, _x: &[f64]) -> Option<Vec<DMatrix<f64>>> {
        Some(vec![diag(&[0.0, 1.0]), DMatrix::zeros(2, 2)])
    }
    fn coframe_second_derivatives(&self, _x: &[f64]) -> Option<Vec<DMatrix<f64>>> {
        Some(zeros(2, 4))
    }
    fn in_chart(&self, x: &[f64]) -> bool {
        x[0] > self.margin
    }
}

/// Round 2-sphere of radius `R` in colatitude/longitude `(theta, phi)`:
/// `theta^1 = R dtheta`, `theta^2 = R sin(theta) dphi`.
#[derive(Debug, Clone)]
pub struct SphereFrame {
    pub radius: f64,
    pub margin: f64,
}

impl FrameField for SphereFrame {
    fn dim(&self) -> usize {
        2
    }
    fn coframe(&self, x: &[f64]) -> DMatrix<f64> {
        diag(&[self.radius, self.radius * x[0].sin()])
    }
    fn coframe_derivatives(&self, x: &[f64]) -> Option<Vec<DMatrix<f64>>> {
        Some(vec![
            diag(&[0.0, self.radius * x[0].cos()]),
            DMatrix::zeros(2, 2),
        ])
    }
    fn coframe_second_derivatives(&self, x: &[f64]) -> Option<Vec<DMatrix<f64>>> {
        let mut d2 = zeros(2, 4);
        d2[0] = diag(&[0.0, -self.radius * x[0].sin()]);
        Some(d2)
    }
    fn in_chart(&self, x: &[f64]) -> bool {
        x[0] > self.margin && x[0] < PI - self.margin
    }
}

/// Round 3-sphere in hyperspherical coordinates `(chi, theta, phi)`:
/// coframe `diag(R, R sin chi, R sin chi sin theta)`.
#[derive(Debug, Clone)]
pub struct Sphere3Frame {
    pub radius: f64,
    pub margin: f64,
}

impl FrameField for Sphere3Frame {
    fn dim(&self) -> usize {
        3
    }
    fn coframe(&self, x: &[f64]) -> DMatrix<f64> {
        let r = self.radius;
        diag(&[r, r * x[0].sin(), r * x[0].sin() * x[1].sin()])
    }
    fn coframe_derivatives(&self, x: &[f64]) -> Option<Vec<DMatrix<f64>>> {
        let r = self.radius;
        let (s0, c0, s1, c1) = (x[0].sin(), x[0].cos(), x[1].sin(), x[1].cos());
        Some(vec![
            diag(&[0.0, r * c0, r * c0 * s1]),
            diag(&[0.0, 0.0, r * s0 * c1]),
            DMatrix::zeros(3, 3),
        ])
    }
    fn coframe_second_derivatives(&self, x: &[f64]) -> Option<Vec<DMatrix<f64>>> {
        let r = self.radius;
        let (s0, c0, s1, c1) = (x[0].sin(), x[0].cos(), x[1].sin(), x[1].cos());
        let mut d2 = zeros(3, 9);
        d2[0] = diag(&[0.0, -r * s0, -r * s0 * s1]);
        d2[1] = diag(&[0.0, 0.0, r * c0 * c1]);
        d2[3] = d2[1].clone();
        d2[4] = diag(&[0.0, 0.0, -r * s0 * s1]);
        Some(d2)
    }
    fn in_chart(&self, x: &[f64]) -> bool {
        let m = self.margin;
        x[0] > m && x[0] < PI - m && x[1] > m && x[1] < PI - m
    }
}

/// Upper half-plane `(x, y)`, `y > 0`: `theta^1 = dx / y`, `theta^2 = dy / y`.
#[derive(Debug, Clone)]
pub struct HyperbolicFrame {
    pub margin: f64,
}

impl FrameField for HyperbolicFrame {
    fn dim(&self) -> usize {
        2
    }
    fn coframe(&self, x: &[f64]) -> DMatrix<f64> {
        let inv = 1.0 / x[1];
        diag(&[inv, inv])
    }
    fn coframe_derivatives(&self, x: &[f64]) -> Option<Vec<DMatrix<f64>>> {
        let d = -1.0 / (x[1] * x[1]);
        Some(vec![DMatrix::zeros(2, 2), diag(&[d, d])])
    }
    fn coframe_second_derivatives(&self, x: &[f64]) -> Option<Vec<DMatrix<f64>>> {
        let d = 2.0 / (x[1] * x[1] * x[1]);
        let mut d2 = zeros(2, 4);
        d2[3] = diag(&[d, d]);
        Some(d2)
    }
    fn in_chart(&self, x: &[f64]) -> bool {
        x[1] > self.margin
    }
}

/// Euclidean plane with a position-dependent rotated (non-diagonal) coframe,
/// rotation angle `alpha = rate * (x + y)`.
#[derive(Debug, Clone)]
pub struct RotatedFlatFrame {
    pub rate: f64,
}

impl RotatedFlatFrame {
    fn rotation(alpha: f64) -> DMatrix<f64> {
        let (s, c) = alpha.sin_cos();
        DMatrix::from_row_slice(2, 2, &[c, s, -s, c])
    }
    fn rotation_prime(alpha: f64) -> DMatrix<f64> {
        let (s, c) = alpha.sin_cos();
        DMatrix::from_row_slice(2, 2, &[-s, c, -c, -s])
    }
}

impl FrameField for RotatedFlatFrame {
    fn dim(&self) -> usize {
        2
    }
    fn coframe(&self, x: &[f64]) -> DMatrix<f64> {
        Self::rotation(self.rate * (x[0] + x[1]))
    }
    fn coframe_derivatives(&self, x: &[f64]) -> Option<Vec<DMatrix<f64>>> {
        let d = Self::rotation_prime(self.rate * (x[0] + x[1])) * self.rate;
        Some(vec![d.clone(), d])
    }
    fn coframe_second_derivatives(&self, x: &[f64]) -> Option<Vec<DMatrix<f64>>> {
        let d = Self::rotation(self.rate * (x[0] + x[1])) * (-self.rate * self.rate);
        Some(vec![d; 4])
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum GeodesicKind {
    Euclidean,
    Polar,
    Sphere { radius: f64 },
    Sphere3 { radius: f64 },
    Hyperbolic,
}

/// A named manifold with its frame and oracles.
#[derive(Clone)]
pub struct Scenario {
    pub name: String,
    pub frame: Arc<dyn FrameField>,
    /// Constant sectional curvature, when the space has one.
    pub sectional_curvature: Option<f64>,
    /// Per-coordinate `(lo, hi)` box used for sampling grids.
    pub sample_box: Vec<(f64, f64)>,
    geodesic: Option<GeodesicKind>,
}

impl fmt::Debug for Scenario {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Scenario")
            .field("name", &self.name)
            .field("dim", &self.frame.dim())
            .field("sectional_curvature", &self.sectional_curvature)
            .finish()
    }
}

/// Parameters accepted by [`builtin_with`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScenarioParams {
    pub radius: f64,
    pub margin: f64,
    pub rotation_rate: f64,
}

impl Default for ScenarioParams {
    fn default() -> Self {
        Self {
            radius: 1.0,
            margin: DEFAULT_MARGIN,
            rotation_rate: 0.7,
        }
    }
}

/// Looks up a built-in scenario. Accepts `sphere(2)` / `sphere(R=2)` style
/// radius suffixes for `sphere` and `sphere3`.
pub fn builtin(name: &str) -> Result<Scenario> {
    let trimmed = name.trim();
    if let Some(open) = trimmed.find('(') {
        let base = &trimmed[..open];
        let inner = trimmed[open + 1..]
            .strip_suffix(')')
            .ok_or_else(|| Error::UnknownScenario(name.to_string()))?;
        let value = inner
            .trim()
            .trim_start_matches("R=")
            .trim_start_matches("R =");
        let radius: f64 = value
            .trim()
            .parse()
            .map_err(|_| Error::UnknownScenario(name.to_string()))?;
        return builtin_with(
            base,
            &ScenarioParams {
                radius,
                ..ScenarioParams::default()
            },
        );
    }
    builtin_with(trimmed, &ScenarioParams::default())
}

pub fn builtin_with(name: &str, params: &ScenarioParams) -> Result<Scenario> {
    if !(params.margin >= 0.0) {
        return Err(Error::InvalidInput(format!(
            "chart margin {} must be >= 0",
            params.margin
        )));
    }
    let curved_radius = || -> Result<f64> {
        if params.radius > 0.0 && params.radius.is_finite() {
            Ok(params.radius)
        } else {
            Err(Error::InvalidInput(format!(
                "radius {} must be positive",
                params.radius
            )))
        }
    };
    let pole_box = (0.3, PI - 0.3);
    let scenario = match name {
        "flat_cartesian_2d" => Scenario {
            name: name.into(),
            frame: Arc::new(CartesianFrame { dim: 2 }),
            sectional_curvature: Some(0.0),
            sample_box: vec![(-1.0, 1.0); 2],
            geodesic: Some(GeodesicKind::Euclidean),
        },
        "flat_cartesian_3d" => Scenario {
            name: name.into(),
            frame: Arc::new(CartesianFrame { dim: 3 }),
            sectional_curvature: Some(0.0),
            sample_box: vec![(-1.0, 1.0); 3],
            geodesic: Some(GeodesicKind::Euclidean),
        },
        "flat_polar_2d" => Scenario {
            name: name.into(),
            frame: Arc::new(PolarFrame {
                margin: params.margin,
            }),
            sectional_curvature: Some(0.0),
            sample_box: vec![(0.5, 3.0), (0.0, 2.0 * PI)],
            geodesic: Some(GeodesicKind::Polar),
        },
        "flat_rotated_2d" => Scenario {
            name: name.into(),
            frame: Arc::new(RotatedFlatFrame {
                rate: params.rotation_rate,
            }),
            sectional_curvature: Some(0.0),
            sample_box: vec![(-1.0, 1.0); 2],
            geodesic: Some(GeodesicKind::Euclidean),
        },
        "sphere" => {
            let radius = curved_radius()?;
            Scenario {
                name: name.into(),
                frame: Arc::new(SphereFrame {
                    radius,
                    margin: params.margin,
                }),
                sectional_curvature: Some(1.0 / (radius * radius)),
                sample_box: vec![pole_box, (0.0, 2.0 * PI)],
                geodesic: Some(GeodesicKind::Sphere { radius }),
            }
        }
        "sphere3" => {
            let radius = curved_radius()?;
            Scenario {
                name: name.into(),
                frame: Arc::new(Sphere3Frame {
                    radius,
                    margin: params.margin,
                }),
                sectional_curvature: Some(1.0 / (radius * radius)),
                sample_box: vec![pole_box, pole_box, (0.0, 2.0 * PI)],
                geodesic: Some(GeodesicKind::Sphere3 { radius }),
            }
        }
        "hyperbolic_upper_half" => Scenario {
            name: name.into(),
            frame: Arc::new(HyperbolicFrame {
                margin: params.margin,
            }),
            sectional_curvature: Some(-1.0),
            sample_box: vec![(-1.0, 1.0), (0.5, 3.0)],
            geodesic: Some(GeodesicKind::Hyperbolic),
        },
        other => return Err(Error::UnknownScenario(other.to_string())),
    };
    Ok(scenario)
}

impl Scenario {
    pub fn dim(&self) -> usize {
        self.frame.dim()
    }

    /// Tensor-product grid with `per_axis` points per coordinate, interior
    /// to `sample_box` (cell midpoints).
    pub fn grid(&self, per_axis: usize) -> Vec<Vec<f64>> {
        let n = self.dim();
        let axes: Vec<Vec<f64>> = self
            .sample_box
            .iter()
            .map(|&(lo, hi)| {
                (0..per_axis)
                    .map(|k| lo + (hi - lo) * (k as f64 + 0.5) / per_axis as f64)
                    .collect()
            })
            .collect();
        let total = per_axis.pow(n as u32);
        (0..total)
            .map(|mut idx| {
                let mut p = vec![0.0; n];
                for i in (0..n).rev() {
                    p[i] = axes[i][idx % per_axis];
                    idx /= per_axis;
                }
                p
            })
            .collect()
    }

    pub fn has_geodesic_oracle(&self) -> bool {
        self.geodesic.is_some()
    }

    /// Exact geodesic position at time `t` from `position` with coordinate
    /// velocity `velocity`. Angular coordinates are unwrapped continuously.
    pub fn geodesic_oracle(&self, position: &[f64], velocity: &[f64], t: f64) -> Result<Vec<f64>> {
        let kind = self
            .geodesic
            .ok_or_else(|| Error::OracleUnavailable(self.name.clone()))?;
        let n = self.dim();
        if position.len() != n || velocity.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: position.len().min(velocity.len()),
            });
        }
        Ok(match kind {
            GeodesicKind::Euclidean => position
                .iter()
                .zip(velocity)
                .map(|(x, v)| x + v * t)
                .collect(),
            GeodesicKind::Polar => polar_geodesic(position, velocity, t),
            GeodesicKind::Sphere { radius } => sphere_geodesic(radius, position, velocity, t),
            GeodesicKind::Sphere3 { radius } => sphere3_geodesic(radius, position, velocity, t),
            GeodesicKind::Hyperbolic => hyperbolic_geodesic(position, velocity, t),
        })
    }
}

fn unwrap_near(reference: f64, raw: f64) -> f64 {
    raw + 2.0 * PI * ((reference - raw) / (2.0 * PI)).round()
}

/// Marches `angle_at(s)` for `s` in `[0, 1]` in enough substeps that the
/// angle never jumps by more than a fraction of a turn, unwrapping as it goes.
fn track_angle(start: f64, substeps: usize, angle_at: impl Fn(f64) -> f64) -> f64 {
    let mut current = start;
    for k in 1..=substeps {
        current = unwrap_near(current, angle_at(k as f64 / substeps as f64));
    }
    current
}

fn polar_geodesic(x0: &[f64], v0: &[f64], t: f64) -> Vec<f64> {
    let (r, phi) = (x0[0], x0[1]);
    let (s, c) = phi.sin_cos();
    let p0 = [r * c, r * s];
    let vel = [v0[0] * c - r * v0[1] * s, v0[0] * s + r * v0[1] * c];
    let at = |frac: f64| [p0[0] + vel[0] * t * frac, p0[1] + vel[1] * t * frac];
    let end = at(1.0);
    let phi_end = track_angle(phi, 1024, |frac| {
        let p = at(frac);
        p[1].atan2(p[0])
    });
    vec![end[0].hypot(end[1]), phi_end]
}

fn sphere_geodesic(radius: f64, x0: &[f64], v0: &[f64], t: f64) -> Vec<f64> {
    let (th, ph) = (x0[0], x0[1]);
    let (st, ct) = th.sin_cos();
    let (sp, cp) = ph.sin_cos();
    let p0 = [radius * st * cp, radius * st * sp, radius * ct];
    let d_th = [radius * ct * cp, radius * ct * sp, -radius * st];
    let d_ph = [-radius * st * sp, radius * st * cp, 0.0];
    let vel: Vec<f64> = (0..3).map(|k| v0[0] * d_th[k] + v0[1] * d_ph[k]).collect();
    let speed = vel.iter().map(|v| v * v).sum::<f64>().sqrt();
    if speed == 0.0 {
        return x0.to_vec();
    }
    let omega = speed / radius;
    let at = |frac: f64| -> [f64; 3] {
        let a = omega * t * frac;
        let (sa, ca) = a.sin_cos();
        [
            ca * p0[0] + sa * vel[0] / omega,
            ca * p0[1] + sa * vel[1] / omega,
            ca * p0[2] + sa * vel[2] / omega,
        ]
    };
    let end = at(1.0);
    let substeps = ((omega * t).abs() / 0.25).ceil().max(1.0) as usize * 8;
    let phi_end = track_angle(ph, substeps, |frac| {
        let p = at(frac);
        p[1].atan2(p[0])
    });
    vec![(end[2] / radius).clamp(-1.0, 1.0).acos(), phi_end]
}

fn sphere3_geodesic(radius: f64, x0: &[f64], v0: &[f64], t: f64) -> Vec<f64> {
    let embed = |x: &[f64]| -> [f64; 4] {
        let (s0, c0) = x[0].sin_cos();
        let (s1, c1) = x[1].sin_cos();
        let (s2, c2) = x[2].sin_cos();
        [
            radius * c0,
            radius * s0 * c1,
            radius * s0 * s1 * c2,
            radius * s0 * s1 * s2,
        ]
    };
    let (s0, c0) = x0[0].sin_cos();
    let (s1, c1) = x0[1].sin_cos();
    let (s2, c2) = x0[2].sin_cos();
    let d0 = [-s0, c0 * c1, c0 * s1 * c2, c0 * s1 * s2];
    let d1 = [0.0, -s0 * s1, s0 * c1 * c2, s0 * c1 * s2];
    let d2 = [0.0, 0.0, -s0 * s1 * s2, s0 * s1 * c2];
    let p0 = embed(x0);
    let vel: Vec<f64> = (0..4)
        .map(|k| radius * (v0[0] * d0[k] + v0[1] * d1[k] + v0[2] * d2[k]))
        .collect();
    let speed = vel.iter().map(|v| v * v).sum::<f64>().sqrt();
    if speed == 0.0 {
        return x0.to_vec();
    }
    let omega = speed / radius;
    let at = |frac: f64| -> [f64; 4] {
        let a = omega * t * frac;
        let (sa, ca) = a.sin_cos();
        let mut p = [0.0; 4];
        for k in 0..4 {
            p[k] = ca * p0[k] + sa * vel[k] / omega;
        }
        p
    };
    let end = at(1.0);
    let chi = (end[0] / radius).clamp(-1.0, 1.0).acos();
    let theta = end[2].hypot(end[3]).atan2(end[1]);
    let substeps = ((omega * t).abs() / 0.25).ceil().max(1.0) as usize * 8;
    let phi = track_angle(x0[2], substeps, |frac| {
        let p = at(frac);
        p[3].atan2(p[2])
    });
    vec![chi, theta, phi]
}

fn hyperbolic_geodesic(x0: &[f64], v0: &[f64], t: f64) -> Vec<f64> {
    let (x, y) = (x0[0], x0[1]);
    let speed = v0[0].hypot(v0[1]) / y;
    if speed == 0.0 {
        return x0.to_vec();
    }
    if v0[0].abs() <= 1e-14 * v0[1].abs() {
        return vec![x, y * (v0[1].signum() * speed * t).exp()];
    }
    let center = x + y * v0[1] / v0[0];
    let rho = (x - center).hypot(y);
    let s0 = ((x - center) / rho).atanh();
    let u = v0[0].signum() * speed * t + s0;
    vec![center + rho * u.tanh(), rho / u.cosh()]
}
