//! Discrete tangent rigid body: mass points in the tangent space at the
//! center of mass.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Relative tolerance for the center-of-mass condition, scaled by
/// `sum m_a |r_a|`.
pub const DEFAULT_CENTER_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MassPoint {
    pub mass: f64,
    pub offset: Vec<f64>,
}

impl MassPoint {
    pub fn new(mass: f64, offset: impl Into<Vec<f64>>) -> Self {
        Self {
            mass,
            offset: offset.into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BodyModel {
    pub points: Vec<MassPoint>,
    pub total_mass: f64,
    /// `I^ab = sum m r^a r^b`
    pub inertia: DMatrix<f64>,
}

/// Builds the body and checks `sum m_a r_a = 0` to `tol` relative to
/// `sum m_a |r_a|`.
pub fn build_body(points: Vec<MassPoint>, tol: f64) -> Result<BodyModel> {
    if points.is_empty() {
        return Err(Error::EmptyBody);
    }
    if !(tol > 0.0) {
        return Err(Error::InvalidInput(format!(
            "tolerance {tol} must be positive"
        )));
    }
    let n = points[0].offset.len();
    for p in &points {
        if p.offset.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: p.offset.len(),
            });
        }
        if !(p.mass > 0.0) || !p.mass.is_finite() {
            return Err(Error::InvalidInput(format!(
                "mass {} must be positive",
                p.mass
            )));
        }
        if p.offset.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidInput(format!(
                "offset {:?} is not finite",
                p.offset
            )));
        }
    }

    let total_mass = points.iter().map(|p| p.mass).sum();
    let mut moment = vec![0.0; n];
    let mut scale = 0.0;
    let mut inertia = DMatrix::zeros(n, n);
    for p in &points {
        let r = &p.offset;
        scale += p.mass * r.iter().map(|v| v * v).sum::<f64>().sqrt();
        for a in 0..n {
            moment[a] += p.mass * r[a];
            for b in 0..n {
                inertia[(a, b)] += p.mass * r[a] * r[b];
            }
        }
    }
    let norm = moment.iter().map(|v| v * v).sum::<f64>().sqrt();
    let allowed = tol * scale;
    if norm > allowed {
        return Err(Error::CenterOffset {
            offset: moment,
            norm,
            tol: allowed,
        });
    }

    Ok(BodyModel {
        points,
        total_mass,
        inertia,
    })
}

impl BodyModel {
    pub fn dim(&self) -> usize {
        self.inertia.nrows()
    }

    /// `I = trace(I^ab) / n`, and whether `max |I^ab - I delta^ab| <= tol`.
    pub fn is_isotropic(&self, tol: f64) -> (bool, f64) {
        let n = self.dim();
        let scalar = self.inertia.trace() / n as f64;
        let deviation = self.isotropy_deviation(scalar);
        (deviation <= tol, scalar)
    }

    fn isotropy_deviation(&self, scalar: f64) -> f64 {
        let n = self.dim();
        let mut worst = 0.0_f64;
        for a in 0..n {
            for b in 0..n {
                let target = if a == b { scalar } else { 0.0 };
                worst = worst.max((self.inertia[(a, b)] - target).abs());
            }
        }
        worst
    }

    /// The scalar inertia, or [`Error::Anisotropic`] when the body does not
    /// have `I^ab = I delta^ab`.
    pub fn scalar_inertia(&self, tol: f64) -> Result<f64> {
        let (ok, scalar) = self.is_isotropic(tol);
        if ok {
            Ok(scalar)
        } else {
            Err(Error::Anisotropic {
                deviation: self.isotropy_deviation(scalar),
            })
        }
    }
}

/// `k` unit masses at the vertices of a regular polygon of circumradius
/// `radius`.
pub fn regular_polygon(k: usize, radius: f64) -> Vec<MassPoint> {
    (0..k)
        .map(|j| {
            let angle = 2.0 * std::f64::consts::PI * j as f64 / k as f64;
            MassPoint::new(1.0, vec![radius * angle.cos(), radius * angle.sin()])
        })
        .collect()
}
