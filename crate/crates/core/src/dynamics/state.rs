use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::body::BodyModel;
use crate::error::{Error, Result};

/// Antisymmetric spin tensor `S_ab`, stored as its strict upper triangle in
/// lexicographic order `S_12, S_13, ..., S_23, ...`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpinTensor {
    dim: usize,
    upper: Vec<f64>,
}

pub fn upper_len(dim: usize) -> usize {
    dim * dim.saturating_sub(1) / 2
}

impl SpinTensor {
    pub fn zeros(dim: usize) -> Self {
        Self {
            dim,
            upper: vec![0.0; upper_len(dim)],
        }
    }

    pub fn from_upper(dim: usize, upper: Vec<f64>) -> Result<Self> {
        if upper.len() != upper_len(dim) {
            return Err(Error::ShapeMismatch(format!(
                "{} spin components for dimension {dim}, expected {}",
                upper.len(),
                upper_len(dim)
            )));
        }
        if upper.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidInput("spin components must be finite".into()));
        }
        Ok(Self { dim, upper })
    }

    /// Accepts a square matrix whose symmetric part is negligible
    /// (`|S + S^T| <= 1e-12 max|S|`); keeps the antisymmetric part.
    pub fn from_matrix(m: &DMatrix<f64>) -> Result<Self> {
        let n = m.nrows();
        if m.ncols() != n {
            return Err(Error::ShapeMismatch(format!(
                "spin matrix is {}x{}",
                n,
                m.ncols()
            )));
        }
        let sym = (m + m.transpose()).amax();
        if sym > 1e-12 * m.amax().max(1.0) {
            return Err(Error::InvalidInput(format!(
                "spin matrix is not antisymmetric (|S + S^T| = {sym:e})"
            )));
        }
        let mut upper = Vec::with_capacity(upper_len(n));
        for a in 0..n {
            for b in (a + 1)..n {
                upper.push(0.5 * (m[(a, b)] - m[(b, a)]));
            }
        }
        Self::from_upper(n, upper)
    }

    /// Two-dimensional spin with `S_12 = s`.
    pub fn planar(s: f64) -> Self {
        Self {
            dim: 2,
            upper: vec![s],
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn upper(&self) -> &[f64] {
        &self.upper
    }

    pub fn upper_index(&self, a: usize, b: usize) -> usize {
        debug_assert!(a < b && b < self.dim);
        a * self.dim - a * (a + 1) / 2 + (b - a - 1)
    }

    pub fn get(&self, a: usize, b: usize) -> f64 {
        match a.cmp(&b) {
            std::cmp::Ordering::Less => self.upper[self.upper_index(a, b)],
            std::cmp::Ordering::Greater => -self.upper[self.upper_index(b, a)],
            std::cmp::Ordering::Equal => 0.0,
        }
    }

    pub fn matrix(&self) -> DMatrix<f64> {
        DMatrix::from_fn(self.dim, self.dim, |a, b| self.get(a, b))
    }

    /// `1/2 sum_ab S_ab S_ab`
    pub fn casimir(&self) -> f64 {
        self.upper.iter().map(|s| s * s).sum()
    }

    pub fn is_zero(&self) -> bool {
        self.upper.iter().all(|&s| s == 0.0)
    }
}

/// Phase-space point `(x^i, p_i, S_ab)`; `p_i` are coordinate momenta.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BodyState {
    pub position: Vec<f64>,
    pub momentum: Vec<f64>,
    pub spin: SpinTensor,
}

impl BodyState {
    pub fn new(position: Vec<f64>, momentum: Vec<f64>, spin: SpinTensor) -> Result<Self> {
        let n = position.len();
        if momentum.len() != n || spin.dim() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: if momentum.len() != n {
                    momentum.len()
                } else {
                    spin.dim()
                },
            });
        }
        if position.iter().chain(&momentum).any(|v| !v.is_finite()) {
            return Err(Error::InvalidInput(
                "state components must be finite".into(),
            ));
        }
        Ok(Self {
            position,
            momentum,
            spin,
        })
    }

    pub fn dim(&self) -> usize {
        self.position.len()
    }

    /// Packs `[x, p, S_upper]`.
    pub fn to_vector(&self) -> Vec<f64> {
        let mut v = Vec::with_capacity(2 * self.dim() + self.spin.upper().len());
        v.extend_from_slice(&self.position);
        v.extend_from_slice(&self.momentum);
        v.extend_from_slice(self.spin.upper());
        v
    }

    pub fn from_vector(dim: usize, v: &[f64]) -> Result<Self> {
        if v.len() != 2 * dim + upper_len(dim) {
            return Err(Error::ShapeMismatch(format!(
                "phase vector of length {} for dimension {dim}",
                v.len()
            )));
        }
        Self::new(
            v[..dim].to_vec(),
            v[dim..2 * dim].to_vec(),
            SpinTensor::from_upper(dim, v[2 * dim..].to_vec())?,
        )
    }

    pub fn is_finite(&self) -> bool {
        self.to_vector().iter().all(|v| v.is_finite())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BodyParams {
    pub mass: f64,
    /// Scalar inertia `I` of an isotropic body.
    pub inertia: f64,
}

impl BodyParams {
    pub fn new(mass: f64, inertia: f64) -> Result<Self> {
        if !(mass > 0.0) || !mass.is_finite() {
            return Err(Error::InvalidInput(format!("mass {mass} must be positive")));
        }
        if !(inertia >= 0.0) || !inertia.is_finite() {
            return Err(Error::InvalidInput(format!(
                "inertia {inertia} must be non-negative"
            )));
        }
        Ok(Self { mass, inertia })
    }

    /// Rejects anisotropic bodies.
    pub fn from_body(body: &BodyModel, isotropy_tol: f64) -> Result<Self> {
        let inertia = body.scalar_inertia(isotropy_tol)?;
        Self::new(body.total_mass, inertia)
    }
}

/// Antisymmetric angular velocity `eta_ab`.
#[derive(Debug, Clone, PartialEq)]
pub struct AngularVelocity(DMatrix<f64>);

impl AngularVelocity {
    pub fn new(eta: DMatrix<f64>) -> Result<Self> {
        let spin = SpinTensor::from_matrix(&eta)?;
        Ok(Self(spin.matrix()))
    }

    pub fn zeros(dim: usize) -> Self {
        Self(DMatrix::zeros(dim, dim))
    }

    /// Generator of rotation in the `(a, b)` plane at `rate`.
    pub fn plane(dim: usize, a: usize, b: usize, rate: f64) -> Self {
        let mut m = DMatrix::zeros(dim, dim);
        m[(a, b)] = rate;
        m[(b, a)] = -rate;
        Self(m)
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.0
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }
}
