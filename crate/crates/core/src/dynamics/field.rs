//! Hamilton equations for `(x^i, p_i, S_ab)`:
//!
//! * `dx^i/dt = e^i_a v^a` with `v` from the Legendre inversion,
//! * `dp_i/dt = -dH/dx^i` (canonical, `[p_i, p_j] = 0`),
//! * `dS_ab/dt = [H, S_ab] = -v^c (gamma_cad S_db + gamma_cbd S_ad)`.

use std::sync::Arc;

use nalgebra::DMatrix;

use super::mechanics::{
    hamiltonian, kinetic_momentum, momenta_from_velocities, spin_energy, velocity_from_momenta,
};
use super::state::{AngularVelocity, BodyParams, BodyState, SpinTensor};
use crate::error::{Error, Result};
use crate::geometry::{fd, ConnectionCoeffs, Derivatives, FrameField, JetOrder, PointGeometry};

/// `-v^c (gamma_cad S_db + gamma_cbd S_ad)`: the rate that keeps `S`
/// parallel along a path with frame velocity `v`.
pub fn spin_transport(
    gamma: &ConnectionCoeffs,
    velocity: &[f64],
    spin: &DMatrix<f64>,
) -> DMatrix<f64> {
    let n = gamma.dim();
    DMatrix::from_fn(n, n, |a, b| {
        let mut total = 0.0;
        for c in 0..n {
            let mut inner = 0.0;
            for d in 0..n {
                inner += gamma.get(c, a, d) * spin[(d, b)] + gamma.get(c, b, d) * spin[(a, d)];
            }
            total += velocity[c] * inner;
        }
        -total
    })
}

pub fn spin_rate(state: &BodyState, geometry: &PointGeometry, params: &BodyParams) -> DMatrix<f64> {
    let v = velocity_from_momenta(state, &geometry.jet, &geometry.gamma, params);
    spin_transport(&geometry.gamma, &v, &state.spin.matrix())
}

/// `-dH/dx^i` from analytic derivatives of the frame and connection.
pub fn momentum_rate(
    state: &BodyState,
    geometry: &PointGeometry,
    params: &BodyParams,
) -> Result<Vec<f64>> {
    let n = geometry.dim();
    let dgamma = geometry.dgamma()?;
    let d_inverse = geometry.jet.inverse_derivatives();
    let pi = kinetic_momentum(state, &geometry.jet, &geometry.gamma);
    Ok((0..n)
        .map(|i| {
            let mut dh = 0.0;
            for a in 0..n {
                let mut dpi: f64 = (0..n)
                    .map(|j| d_inverse[i][(j, a)] * state.momentum[j])
                    .sum();
                for c in 0..n {
                    for d in (c + 1)..n {
                        dpi -= 2.0 * dgamma[i][(a, c, d)] * state.spin.get(c, d);
                    }
                }
                dh += pi[a] * dpi;
            }
            -dh / params.mass
        })
        .collect())
}

/// Time derivative of a phase-space point.
#[derive(Debug, Clone, PartialEq)]
pub struct StateRate {
    pub position: Vec<f64>,
    pub momentum: Vec<f64>,
    /// Full `n x n` spin rate as computed (before any projection).
    pub spin: DMatrix<f64>,
}

impl StateRate {
    /// Packs `[dx, dp, dS_upper]`, keeping the antisymmetric part of `dS`.
    /// Also returns the size of the discarded symmetric part.
    pub fn to_vector(&self) -> (Vec<f64>, f64) {
        let n = self.position.len();
        let mut v = Vec::with_capacity(2 * n + n * (n - 1) / 2);
        v.extend_from_slice(&self.position);
        v.extend_from_slice(&self.momentum);
        let mut projection = 0.0_f64;
        for a in 0..n {
            for b in (a + 1)..n {
                v.push(0.5 * (self.spin[(a, b)] - self.spin[(b, a)]));
                projection = projection.max(0.5 * (self.spin[(a, b)] + self.spin[(b, a)]).abs());
            }
        }
        for a in 0..n {
            projection = projection.max(self.spin[(a, a)].abs());
        }
        (v, projection)
    }
}

pub fn state_derivative(
    state: &BodyState,
    geometry: &PointGeometry,
    params: &BodyParams,
) -> Result<StateRate> {
    let v = velocity_from_momenta(state, &geometry.jet, &geometry.gamma, params);
    let n = v.len();
    let position = (0..n)
        .map(|i| (0..n).map(|a| geometry.jet.inverse[(i, a)] * v[a]).sum())
        .collect();
    Ok(StateRate {
        position,
        momentum: momentum_rate(state, geometry, params)?,
        spin: spin_transport(&geometry.gamma, &v, &state.spin.matrix()),
    })
}

/// A frame field, a derivative backend and body parameters: everything that
/// defines the vector field.
#[derive(Clone)]
pub struct TangentBody {
    pub frame: Arc<dyn FrameField>,
    pub derivatives: Derivatives,
    pub params: BodyParams,
}

impl TangentBody {
    pub fn new(frame: Arc<dyn FrameField>, params: BodyParams) -> Self {
        Self {
            frame,
            derivatives: Derivatives::Analytic,
            params,
        }
    }

    pub fn with_derivatives(mut self, derivatives: Derivatives) -> Self {
        self.derivatives = derivatives;
        self
    }

    pub fn dim(&self) -> usize {
        self.frame.dim()
    }

    pub fn in_chart(&self, x: &[f64]) -> bool {
        x.len() == self.dim() && x.iter().all(|v| v.is_finite()) && self.frame.in_chart(x)
    }

    pub fn geometry(&self, x: &[f64], order: JetOrder) -> Result<PointGeometry> {
        PointGeometry::evaluate(self.frame.as_ref(), x, &self.derivatives, order)
    }

    fn check(&self, state: &BodyState) -> Result<()> {
        if state.dim() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: state.dim(),
            });
        }
        Ok(())
    }

    /// Frame velocity `v^a`.
    pub fn velocity(&self, state: &BodyState) -> Result<Vec<f64>> {
        self.check(state)?;
        let g = self.geometry(&state.position, JetOrder::First)?;
        Ok(velocity_from_momenta(state, &g.jet, &g.gamma, &self.params))
    }

    pub fn hamiltonian(&self, state: &BodyState) -> Result<f64> {
        self.check(state)?;
        let g = self.geometry(&state.position, JetOrder::First)?;
        Ok(hamiltonian(state, &g.jet, &g.gamma, &self.params))
    }

    pub fn spin_energy(&self, state: &BodyState) -> Option<f64> {
        spin_energy(&state.spin, &self.params)
    }

    pub fn spin_rate(&self, state: &BodyState) -> Result<DMatrix<f64>> {
        self.check(state)?;
        let g = self.geometry(&state.position, JetOrder::First)?;
        Ok(spin_rate(state, &g, &self.params))
    }

    pub fn momentum_rate(&self, state: &BodyState) -> Result<Vec<f64>> {
        self.check(state)?;
        let g = self.geometry(&state.position, JetOrder::Second)?;
        momentum_rate(state, &g, &self.params)
    }

    /// `-dH/dx^i` by central differences of the Hamiltonian in the chart.
    pub fn momentum_rate_by_differencing(
        &self,
        state: &BodyState,
        rel_step: f64,
    ) -> Result<Vec<f64>> {
        self.check(state)?;
        let grad = fd::gradient(
            |x| {
                let shifted = BodyState {
                    position: x.to_vec(),
                    ..state.clone()
                };
                self.hamiltonian(&shifted)
            },
            &state.position,
            rel_step,
        )?;
        Ok(grad.into_iter().map(|g| -g).collect())
    }

    pub fn rate(&self, state: &BodyState) -> Result<StateRate> {
        self.check(state)?;
        let g = self.geometry(&state.position, JetOrder::Second)?;
        state_derivative(state, &g, &self.params)
    }

    /// Phase-space point from a coordinate velocity `xdot^i` and a spin.
    pub fn state_from_spin(
        &self,
        position: &[f64],
        coord_velocity: &[f64],
        spin: SpinTensor,
    ) -> Result<BodyState> {
        let g = self.geometry(position, JetOrder::First)?;
        let n = self.dim();
        if coord_velocity.len() != n || spin.dim() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: coord_velocity.len(),
            });
        }
        let v: Vec<f64> = (0..n)
            .map(|a| {
                (0..n)
                    .map(|i| g.jet.coframe[(a, i)] * coord_velocity[i])
                    .sum()
            })
            .collect();
        let coupling = super::mechanics::spin_coupling(&g.gamma, &spin);
        let p: Vec<f64> = (0..n)
            .map(|i| {
                (0..n)
                    .map(|a| g.jet.coframe[(a, i)] * (self.params.mass * v[a] + coupling[a]))
                    .sum()
            })
            .collect();
        BodyState::new(position.to_vec(), p, spin)
    }

    /// Phase-space point from a coordinate velocity and angular velocity
    /// through the Legendre map.
    pub fn state_from_angular_velocity(
        &self,
        position: &[f64],
        coord_velocity: &[f64],
        eta: &AngularVelocity,
    ) -> Result<BodyState> {
        let g = self.geometry(position, JetOrder::First)?;
        let n = self.dim();
        if coord_velocity.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: coord_velocity.len(),
            });
        }
        let v: Vec<f64> = (0..n)
            .map(|a| {
                (0..n)
                    .map(|i| g.jet.coframe[(a, i)] * coord_velocity[i])
                    .sum()
            })
            .collect();
        let (p, spin) = momenta_from_velocities(&v, eta, &g.jet, &g.gamma, &self.params)?;
        BodyState::new(position.to_vec(), p, spin)
    }
}
