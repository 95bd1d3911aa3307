//! Lagrangian, Legendre map and Hamiltonian of the isotropic tangent body.
//!
//! Velocities `v^a` are frame components of the center-of-mass velocity.
//! The rotational term pairs both antisymmetric indices,
//! `L = m/2 |v|^2 + I/2 sum_ab W_ab W_ab` with
//! `W_ab = eta_ab + gamma_cab v^c`, so that treating every `eta_ab` as an
//! independent velocity gives `S_ab = dL/d eta_ab = I W_ab` and the frame
//! momentum `p_a = m v_a + gamma_acd S_cd`.

use nalgebra::DMatrix;

use super::state::{AngularVelocity, BodyParams, BodyState, SpinTensor};
use crate::error::{Error, Result};
use crate::geometry::{coframe_with_inverse, ConnectionCoeffs, FrameField, FrameJet};

/// `p_a = e^i_a p_i`
pub fn frame_momentum<F: FrameField + ?Sized>(state: &BodyState, frame: &F) -> Result<Vec<f64>> {
    let (_, inverse) = coframe_with_inverse(frame, &state.position)?;
    Ok(inverse
        .tr_mul(&nalgebra::DVector::from_column_slice(&state.momentum))
        .as_slice()
        .to_vec())
}

/// `p_i = e^a_i p_a`
pub fn coordinate_momentum<F: FrameField + ?Sized>(
    frame: &F,
    position: &[f64],
    frame_momentum: &[f64],
) -> Result<Vec<f64>> {
    let (coframe, _) = coframe_with_inverse(frame, position)?;
    Ok(coframe
        .tr_mul(&nalgebra::DVector::from_column_slice(frame_momentum))
        .as_slice()
        .to_vec())
}

/// `W_ab = eta_ab + gamma_cab v^c`
pub fn covariant_angular_velocity(
    eta: &AngularVelocity,
    velocity: &[f64],
    gamma: &ConnectionCoeffs,
) -> DMatrix<f64> {
    eta.matrix() + gamma.contract_first(velocity)
}

/// Velocity of a material point at offset `r`:
/// `rdot^a = (eta_b^a + v^c gamma_cb^a) r^b`.
pub fn material_velocity(
    eta: &AngularVelocity,
    velocity: &[f64],
    gamma: &ConnectionCoeffs,
    offset: &[f64],
) -> Vec<f64> {
    let w = covariant_angular_velocity(eta, velocity, gamma);
    let n = w.nrows();
    (0..n)
        .map(|a| (0..n).map(|b| w[(b, a)] * offset[b]).sum())
        .collect()
}

pub fn lagrangian(
    velocity: &[f64],
    eta: &AngularVelocity,
    gamma: &ConnectionCoeffs,
    params: &BodyParams,
) -> f64 {
    let w = covariant_angular_velocity(eta, velocity, gamma);
    let translational: f64 = velocity.iter().map(|v| v * v).sum();
    let rotational: f64 = w.iter().map(|x| x * x).sum();
    0.5 * params.mass * translational + 0.5 * params.inertia * rotational
}

/// `gamma_acd S_cd` summed over both `c, d`.
pub fn spin_coupling(gamma: &ConnectionCoeffs, spin: &SpinTensor) -> Vec<f64> {
    let n = gamma.dim();
    (0..n)
        .map(|a| {
            let mut sum = 0.0;
            for c in 0..n {
                for d in (c + 1)..n {
                    // gamma_acd S_cd + gamma_adc S_dc = 2 gamma_acd S_cd
                    sum += 2.0 * gamma.get(a, c, d) * spin.get(c, d);
                }
            }
            sum
        })
        .collect()
}

/// Legendre map `(v, eta) -> (p_i, S_ab)`.
pub fn momenta_from_velocities(
    velocity: &[f64],
    eta: &AngularVelocity,
    jet: &FrameJet,
    gamma: &ConnectionCoeffs,
    params: &BodyParams,
) -> Result<(Vec<f64>, SpinTensor)> {
    let n = jet.dim();
    if velocity.len() != n || eta.dim() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: velocity.len(),
        });
    }
    let w = covariant_angular_velocity(eta, velocity, gamma);
    let spin = SpinTensor::from_matrix(&(w * params.inertia))?;
    let coupling = spin_coupling(gamma, &spin);
    let p_frame: Vec<f64> = (0..n)
        .map(|a| params.mass * velocity[a] + coupling[a])
        .collect();
    let p_coord = (0..n)
        .map(|i| (0..n).map(|a| jet.coframe[(a, i)] * p_frame[a]).sum())
        .collect();
    Ok((p_coord, spin))
}

/// Kinetic momentum `m v_a = e^i_a p_i - gamma_acd S_cd`.
pub fn kinetic_momentum(state: &BodyState, jet: &FrameJet, gamma: &ConnectionCoeffs) -> Vec<f64> {
    let n = jet.dim();
    let coupling = spin_coupling(gamma, &state.spin);
    (0..n)
        .map(|a| {
            let pa: f64 = (0..n)
                .map(|i| jet.inverse[(i, a)] * state.momentum[i])
                .sum();
            pa - coupling[a]
        })
        .collect()
}

/// `v^a = (p_a - gamma_acd S_cd) / m`
pub fn velocity_from_momenta(
    state: &BodyState,
    jet: &FrameJet,
    gamma: &ConnectionCoeffs,
    params: &BodyParams,
) -> Vec<f64> {
    kinetic_momentum(state, jet, gamma)
        .into_iter()
        .map(|pi| pi / params.mass)
        .collect()
}

/// Evolved Hamiltonian `H = |p_a - gamma_acd S_cd|^2 / 2m`; the constant
/// spin energy is kept out (see [`spin_energy`]).
pub fn hamiltonian(
    state: &BodyState,
    jet: &FrameJet,
    gamma: &ConnectionCoeffs,
    params: &BodyParams,
) -> f64 {
    let pi = kinetic_momentum(state, jet, gamma);
    pi.iter().map(|v| v * v).sum::<f64>() / (2.0 * params.mass)
}

/// `S^2 / 2I = sum_ab S_ab S_ab / 2I`. `None` when `I = 0` and the spin is
/// nonzero.
pub fn spin_energy(spin: &SpinTensor, params: &BodyParams) -> Option<f64> {
    if params.inertia > 0.0 {
        Some(spin.casimir() / params.inertia)
    } else if spin.is_zero() {
        Some(0.0)
    } else {
        None
    }
}

/// Evolved Hamiltonian plus the spin energy.
pub fn total_energy(
    state: &BodyState,
    jet: &FrameJet,
    gamma: &ConnectionCoeffs,
    params: &BodyParams,
) -> Option<f64> {
    spin_energy(&state.spin, params).map(|e| e + hamiltonian(state, jet, gamma, params))
}
