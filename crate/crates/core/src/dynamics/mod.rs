//! Mechanics of the isotropic tangent body: Legendre map, Hamiltonian, spin
//! algebra and the phase-space vector field.

mod field;
mod mechanics;
pub mod spin;
mod state;

pub use field::{
    momentum_rate, spin_rate, spin_transport, state_derivative, StateRate, TangentBody,
};
pub use mechanics::{
    coordinate_momentum, covariant_angular_velocity, frame_momentum, hamiltonian, kinetic_momentum,
    lagrangian, material_velocity, momenta_from_velocities, spin_coupling, spin_energy,
    total_energy, velocity_from_momenta,
};
pub use spin::{basis_bracket, casimir, lie_poisson, spin_bracket};
pub use state::{upper_len, AngularVelocity, BodyParams, BodyState, SpinTensor};
