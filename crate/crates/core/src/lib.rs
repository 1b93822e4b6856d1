//! Design and verification of excitation-free rotations of a particle in a
//! rotating two-dimensional anisotropic harmonic trap.
//!
//! The rotating-frame Hamiltonian is a quadratic form that a product of four
//! symplectic matrices brings to two uncoupled oscillators. When the normal
//! frequencies are commensurate every state revives after a common period,
//! which [`designer`] turns into rotation protocols. [`classical`] and
//! [`quantum`] check those protocols by exact propagation.
//!
//! All numerics are generic over [`Real`] (`f32` or `f64`); the `*F64`
//! aliases below fix the usual double-precision instantiation.

#![allow(clippy::neg_cmp_op_on_partial_ord)] // `!(x > 0)` also rejects NaN

pub mod classical;
pub mod designer;
pub mod error;
pub mod model;
pub mod quantum;
pub mod scalar;
pub mod symplectic;

pub use error::{Error, Result};
pub use scalar::Real;

pub use classical::{
    lab_frame_state, propagate_normal, propagate_rotating, sample_trajectory, Frame,
    RotatingFlow, Trajectory,
};
pub use designer::{
    commensurate_velocity, design_protocol, ground_state_sensitivity, kappa, minimal_time,
    RotationProtocol, SensitivityReport,
};
pub use model::{
    build_rotating_hamiltonian, hamiltonian_value, symplectic_metric, williamson_valid,
    PhaseSpaceState, QuadraticForm, TrapConfig,
};
pub use symplectic::{
    from_normal_coords, normal_mode_energy, normal_modes, step_transforms, symplectic_generator,
    to_normal_coords, NormalModes, StepTransforms, SymplecticTransform,
};

pub type TrapConfigF64 = TrapConfig<f64>;
pub type QuadraticFormF64 = QuadraticForm<f64>;
pub type PhaseSpaceStateF64 = PhaseSpaceState<f64>;
pub type NormalModesF64 = NormalModes<f64>;
pub type SymplecticTransformF64 = SymplecticTransform<f64>;
pub type RotationProtocolF64 = RotationProtocol<f64>;
pub type TrajectoryF64 = Trajectory<f64>;
pub type QuantumStateF64 = quantum::QuantumState<f64>;
pub type FockHamiltonianF64 = quantum::FockHamiltonian<f64>;

pub type TrapConfigF32 = TrapConfig<f32>;
pub type NormalModesF32 = NormalModes<f32>;
pub type RotationProtocolF32 = RotationProtocol<f32>;
