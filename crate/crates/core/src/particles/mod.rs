//! Particle representation of the ion distribution and the regularised
//! particle-in-cell time loop.

mod ensemble;
mod initial;
mod pic;
mod simulation;

pub use ensemble::{ParticleEnsemble, WEIGHT_SUM_TOL};
pub use initial::{sample_initial, InitialData, InitialKind, InitialSampler, KindParams};
pub use pic::{
    deposit, deposit_with, interpolate_field, interpolate_field_with, interpolate_scalar, potential_gradient,
    stencil, stencil_with, Deposition, Stencil,
};
pub use simulation::{run, step, ForceScheme, RunOutput, SimConfig, Simulation, StageFields};
