//! Periodic torus geometry, grid-sampled fields and spectral operators.
//!
//! The torus is the unit cube `[-1/2, 1/2)^d` with periodic identification,
//! so its total volume is exactly one and a unit-mass density has mean one.

mod field;
mod grid;
mod kernel;
mod spectral;

pub use field::{ScalarField, VectorField};
pub use grid::{torus_distance, wrap_coordinate, TorusGrid, MAX_DIM};
pub use kernel::{coulomb_kernel, green_function, CoulombKernelView};
pub use spectral::{divergence, gradient, laplacian, Spectral};
