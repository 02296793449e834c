#![no_std]
//! Numerical core for the Vlasov-Poisson system with massless electrons
//! (VPME) on the periodic torus `T^d`, `d = 1, 2`.

extern crate alloc;

pub mod diagnostics;
pub mod domain;
pub mod error;
pub mod fft;
pub mod field_solver;
pub mod mollifier;
pub mod particles;
pub mod transport_metrics;

pub use error::{Error, Result};
