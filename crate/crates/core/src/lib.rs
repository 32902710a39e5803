//! Spectral Galerkin solver for the globally modified Navier-Stokes equations
//! on the 2π-periodic box, with an L⁴-norm cutoff and additive
//! Ornstein-Uhlenbeck noise.
//!
//! The crate is `no_std` (with `alloc`). File formats, configuration and the
//! command-line runner live in the companion `gmns` crate.
#![cfg_attr(not(feature = "std"), no_std)]

extern crate alloc;

pub mod error;
pub mod experiments;
pub mod integrator;
pub mod noise;
pub mod operators;
pub mod spectral;

pub use error::{Error, Result};
pub use spectral::{GalerkinBasis, SpectralField, WaveVector};
