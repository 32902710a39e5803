//! Divergence-free Fourier Galerkin discretization of the periodic box.

mod basis;
mod codec;
mod field;
mod grid;
mod nonlinear;

pub use basis::{build_basis, polarizations, GalerkinBasis, WaveVector, MAX_KMAX, VOLUME};
pub use codec::{decode_field, encode_field, peek_kmax, FIELD_FORMAT_VERSION};
pub use field::{norm_h, norm_v, stokes_apply, SpectralField};
pub use nonlinear::{ladyzhenskaya_ratio, nonlinear_b, nonlinear_self, norm_l4, trilinear_b};
