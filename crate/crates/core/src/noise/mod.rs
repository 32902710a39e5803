//! Seeded two-sided Wiener paths, the shift θ_s, and the Ornstein-Uhlenbeck
//! process Z_χ solving dZ + (νA + χI) Z dt = dW.

mod ou;
mod path;
mod seed;
mod spectrum;

pub use ou::{
    damping_rates, ou_evolve, ou_expected_energy, ou_shift_covariance_check, ou_stationary_sample, OuScheme, OuState,
    OuTables,
};
pub use path::{grid_index, make_path, shift_path, PathManifest, WienerPath};
pub use seed::{derive_seed, normals_at, rng_at, rng_from, stream_key, stream_of};
pub use spectrum::NoiseSpectrum;
