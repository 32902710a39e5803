use alloc::sync::Arc;
use alloc::vec::Vec;

use num_complex::Complex64;
use rand_core::RngCore;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use super::path::{grid_index, shift_path, WienerPath};
use super::seed::{normals_at, stream_key};
use super::spectrum::NoiseSpectrum;
use crate::error::{invalid, Error, Result};
use crate::spectral::{GalerkinBasis, SpectralField};

/// One-interval transition used for the OU coordinates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OuScheme {
    /// Z ← e^{-μh} Z + σ √((1 − e^{-2μh}) / 2μ) ξ, the exact transition law.
    ExactLaw,
    /// Z ← e^{-μτ} Z + σ (1 − e^{-μτ}) / μ · ξ / √h: the exact solution of the
    /// OU equation driven by the linear interpolant of the Wiener path. Steps
    /// of length τ = h / sub are allowed, and the result is smooth inside each
    /// path interval.
    PiecewiseLinear,
}

/// Per-slot constants of a transition of length `tau`.
#[derive(Debug, Clone, PartialEq)]
pub struct OuTables {
    pub decay: Vec<f64>,
    pub gain: Vec<f64>,
    pub stationary_sd: Vec<f64>,
}

/// μ = ν|k|² + χ per coefficient slot.
pub fn damping_rates(basis: &GalerkinBasis, chi: f64, nu: f64) -> Vec<f64> {
    (0..basis.n_coeffs()).map(|j| nu * basis.eigenvalue_of_slot(j) + chi).collect()
}

impl OuTables {
    pub fn new(
        basis: &GalerkinBasis,
        spectrum: &NoiseSpectrum,
        chi: f64,
        nu: f64,
        h: f64,
        sub: u32,
        scheme: OuScheme,
    ) -> Self {
        let tau = h / sub as f64;
        let n = basis.n_coeffs();
        let mut decay = Vec::with_capacity(n);
        let mut gain = Vec::with_capacity(n);
        let mut stationary_sd = Vec::with_capacity(n);
        for j in 0..n {
            let mu = nu * basis.eigenvalue_of_slot(j) + chi;
            let sigma = spectrum.sigma(basis.eigenvalue_of_slot(j));
            decay.push(libm::exp(-mu * tau));
            match scheme {
                OuScheme::ExactLaw => {
                    gain.push(sigma * libm::sqrt(-libm::expm1(-2.0 * mu * h) / (2.0 * mu)));
                    stationary_sd.push(sigma / libm::sqrt(2.0 * mu));
                }
                OuScheme::PiecewiseLinear => {
                    gain.push(sigma * -libm::expm1(-mu * tau) / (mu * libm::sqrt(h)));
                    stationary_sd.push(sigma * libm::sqrt(libm::tanh(0.5 * mu * h) / (mu * mu * h)));
                }
            }
        }
        Self { decay, gain, stationary_sd }
    }
}

/// Ornstein-Uhlenbeck coordinates Z_χ driven by a Wiener path.
///
/// Time is kept as an integer tick count; a tick is `h / sub` where `h` is
/// the path resolution.
#[derive(Debug, Clone)]
pub struct OuState {
    tick: i64,
    sub: u32,
    dt_path: f64,
    pub z: SpectralField,
    pub chi: f64,
    pub nu: f64,
    scheme: OuScheme,
    tables: Arc<OuTables>,
    cache: Option<(i64, Vec<f64>)>,
}

impl OuState {
    /// State with explicit initial value `z` at path time `time`.
    pub fn new(
        z: SpectralField,
        time: f64,
        path: &WienerPath,
        chi: f64,
        nu: f64,
        scheme: OuScheme,
        sub: u32,
    ) -> Result<Self> {
        if !(chi >= 0.0 && chi.is_finite()) {
            return Err(invalid("chi", "must be finite and nonnegative"));
        }
        if !(nu > 0.0 && nu.is_finite()) {
            return Err(invalid("nu", "must be positive and finite"));
        }
        if sub == 0 {
            return Err(invalid("sub", "substeps per path interval must be at least 1"));
        }
        if sub > 1 && scheme == OuScheme::ExactLaw {
            return Err(invalid("sub", "the exact-law transition cannot be refined inside a path interval"));
        }
        if z.basis().kmax() != path.kmax() {
            return Err(Error::BasisMismatch);
        }
        let tick = grid_index(time, path.dt_path() / sub as f64)?;
        let tables = OuTables::new(z.basis(), path.spectrum(), chi, nu, path.dt_path(), sub, scheme);
        Ok(Self { tick, sub, dt_path: path.dt_path(), z, chi, nu, scheme, tables: Arc::new(tables), cache: None })
    }

    /// Stationary start at path interval `start`, with draws keyed by the
    /// absolute index of that interval, so every view of the same path that
    /// starts at the same absolute time gets the same initial value.
    pub fn stationary(
        basis: &Arc<GalerkinBasis>,
        path: &WienerPath,
        chi: f64,
        nu: f64,
        scheme: OuScheme,
        sub: u32,
        start: i64,
    ) -> Result<Self> {
        let mut st = Self::new(SpectralField::zeros(basis), start as f64 * path.dt_path(), path, chi, nu, scheme, sub)?;
        let key = stream_key(path.seed(), "ou-init");
        let xi = normals_at(&key, path.absolute_index(start), path.n_dofs());
        let sd = &st.tables.stationary_sd;
        for (j, c) in st.z.coeffs_mut().iter_mut().enumerate() {
            *c = Complex64::new(sd[j] * xi[2 * j], sd[j] * xi[2 * j + 1]);
        }
        Ok(st)
    }

    pub fn time(&self) -> f64 {
        self.tick as f64 * self.dt_path / self.sub as f64
    }

    pub fn tick(&self) -> i64 {
        self.tick
    }

    pub fn ticks_per_interval(&self) -> u32 {
        self.sub
    }

    pub fn scheme(&self) -> OuScheme {
        self.scheme
    }

    pub fn tables(&self) -> &OuTables {
        &self.tables
    }

    /// Advance by `ticks` transitions.
    pub fn advance(&mut self, path: &WienerPath, ticks: u64) -> Result<()> {
        let sub = self.sub as i64;
        for _ in 0..ticks {
            let n = self.tick.div_euclid(sub);
            if self.cache.as_ref().map(|c| c.0) != Some(n) {
                self.cache = Some((n, path.normals(n)?));
            }
            let xi = &self.cache.as_ref().unwrap().1;
            let t = &*self.tables;
            for (j, c) in self.z.coeffs_mut().iter_mut().enumerate() {
                let (d, g) = (t.decay[j], t.gain[j]);
                *c = Complex64::new(d * c.re + g * xi[2 * j], d * c.im + g * xi[2 * j + 1]);
            }
            self.tick += 1;
        }
        Ok(())
    }

    /// Drop the cached draws (they are re-derived on demand).
    pub fn clear_cache(&mut self) {
        self.cache = None;
    }
}

/// Evolve `state` to `t_target` on its tick grid.
pub fn ou_evolve(state: &OuState, path: &WienerPath, t_target: f64) -> Result<OuState> {
    let target = grid_index(t_target, state.dt_path / state.sub as f64)?;
    if target < state.tick {
        return Err(invalid("t_target", "must not precede the state time"));
    }
    let mut out = state.clone();
    out.advance(path, (target - state.tick) as u64)?;
    Ok(out)
}

/// Independent stationary draw with per-real-coordinate variance σ²/(2μ).
pub fn ou_stationary_sample<R: RngCore + ?Sized>(
    spectrum: &NoiseSpectrum,
    chi: f64,
    nu: f64,
    basis: &Arc<GalerkinBasis>,
    rng: &mut R,
) -> SpectralField {
    let mut z = SpectralField::zeros(basis);
    for (j, c) in z.coeffs_mut().iter_mut().enumerate() {
        let lam = basis.eigenvalue_of_slot(j);
        let sd = spectrum.sigma(lam) / libm::sqrt(2.0 * (nu * lam + chi));
        let a: f64 = StandardNormal.sample(rng);
        let b: f64 = StandardNormal.sample(rng);
        *c = Complex64::new(sd * a, sd * b);
    }
    z
}

/// E‖Z_χ‖²_H = Σ σ²/(2μ) over all real coordinates (two per coefficient slot).
pub fn ou_expected_energy(spectrum: &NoiseSpectrum, chi: f64, nu: f64, basis: &GalerkinBasis) -> f64 {
    (0..basis.n_coeffs())
        .map(|j| {
            let lam = basis.eigenvalue_of_slot(j);
            let s = spectrum.sigma(lam);
            s * s / (nu * lam + chi)
        })
        .sum()
}

/// Z(θ_s ω)(t) and Z(ω)(t + s), both started stationary at absolute time s.
pub fn ou_shift_covariance_check(
    path: &WienerPath,
    basis: &Arc<GalerkinBasis>,
    s: f64,
    t: f64,
    chi: f64,
    nu: f64,
    scheme: OuScheme,
) -> Result<(SpectralField, SpectralField)> {
    let h = path.dt_path();
    let ms = grid_index(s, h)?;
    grid_index(t, h)?;
    let shifted = shift_path(path, s)?;
    let lhs = OuState::stationary(basis, &shifted, chi, nu, scheme, 1, 0)?;
    let lhs = ou_evolve(&lhs, &shifted, t)?;
    let rhs = OuState::stationary(basis, path, chi, nu, scheme, 1, ms)?;
    let rhs = ou_evolve(&rhs, path, t + s)?;
    Ok((lhs.z, rhs.z))
}
