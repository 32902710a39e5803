use alloc::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::noise::{grid_index, NoiseSpectrum, OuScheme};
use crate::spectral::{GalerkinBasis, SpectralField};

/// Every scalar and field entering the transformed system
/// dv/dt = −νAv − B_N(v + Z) + χZ + f.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimParams {
    pub nu: f64,
    /// Cutoff level N; `None` means no cutoff (F ≡ 1, plain Navier-Stokes).
    pub n_cutoff: Option<f64>,
    pub chi: f64,
    pub lambda_p: f64,
    pub forcing: SpectralField,
    pub dt: f64,
    pub t_end: f64,
    pub kmax: u32,
    pub noise: NoiseSpectrum,
    /// Wiener path resolution; `dt` must be an integer multiple or divisor of it.
    pub dt_path: f64,
    pub ou_scheme: OuScheme,
    /// Abort when ‖v‖_H exceeds this factor times max(‖v₀‖_H, 1).
    pub ceiling_factor: f64,
}

/// How solver steps sit on the path grid.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TimeGrid {
    /// OU ticks per path interval (> 1 only when dt < dt_path).
    pub sub: u32,
    /// OU ticks per solver step.
    pub ticks_per_step: u32,
}

impl SimParams {
    /// Deterministic defaults on `basis`: ν = 1, N = 1, χ = 0, dt = 1/256, T = 8, s = 1, no forcing.
    pub fn defaults(basis: &Arc<GalerkinBasis>) -> Self {
        Self {
            nu: 1.0,
            n_cutoff: Some(1.0),
            chi: 0.0,
            lambda_p: basis.lambda_min(),
            forcing: SpectralField::zeros(basis),
            dt: 1.0 / 256.0,
            t_end: 8.0,
            kmax: basis.kmax(),
            noise: NoiseSpectrum::default(),
            dt_path: 1.0 / 256.0,
            ou_scheme: OuScheme::PiecewiseLinear,
            ceiling_factor: 1e6,
        }
    }

    /// Cutoff level, `+∞` when disabled.
    pub fn n(&self) -> f64 {
        self.n_cutoff.unwrap_or(f64::INFINITY)
    }

    pub fn basis(&self) -> &Arc<GalerkinBasis> {
        self.forcing.basis()
    }

    pub fn steps(&self) -> Result<u64> {
        let n = grid_index(self.t_end, self.dt)?;
        if n < 0 {
            return Err(invalid("T", "horizon must be nonnegative"));
        }
        Ok(n as u64)
    }

    pub fn time_grid(&self) -> Result<TimeGrid> {
        let r = self.dt / self.dt_path;
        let near = |x: f64| (x - libm::round(x)).abs() <= 1e-9 * x.max(1.0) && libm::round(x) >= 1.0;
        if near(r) {
            Ok(TimeGrid { sub: 1, ticks_per_step: libm::round(r) as u32 })
        } else if near(1.0 / r) {
            Ok(TimeGrid { sub: libm::round(1.0 / r) as u32, ticks_per_step: 1 })
        } else {
            Err(invalid(
                "dt",
                alloc::format!("dt = {} and dt_path = {} are not integer multiples of one another", self.dt, self.dt_path),
            ))
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.nu > 0.0 && self.nu.is_finite()) {
            return Err(invalid("nu", "must be positive and finite"));
        }
        if let Some(n) = self.n_cutoff {
            if !(n > 0.0) {
                return Err(invalid("N", "cutoff level must be positive"));
            }
        }
        if !(self.chi >= 0.0 && self.chi.is_finite()) {
            return Err(invalid("chi", "must be finite and nonnegative"));
        }
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(invalid("dt", "must be positive and finite"));
        }
        if !(self.t_end >= self.dt) {
            return Err(invalid("T", "horizon must be at least one step"));
        }
        self.steps()?;
        if !(self.dt_path > 0.0 && self.dt_path.is_finite()) {
            return Err(invalid("dt_path", "must be positive and finite"));
        }
        let grid = self.time_grid()?;
        if grid.sub > 1 && self.ou_scheme == OuScheme::ExactLaw {
            return Err(invalid("ou_scheme", "exact-law transitions need dt to be a multiple of dt_path"));
        }
        if self.forcing.basis().kmax() != self.kmax {
            return Err(Error::BasisMismatch);
        }
        if self.lambda_p != self.basis().lambda_min() {
            return Err(invalid("lambda_p", "must equal the smallest Stokes eigenvalue of the basis"));
        }
        if !(self.ceiling_factor > 1.0) {
            return Err(invalid("ceiling_factor", "must exceed 1"));
        }
        self.noise.validate()
    }

    /// νλ − 7⁷N⁸ / (2¹²ν⁷), the mean-square contraction rate.
    pub fn contraction_rate(&self) -> f64 {
        contraction_rate(self.nu, self.n(), self.lambda_p)
    }
}

/// νλ − 7⁷N⁸ / (2¹²ν⁷).
pub fn contraction_rate(nu: f64, n: f64, lambda: f64) -> f64 {
    nu * lambda - 823_543.0 * libm::pow(n, 8.0) / (4096.0 * libm::pow(nu, 7.0))
}
