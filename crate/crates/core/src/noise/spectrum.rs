use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};

/// Noise amplitudes σ_k = a |k|^{-2s} on every (mode, polarization).
///
/// `delta` is the time-regularity exponent of the driving process. It has no
/// computational role at finite truncation and is only validated against
/// δ < 1/2 < s.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoiseSpectrum {
    pub s: f64,
    pub amplitude: f64,
    pub delta: f64,
    pub allow_low_regularity: bool,
}

impl Default for NoiseSpectrum {
    fn default() -> Self {
        Self { s: 1.0, amplitude: 1.0, delta: 0.25, allow_low_regularity: false }
    }
}

impl NoiseSpectrum {
    pub fn new(s: f64, amplitude: f64) -> Result<Self> {
        let sp = Self { s, amplitude, ..Self::default() };
        sp.validate()?;
        Ok(sp)
    }

    /// No noise at all.
    pub fn off() -> Self {
        Self { amplitude: 0.0, ..Self::default() }
    }

    pub fn validate(&self) -> Result<()> {
        if !self.s.is_finite() {
            return Err(invalid("s", "must be finite"));
        }
        if !(self.s > 0.75) && !self.allow_low_regularity {
            return Err(invalid(
                "s",
                alloc::format!("s = {} violates s > 3/4 (trace-class embedding); set allow_low_regularity to override", self.s),
            ));
        }
        if !(self.amplitude >= 0.0 && self.amplitude.is_finite()) {
            return Err(invalid("amplitude", "must be finite and nonnegative"));
        }
        if !(self.delta > 0.0 && self.delta < 0.5) {
            return Err(invalid("delta", alloc::format!("delta = {} must lie in (0, 1/2)", self.delta)));
        }
        if !self.allow_low_regularity && !(self.delta < self.s) {
            return Err(invalid("delta", "delta < 1/2 < s required"));
        }
        Ok(())
    }

    pub fn is_off(&self) -> bool {
        self.amplitude == 0.0
    }

    /// σ for a mode with Stokes eigenvalue |k|².
    pub fn sigma(&self, k_sq: f64) -> f64 {
        if self.amplitude == 0.0 {
            0.0
        } else {
            self.amplitude * libm::pow(k_sq, -self.s)
        }
    }
}
