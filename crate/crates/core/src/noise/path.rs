use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use super::seed::{normals_at, stream_key};
use super::spectrum::NoiseSpectrum;
use crate::error::{invalid, Error, Result};
use crate::spectral::GalerkinBasis;

/// Everything needed to regenerate a path exactly.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PathManifest {
    pub seed: u64,
    pub dt_path: f64,
    pub t_min: f64,
    pub t_max: f64,
    pub offset: i64,
    pub spectrum: NoiseSpectrum,
    pub kmax: u32,
}

/// Two-sided discrete Wiener path with one standard Gaussian per real degree
/// of freedom and path interval.
///
/// Interval `n` covers `[n h, (n+1) h)` in the path's own time. The draws for
/// interval `n` come from the counter-keyed stream `n + offset`, so a shifted
/// view reads the same table at displaced indices. Real degree of freedom
/// `2 j` is the real part and `2 j + 1` the imaginary part of coefficient slot `j`.
#[derive(Debug, Clone, PartialEq)]
pub struct WienerPath {
    seed: u64,
    dt_path: f64,
    n_min: i64,
    n_max: i64,
    offset: i64,
    n_dofs: usize,
    kmax: u32,
    spectrum: NoiseSpectrum,
    key: [u8; 32],
}

/// Snap `t / h` to an integer or reject it.
pub fn grid_index(t: f64, h: f64) -> Result<i64> {
    let x = t / h;
    let r = libm::round(x);
    if !x.is_finite() || (x - r).abs() > 1e-9 * r.abs().max(1.0) {
        return Err(Error::OffGrid { t, spacing: h });
    }
    Ok(r as i64)
}

/// Seeded path covering at least `[t_min, t_max]`.
pub fn make_path(
    seed: u64,
    dt_path: f64,
    t_min: f64,
    t_max: f64,
    spectrum: NoiseSpectrum,
    basis: &GalerkinBasis,
) -> Result<WienerPath> {
    if !(t_min.is_finite() && t_max.is_finite()) {
        return Err(invalid("t_min/t_max", "path bounds must be finite"));
    }
    if !(t_min < t_max) {
        return Err(invalid("t_min/t_max", alloc::format!("need t_min < t_max, got [{t_min}, {t_max}]")));
    }
    if !(dt_path > 0.0 && dt_path.is_finite()) {
        return Err(invalid("dt_path", "must be positive and finite"));
    }
    spectrum.validate()?;
    let n_min = libm::floor(t_min / dt_path + 1e-9) as i64;
    let n_max = libm::ceil(t_max / dt_path - 1e-9) as i64 - 1;
    Ok(WienerPath {
        seed,
        dt_path,
        n_min,
        n_max: n_max.max(n_min),
        offset: 0,
        n_dofs: 2 * basis.n_coeffs(),
        kmax: basis.kmax(),
        spectrum,
        key: stream_key(seed, "wiener"),
    })
}

/// View of the same increments displaced by `shift_s`, i.e. θ_s ω.
pub fn shift_path(path: &WienerPath, shift_s: f64) -> Result<WienerPath> {
    let m = grid_index(shift_s, path.dt_path)?;
    let mut out = path.clone();
    out.offset += m;
    out.n_min -= m;
    out.n_max -= m;
    Ok(out)
}

impl WienerPath {
    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn dt_path(&self) -> f64 {
        self.dt_path
    }

    pub fn spectrum(&self) -> &NoiseSpectrum {
        &self.spectrum
    }

    pub fn kmax(&self) -> u32 {
        self.kmax
    }

    pub fn n_dofs(&self) -> usize {
        self.n_dofs
    }

    /// Absolute displacement of this view.
    pub fn offset(&self) -> i64 {
        self.offset
    }

    /// Inclusive interval-index window of this view.
    pub fn window(&self) -> (i64, i64) {
        (self.n_min, self.n_max)
    }

    /// Covered time span `[n_min h, (n_max + 1) h]`.
    pub fn time_span(&self) -> (f64, f64) {
        (self.n_min as f64 * self.dt_path, (self.n_max + 1) as f64 * self.dt_path)
    }

    /// Absolute stream index of view interval `n`.
    pub fn absolute_index(&self, n: i64) -> i64 {
        n + self.offset
    }

    fn check(&self, n: i64) -> Result<()> {
        if n < self.n_min || n > self.n_max {
            Err(Error::PathWindow { index: n, lo: self.n_min, hi: self.n_max })
        } else {
            Ok(())
        }
    }

    /// Standard normals ξ for interval `n`, one per real degree of freedom.
    pub fn normals(&self, n: i64) -> Result<Vec<f64>> {
        self.check(n)?;
        Ok(normals_at(&self.key, n + self.offset, self.n_dofs))
    }

    /// Brownian increments √h ξ for interval `n` (unit spectral amplitude).
    pub fn increments(&self, n: i64) -> Result<Vec<f64>> {
        let s = libm::sqrt(self.dt_path);
        Ok(self.normals(n)?.into_iter().map(|x| x * s).collect())
    }

    pub fn manifest(&self) -> PathManifest {
        let (t_min, t_max) = self.time_span();
        PathManifest {
            seed: self.seed,
            dt_path: self.dt_path,
            t_min,
            t_max,
            offset: self.offset,
            spectrum: self.spectrum,
            kmax: self.kmax,
        }
    }

    /// Rebuild a path (including its shift) from a manifest.
    pub fn from_manifest(m: &PathManifest, basis: &GalerkinBasis) -> Result<Self> {
        if m.kmax != basis.kmax() {
            return Err(Error::BasisMismatch);
        }
        let base = make_path(
            m.seed,
            m.dt_path,
            m.t_min + m.offset as f64 * m.dt_path,
            m.t_max + m.offset as f64 * m.dt_path,
            m.spectrum,
            basis,
        )?;
        let mut p = base;
        p.offset = m.offset;
        p.n_min -= m.offset;
        p.n_max -= m.offset;
        Ok(p)
    }
}
