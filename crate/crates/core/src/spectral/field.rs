use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;
use core::ops::{Add, Mul, Neg, Sub};

use num_complex::Complex64;
use rand_core::RngCore;
use rand_distr::{Distribution, StandardNormal};

use super::basis::{GalerkinBasis, WaveVector, VOLUME};
use super::grid;
use crate::error::{Error, Result};

/// Real divergence-free field stored on the half-space modes of a basis.
///
/// The physical field is `u(x) = Σ_{k,p} √(2/|Ω|) Re(c_{k,p} e^{ik·x}) p`, so
/// the coefficient vector is orthonormal in H: ‖u‖²_H = Σ |c|².
#[derive(Debug, Clone)]
pub struct SpectralField {
    basis: Arc<GalerkinBasis>,
    coeffs: Vec<Complex64>,
}

impl PartialEq for SpectralField {
    fn eq(&self, other: &Self) -> bool {
        same_basis(&self.basis, &other.basis) && self.coeffs == other.coeffs
    }
}

pub(crate) fn same_basis(a: &Arc<GalerkinBasis>, b: &Arc<GalerkinBasis>) -> bool {
    Arc::ptr_eq(a, b) || **a == **b
}

/// Scale between an orthonormal coefficient and the Fourier amplitude û(k).
#[inline]
pub(crate) fn amp_scale() -> f64 {
    1.0 / libm::sqrt(2.0 * VOLUME)
}

impl SpectralField {
    pub fn zeros(basis: &Arc<GalerkinBasis>) -> Self {
        Self { basis: basis.clone(), coeffs: vec![Complex64::new(0.0, 0.0); basis.n_coeffs()] }
    }

    pub fn from_coeffs(basis: &Arc<GalerkinBasis>, coeffs: Vec<Complex64>) -> Result<Self> {
        if coeffs.len() != basis.n_coeffs() {
            return Err(Error::Format(alloc::format!(
                "expected {} coefficients, got {}",
                basis.n_coeffs(),
                coeffs.len()
            )));
        }
        Ok(Self { basis: basis.clone(), coeffs })
    }

    /// Field with a single nonzero coefficient. `k` may lie in either half space.
    pub fn single_mode(basis: &Arc<GalerkinBasis>, k: WaveVector, pol: usize, c: Complex64) -> Result<Self> {
        let mut f = Self::zeros(basis);
        let (idx, c) = f.locate(k, c)?;
        f.coeffs[2 * idx + pol] = c;
        Ok(f)
    }

    /// Leray projection of the single Fourier term `a e^{ik·x} + c.c.` onto the basis.
    pub fn from_fourier_term(basis: &Arc<GalerkinBasis>, k: WaveVector, a: [Complex64; 3]) -> Result<Self> {
        let mut f = Self::zeros(basis);
        let (idx, _) = f.locate(k, Complex64::new(1.0, 0.0))?;
        let flip = !k.in_half_space();
        let s = libm::sqrt(2.0 * VOLUME);
        for p in 0..2 {
            let pv = basis.polarizations()[idx][p];
            let mut dot = Complex64::new(0.0, 0.0);
            for i in 0..3 {
                let ai = if flip { a[i].conj() } else { a[i] };
                dot += ai * pv[i];
            }
            f.coeffs[2 * idx + p] = dot * s;
        }
        Ok(f)
    }

    fn locate(&self, k: WaveVector, c: Complex64) -> Result<(usize, Complex64)> {
        if k.sup_norm() == 0 || k.sup_norm() > self.basis.kmax() {
            return Err(crate::error::invalid("k", alloc::format!("{:?} not in the basis", k.0)));
        }
        if k.in_half_space() {
            Ok((self.basis.mode_index(k).expect("half-space mode"), c))
        } else {
            let m = WaveVector([-k.0[0], -k.0[1], -k.0[2]]);
            Ok((self.basis.mode_index(m).expect("half-space mode"), c.conj()))
        }
    }

    pub fn basis(&self) -> &Arc<GalerkinBasis> {
        &self.basis
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn coeffs_mut(&mut self) -> &mut [Complex64] {
        &mut self.coeffs
    }

    pub fn into_coeffs(self) -> Vec<Complex64> {
        self.coeffs
    }

    pub fn same_basis(&self, other: &Self) -> bool {
        same_basis(&self.basis, &other.basis)
    }

    pub(crate) fn check_basis(&self, other: &Self) -> Result<()> {
        if self.same_basis(other) {
            Ok(())
        } else {
            Err(Error::BasisMismatch)
        }
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|c| c.re == 0.0 && c.im == 0.0)
    }

    /// (u, w)_H as the real coefficient dot product.
    pub fn inner(&self, other: &Self) -> f64 {
        debug_assert!(self.same_basis(other));
        self.coeffs.iter().zip(&other.coeffs).map(|(a, b)| a.re * b.re + a.im * b.im).sum()
    }

    pub fn norm_h_sq(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm_sqr()).sum()
    }

    pub fn norm_h(&self) -> f64 {
        libm::sqrt(self.norm_h_sq())
    }

    /// ‖∇u‖²_{L²} = Σ |k|² |c|².
    pub fn norm_v_sq(&self) -> f64 {
        self.coeffs.iter().enumerate().map(|(j, c)| self.basis.eigenvalue_of_slot(j) * c.norm_sqr()).sum()
    }

    pub fn norm_v(&self) -> f64 {
        libm::sqrt(self.norm_v_sq())
    }

    /// Dual norm ‖u‖²_{V'} = Σ |c|² / |k|².
    pub fn norm_vdual_sq(&self) -> f64 {
        self.coeffs.iter().enumerate().map(|(j, c)| c.norm_sqr() / self.basis.eigenvalue_of_slot(j)).sum()
    }

    /// ⟨Au, w⟩ without forming Au.
    pub fn inner_v(&self, other: &Self) -> f64 {
        self.coeffs
            .iter()
            .zip(&other.coeffs)
            .enumerate()
            .map(|(j, (a, b))| self.basis.eigenvalue_of_slot(j) * (a.re * b.re + a.im * b.im))
            .sum()
    }

    /// Stokes operator: multiply each coefficient by |k|².
    pub fn stokes_apply(&self) -> Self {
        let mut out = self.clone();
        for (j, c) in out.coeffs.iter_mut().enumerate() {
            *c *= self.basis.eigenvalue_of_slot(j);
        }
        out
    }

    pub fn scale(&self, a: f64) -> Self {
        let mut out = self.clone();
        out.scale_mut(a);
        out
    }

    pub fn scale_mut(&mut self, a: f64) {
        self.coeffs.iter_mut().for_each(|c| *c *= a);
    }

    /// self += a · x
    pub fn axpy(&mut self, a: f64, x: &Self) {
        debug_assert!(self.same_basis(x));
        for (s, c) in self.coeffs.iter_mut().zip(&x.coeffs) {
            *s += c * a;
        }
    }

    /// Per-slot multiply by a real weight.
    pub fn mul_diag(&mut self, w: &[f64]) {
        for (c, &wi) in self.coeffs.iter_mut().zip(w) {
            *c *= wi;
        }
    }

    /// Fourier amplitudes of component `comp` (optionally of ∂_deriv) on the half cube.
    pub(crate) fn to_cube(&self, comp: usize, deriv: Option<usize>, cube: &mut [Complex64]) {
        let b = &*self.basis;
        let zero = Complex64::new(0.0, 0.0);
        cube.iter_mut().for_each(|z| *z = zero);
        let s = amp_scale();
        for (m, k) in b.modes().iter().enumerate() {
            let pv = &b.polarizations()[m];
            let mut a = (self.coeffs[2 * m] * pv[0][comp] + self.coeffs[2 * m + 1] * pv[1][comp]) * s;
            if let Some(d) = deriv {
                a = Complex64::new(0.0, k.0[d] as f64) * a;
            }
            cube[b.tables.cube_index[m]] = a;
            let mi = b.tables.mirror_index[m];
            if mi != usize::MAX {
                cube[mi] = a.conj();
            }
        }
    }

    /// Physical-grid values of component `comp` (or its derivative ∂_deriv).
    pub fn grid_component(&self, comp: usize, deriv: Option<usize>) -> Vec<f64> {
        let mut cube = vec![Complex64::new(0.0, 0.0); grid::half_cube_len(&self.basis)];
        let mut out = vec![0.0; grid::grid_len(&self.basis)];
        self.to_cube(comp, deriv, &mut cube);
        grid::synthesize(&self.basis, &cube, &mut out);
        out
    }

    /// Velocity on the physical grid, one array per component.
    pub fn to_grid(&self) -> [Vec<f64>; 3] {
        [self.grid_component(0, None), self.grid_component(1, None), self.grid_component(2, None)]
    }

    /// Leray-Galerkin projection of a vector field given by half-cube amplitudes.
    pub(crate) fn from_cubes(basis: &Arc<GalerkinBasis>, cubes: &[Vec<Complex64>; 3]) -> Self {
        let s = libm::sqrt(2.0 * VOLUME);
        let mut out = Self::zeros(basis);
        for m in 0..basis.n_modes() {
            let ci = basis.tables.cube_index[m];
            for p in 0..2 {
                let pv = basis.polarizations()[m][p];
                let dot = cubes[0][ci] * pv[0] + cubes[1][ci] * pv[1] + cubes[2][ci] * pv[2];
                out.coeffs[2 * m + p] = dot * s;
            }
        }
        out
    }

    /// Galerkin projection of a vector field sampled on the physical grid.
    pub fn from_grid(basis: &Arc<GalerkinBasis>, g: &[Vec<f64>; 3]) -> Self {
        let n = grid::half_cube_len(basis);
        let mut cubes = [vec![Complex64::new(0.0, 0.0); n], vec![Complex64::new(0.0, 0.0); n], vec![Complex64::new(0.0, 0.0); n]];
        for i in 0..3 {
            grid::analyze(basis, &g[i], &mut cubes[i]);
        }
        Self::from_cubes(basis, &cubes)
    }

    /// Point evaluation by direct summation over modes.
    pub fn eval_at(&self, x: [f64; 3]) -> [f64; 3] {
        let b = &*self.basis;
        let s = libm::sqrt(2.0 / VOLUME);
        let mut u = [0.0; 3];
        for (m, k) in b.modes().iter().enumerate() {
            let ph = k.dot_f(&x);
            let (sn, cs) = (libm::sin(ph), libm::cos(ph));
            for p in 0..2 {
                let c = self.coeffs[2 * m + p];
                let r = (c.re * cs - c.im * sn) * s;
                for i in 0..3 {
                    u[i] += r * b.polarizations()[m][p][i];
                }
            }
        }
        u
    }

    /// Random field with i.i.d. complex Gaussian coefficients of amplitude |k|^{-decay},
    /// normalized to unit H norm.
    pub fn random<R: RngCore + ?Sized>(basis: &Arc<GalerkinBasis>, decay: f64, rng: &mut R) -> Self {
        let mut f = Self::zeros(basis);
        for j in 0..f.coeffs.len() {
            let a = libm::pow(basis.eigenvalue_of_slot(j), -0.5 * decay);
            let re: f64 = StandardNormal.sample(rng);
            let im: f64 = StandardNormal.sample(rng);
            f.coeffs[j] = Complex64::new(re, im) * a;
        }
        let n = f.norm_h();
        if n > 0.0 {
            f.scale_mut(1.0 / n);
        }
        f
    }
}

impl Add<&SpectralField> for &SpectralField {
    type Output = SpectralField;
    fn add(self, rhs: &SpectralField) -> SpectralField {
        let mut out = self.clone();
        out.axpy(1.0, rhs);
        out
    }
}

impl Sub<&SpectralField> for &SpectralField {
    type Output = SpectralField;
    fn sub(self, rhs: &SpectralField) -> SpectralField {
        let mut out = self.clone();
        out.axpy(-1.0, rhs);
        out
    }
}

impl Mul<&SpectralField> for f64 {
    type Output = SpectralField;
    fn mul(self, rhs: &SpectralField) -> SpectralField {
        rhs.scale(self)
    }
}

impl Neg for &SpectralField {
    type Output = SpectralField;
    fn neg(self) -> SpectralField {
        self.scale(-1.0)
    }
}

/// Free-function form of [`SpectralField::stokes_apply`].
pub fn stokes_apply(u: &SpectralField) -> SpectralField {
    u.stokes_apply()
}

pub fn norm_h(u: &SpectralField) -> f64 {
    u.norm_h()
}

pub fn norm_v(u: &SpectralField) -> f64 {
    u.norm_v()
}

#[derive(serde::Serialize, serde::Deserialize)]
struct FieldRecord {
    kmax: u32,
    coeffs: Vec<[f64; 2]>,
}

impl serde::Serialize for SpectralField {
    fn serialize<S: serde::Serializer>(&self, s: S) -> core::result::Result<S::Ok, S::Error> {
        FieldRecord { kmax: self.basis.kmax(), coeffs: self.coeffs.iter().map(|c| [c.re, c.im]).collect() }
            .serialize(s)
    }
}

impl<'de> serde::Deserialize<'de> for SpectralField {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> core::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        let r = FieldRecord::deserialize(d)?;
        let basis = Arc::new(GalerkinBasis::new(r.kmax).map_err(D::Error::custom)?);
        let coeffs = r.coeffs.iter().map(|c| Complex64::new(c[0], c[1])).collect();
        SpectralField::from_coeffs(&basis, coeffs).map_err(D::Error::custom)
    }
}

impl SpectralField {
    /// Same coefficients re-homed on `basis` (which must have the same kmax).
    pub fn rebase(&self, basis: &Arc<GalerkinBasis>) -> Result<Self> {
        if basis.kmax() != self.basis.kmax() {
            return Err(Error::BasisMismatch);
        }
        Ok(Self { basis: basis.clone(), coeffs: self.coeffs.clone() })
    }
}
