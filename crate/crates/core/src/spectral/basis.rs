use alloc::vec::Vec;
use core::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest supported truncation radius.
pub const MAX_KMAX: u32 = 8;

/// Volume of the box [0, 2π)³.
pub const VOLUME: f64 = 8.0 * PI * PI * PI;

/// Integer wavevector, never zero.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct WaveVector(pub [i32; 3]);

impl WaveVector {
    pub fn norm_sq(&self) -> i64 {
        self.0.iter().map(|&c| (c as i64) * (c as i64)).sum()
    }

    pub fn norm(&self) -> f64 {
        libm::sqrt(self.norm_sq() as f64)
    }

    pub fn sup_norm(&self) -> u32 {
        self.0.iter().map(|c| c.unsigned_abs()).max().unwrap_or(0)
    }

    /// First nonzero component positive: one representative of each ±k pair.
    pub fn in_half_space(&self) -> bool {
        let [a, b, c] = self.0;
        a > 0 || (a == 0 && (b > 0 || (b == 0 && c > 0)))
    }

    pub fn dot_f(&self, p: &[f64; 3]) -> f64 {
        self.0[0] as f64 * p[0] + self.0[1] as f64 * p[1] + self.0[2] as f64 * p[2]
    }
}

fn cross(a: [i64; 3], b: [i64; 3]) -> [i64; 3] {
    [a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]]
}

fn normalize(a: [i64; 3]) -> [f64; 3] {
    let n = libm::sqrt((a[0] * a[0] + a[1] * a[1] + a[2] * a[2]) as f64);
    [a[0] as f64 / n, a[1] as f64 / n, a[2] as f64 / n]
}

/// Two orthonormal real vectors spanning the plane orthogonal to `k`.
///
/// Built from integer cross products with the coordinate axis of smallest
/// |k_i|, so `p·k = 0` holds before normalization.
pub fn polarizations(k: WaveVector) -> [[f64; 3]; 2] {
    let ki = [k.0[0] as i64, k.0[1] as i64, k.0[2] as i64];
    let mut axis = 0;
    for i in 1..3 {
        if ki[i].abs() < ki[axis].abs() {
            axis = i;
        }
    }
    let mut e = [0i64; 3];
    e[axis] = 1;
    let a = cross(ki, e);
    let b = cross(ki, a);
    [normalize(a), normalize(b)]
}

/// Precomputed twiddles for the pruned grid transforms.
#[derive(Debug, Clone)]
pub(crate) struct GridTables {
    /// `exp_pos[(k + kmax) * m + j] = e^{+i k x_j}` with x_j = 2πj/m.
    pub exp_pos: Vec<Complex64>,
    /// Conjugate of `exp_pos`.
    pub exp_neg: Vec<Complex64>,
    /// Index into the half cube `k1 ∈ [0, kmax]`, `k2, k3 ∈ [-kmax, kmax]` per mode.
    pub cube_index: Vec<usize>,
    /// Cube index of `-k` for modes in the `k1 = 0` plane, else `usize::MAX`.
    pub mirror_index: Vec<usize>,
}

/// Truncated divergence-free Fourier basis on the periodic box.
///
/// Modes are the half-space representatives of `0 < |k|_∞ ≤ kmax`, in
/// lexicographic order; each carries two polarizations. Coefficient storage
/// for a field is `coeffs[2 * mode + pol]`.
#[derive(Debug, Clone)]
pub struct GalerkinBasis {
    kmax: u32,
    modes: Vec<WaveVector>,
    polarizations: Vec<[[f64; 3]; 2]>,
    eigenvalues: Vec<u32>,
    grid_size: usize,
    pub(crate) tables: GridTables,
}

impl PartialEq for GalerkinBasis {
    fn eq(&self, other: &Self) -> bool {
        self.kmax == other.kmax && self.grid_size == other.grid_size
    }
}

/// Build the basis for `1 ≤ kmax ≤ MAX_KMAX` with the minimal exact grid `4·kmax + 1`.
pub fn build_basis(kmax: u32) -> Result<GalerkinBasis> {
    GalerkinBasis::new(kmax)
}

impl GalerkinBasis {
    pub fn new(kmax: u32) -> Result<Self> {
        if kmax == 0 || kmax > MAX_KMAX {
            return Err(Error::InvalidKmax(kmax));
        }
        let r = kmax as i32;
        let mut modes = Vec::new();
        for a in -r..=r {
            for b in -r..=r {
                for c in -r..=r {
                    let k = WaveVector([a, b, c]);
                    if k.in_half_space() {
                        modes.push(k);
                    }
                }
            }
        }
        let polarizations = modes.iter().map(|&k| polarizations(k)).collect();
        let eigenvalues = modes.iter().map(|k| k.norm_sq() as u32).collect();
        let grid_size = 4 * kmax as usize + 1;
        let tables = GridTables::new(kmax as usize, grid_size, &modes);
        Ok(Self { kmax, modes, polarizations, eigenvalues, grid_size, tables })
    }

    pub fn kmax(&self) -> u32 {
        self.kmax
    }

    /// Half-space modes in storage order.
    pub fn modes(&self) -> &[WaveVector] {
        &self.modes
    }

    pub fn polarizations(&self) -> &[[[f64; 3]; 2]] {
        &self.polarizations
    }

    /// Stokes eigenvalue |k|² per half-space mode.
    pub fn eigenvalues(&self) -> &[u32] {
        &self.eigenvalues
    }

    /// Number of stored half-space modes.
    pub fn n_modes(&self) -> usize {
        self.modes.len()
    }

    /// Number of complex coefficients (mode, polarization).
    pub fn n_coeffs(&self) -> usize {
        2 * self.modes.len()
    }

    /// Number of nonzero wavevectors in the full cube, before the ±k reduction.
    pub fn wavevector_count(&self) -> usize {
        2 * self.modes.len()
    }

    /// Points per dimension of the physical grid.
    pub fn grid_size(&self) -> usize {
        self.grid_size
    }

    /// Smallest Stokes eigenvalue, the Poincaré constant of the basis.
    pub fn lambda_min(&self) -> f64 {
        self.eigenvalues.iter().copied().min().unwrap_or(1) as f64
    }

    /// Eigenvalue for coefficient slot `j = 2 * mode + pol`.
    #[inline]
    pub fn eigenvalue_of_slot(&self, j: usize) -> f64 {
        self.eigenvalues[j / 2] as f64
    }

    /// Storage index of mode `k` if it is a half-space mode of this basis.
    pub fn mode_index(&self, k: WaveVector) -> Option<usize> {
        self.modes.binary_search(&k).ok()
    }
}

impl GridTables {
    fn new(kmax: usize, m: usize, modes: &[WaveVector]) -> Self {
        let l = 2 * kmax + 1;
        let mut exp_pos = Vec::with_capacity(l * m);
        for k in -(kmax as i64)..=(kmax as i64) {
            for j in 0..m {
                // Reduce k·j mod m before scaling so every table entry is a root of unity to rounding.
                let r = (k * j as i64).rem_euclid(m as i64) as f64;
                let th = 2.0 * PI * r / m as f64;
                exp_pos.push(Complex64::new(libm::cos(th), libm::sin(th)));
            }
        }
        let exp_neg = exp_pos.iter().map(|z| z.conj()).collect();
        let idx = |a: i32, b: i32, c: i32| -> usize {
            let (a, b, c) = (a as usize, (b + kmax as i32) as usize, (c + kmax as i32) as usize);
            (a * l + b) * l + c
        };
        let cube_index = modes.iter().map(|k| idx(k.0[0], k.0[1], k.0[2])).collect();
        let mirror_index = modes
            .iter()
            .map(|k| if k.0[0] == 0 { idx(0, -k.0[1], -k.0[2]) } else { usize::MAX })
            .collect();
        Self { exp_pos, exp_neg, cube_index, mirror_index }
    }
}
