//! Pruned separable DFTs between the half cube of wavevectors and the
//! physical grid.
//!
//! A half cube holds `k1 ∈ [0, kmax]` and `k2, k3 ∈ [-kmax, kmax]`; the
//! `k1 = 0` plane must be Hermitian-complete. Grid arrays are real and
//! indexed `(j1 * m + j2) * m + j3`. Sizes here are small and odd, so a
//! direct transform restricted to the retained wavenumbers is used.

use alloc::vec;

use num_complex::Complex64;

use super::basis::GalerkinBasis;

pub(crate) fn half_cube_len(b: &GalerkinBasis) -> usize {
    let k = b.kmax() as usize;
    let l = 2 * k + 1;
    (k + 1) * l * l
}

pub(crate) fn grid_len(b: &GalerkinBasis) -> usize {
    let m = b.grid_size();
    m * m * m
}

/// g(x_j) = Σ_k ĝ(k) e^{ik·x_j} for a real field given by its half cube.
pub(crate) fn synthesize(b: &GalerkinBasis, cube: &[Complex64], out: &mut [f64]) {
    let k = b.kmax() as usize;
    let l = 2 * k + 1;
    let m = b.grid_size();
    let e = &b.tables.exp_pos;
    let zero = Complex64::new(0.0, 0.0);

    // Along k3.
    let mut s1 = vec![zero; (k + 1) * l * m];
    for a in 0..=k {
        for bb in 0..l {
            let row = &mut s1[(a * l + bb) * m..(a * l + bb + 1) * m];
            for c in 0..l {
                let z = cube[(a * l + bb) * l + c];
                if z == zero {
                    continue;
                }
                let tw = &e[c * m..(c + 1) * m];
                for (r, t) in row.iter_mut().zip(tw) {
                    *r += z * t;
                }
            }
        }
    }
    // Along k2.
    let mut s2 = vec![zero; (k + 1) * m * m];
    for a in 0..=k {
        for bb in 0..l {
            let src = &s1[(a * l + bb) * m..(a * l + bb + 1) * m];
            let tw = &e[bb * m..(bb + 1) * m];
            for j2 in 0..m {
                let t = tw[j2];
                let dst = &mut s2[(a * m + j2) * m..(a * m + j2 + 1) * m];
                for (d, s) in dst.iter_mut().zip(src) {
                    *d += s * t;
                }
            }
        }
    }
    // Along k1, folding the k1 < 0 half in as the complex conjugate.
    out.iter_mut().for_each(|x| *x = 0.0);
    for a in 0..=k {
        let w = if a == 0 { 1.0 } else { 2.0 };
        let tw = &e[(a + k) * m..(a + k + 1) * m];
        for j1 in 0..m {
            let t = tw[j1] * w;
            for j2 in 0..m {
                let src = &s2[(a * m + j2) * m..(a * m + j2 + 1) * m];
                let dst = &mut out[(j1 * m + j2) * m..(j1 * m + j2 + 1) * m];
                for (d, s) in dst.iter_mut().zip(src) {
                    *d += t.re * s.re - t.im * s.im;
                }
            }
        }
    }
}

/// ĝ(k) = M⁻³ Σ_j g(x_j) e^{-ik·x_j} on the half cube.
pub(crate) fn analyze(b: &GalerkinBasis, grid: &[f64], out: &mut [Complex64]) {
    let k = b.kmax() as usize;
    let l = 2 * k + 1;
    let m = b.grid_size();
    let e = &b.tables.exp_neg;
    let zero = Complex64::new(0.0, 0.0);

    // Along x1, only k1 ≥ 0.
    let mut p = vec![zero; (k + 1) * m * m];
    for a in 0..=k {
        let tw = &e[(a + k) * m..(a + k + 1) * m];
        let dst_plane = &mut p[a * m * m..(a + 1) * m * m];
        for j1 in 0..m {
            let t = tw[j1];
            let src = &grid[j1 * m * m..(j1 + 1) * m * m];
            for (d, &g) in dst_plane.iter_mut().zip(src) {
                d.re += t.re * g;
                d.im += t.im * g;
            }
        }
    }
    // Along x2.
    let mut q = vec![zero; (k + 1) * l * m];
    for a in 0..=k {
        for bb in 0..l {
            let tw = &e[bb * m..(bb + 1) * m];
            let dst = &mut q[(a * l + bb) * m..(a * l + bb + 1) * m];
            for j2 in 0..m {
                let t = tw[j2];
                let src = &p[(a * m + j2) * m..(a * m + j2 + 1) * m];
                for (d, s) in dst.iter_mut().zip(src) {
                    *d += s * t;
                }
            }
        }
    }
    // Along x3.
    let scale = 1.0 / (m * m * m) as f64;
    for a in 0..=k {
        for bb in 0..l {
            let src = &q[(a * l + bb) * m..(a * l + bb + 1) * m];
            for c in 0..l {
                let tw = &e[c * m..(c + 1) * m];
                let mut acc = zero;
                for (s, t) in src.iter().zip(tw) {
                    acc += s * t;
                }
                out[(a * l + bb) * l + c] = acc * scale;
            }
        }
    }
}
