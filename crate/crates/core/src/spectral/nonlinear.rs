use alloc::vec;
use alloc::vec::Vec;

use num_complex::Complex64;

use super::basis::VOLUME;
use super::field::SpectralField;
use super::grid;
use crate::error::Result;

fn quad_weight(u: &SpectralField) -> f64 {
    let m = u.basis().grid_size() as f64;
    VOLUME / (m * m * m)
}

fn l4_from_grid(g: &[Vec<f64>; 3], w: f64) -> f64 {
    let mut acc = 0.0;
    for j in 0..g[0].len() {
        let s = g[0][j] * g[0][j] + g[1][j] * g[1][j] + g[2][j] * g[2][j];
        acc += s * s;
    }
    libm::sqrt(libm::sqrt(acc * w))
}

/// ‖u‖_{L⁴}, by grid quadrature (exact for the basis grid).
pub fn norm_l4(u: &SpectralField) -> f64 {
    l4_from_grid(&u.to_grid(), quad_weight(u))
}

/// ‖u‖_{L⁴} / (‖u‖_H^{1/4} ‖u‖_V^{3/4}); zero for the zero field.
pub fn ladyzhenskaya_ratio(u: &SpectralField) -> f64 {
    let d = libm::pow(u.norm_h(), 0.25) * libm::pow(u.norm_v(), 0.75);
    if d == 0.0 {
        0.0
    } else {
        norm_l4(u) / d
    }
}

/// b(u, v, w) = ∫ (u·∇)v · w dx by grid quadrature.
pub fn trilinear_b(u: &SpectralField, v: &SpectralField, w: &SpectralField) -> Result<f64> {
    u.check_basis(v)?;
    u.check_basis(w)?;
    let ug = u.to_grid();
    let wg = w.to_grid();
    let n = ug[0].len();
    let mut acc = vec![0.0; n];
    for i in 0..3 {
        for j in 0..3 {
            let d = v.grid_component(i, Some(j));
            for x in 0..n {
                acc[x] += ug[j][x] * d[x] * wg[i][x];
            }
        }
    }
    Ok(acc.iter().sum::<f64>() * quad_weight(u))
}

/// Galerkin projection of (u·∇)v onto the basis (advective form).
pub fn nonlinear_b(u: &SpectralField, v: &SpectralField) -> Result<SpectralField> {
    u.check_basis(v)?;
    let basis = u.basis();
    let ug = u.to_grid();
    let n = ug[0].len();
    let mut g = [vec![0.0; n], vec![0.0; n], vec![0.0; n]];
    for i in 0..3 {
        for j in 0..3 {
            let d = v.grid_component(i, Some(j));
            for x in 0..n {
                g[i][x] += ug[j][x] * d[x];
            }
        }
    }
    Ok(SpectralField::from_grid(basis, &g))
}

/// B(u, u) in divergence form ∂_j(u_j u) together with ‖u‖_{L⁴}.
///
/// Uses three inverse and six forward transforms and shares the velocity
/// grid with the L⁴ quadrature.
pub fn nonlinear_self(u: &SpectralField) -> (SpectralField, f64) {
    let basis = u.basis();
    let b = &**basis;
    let ug = u.to_grid();
    let l4 = l4_from_grid(&ug, quad_weight(u));
    let nc = grid::half_cube_len(b);
    let n = ug[0].len();
    let zero = Complex64::new(0.0, 0.0);
    let mut prod = vec![0.0; n];
    // Symmetric products in the order (00, 01, 02, 11, 12, 22).
    let pairs = [(0, 0), (0, 1), (0, 2), (1, 1), (1, 2), (2, 2)];
    let mut hats: Vec<Vec<Complex64>> = Vec::with_capacity(6);
    for &(i, j) in &pairs {
        for x in 0..n {
            prod[x] = ug[i][x] * ug[j][x];
        }
        let mut c = vec![zero; nc];
        grid::analyze(b, &prod, &mut c);
        hats.push(c);
    }
    let slot = |i: usize, j: usize| -> usize {
        let (a, c) = if i <= j { (i, j) } else { (j, i) };
        pairs.iter().position(|&p| p == (a, c)).unwrap()
    };
    let mut out = SpectralField::zeros(basis);
    let s = libm::sqrt(2.0 * super::basis::VOLUME);
    for (m, k) in b.modes().iter().enumerate() {
        let ci = b.tables.cube_index[m];
        let mut bh = [zero; 3];
        for i in 0..3 {
            for j in 0..3 {
                bh[i] += Complex64::new(0.0, k.0[j] as f64) * hats[slot(i, j)][ci];
            }
        }
        for p in 0..2 {
            let pv = b.polarizations()[m][p];
            out.coeffs_mut()[2 * m + p] = (bh[0] * pv[0] + bh[1] * pv[1] + bh[2] * pv[2]) * s;
        }
    }
    (out, l4)
}
