//! The cutoff F_N, the modified nonlinearity B_N, the operator
//! G_N(v) = νAv + B_N(v + Z), and the operator inequalities around them.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::spectral::{nonlinear_self, norm_l4, SpectralField};

/// Cutoff level and viscosity.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CutoffParams {
    pub n: f64,
    pub nu: f64,
}

impl CutoffParams {
    /// `n = f64::INFINITY` switches the cutoff off.
    pub fn new(n: f64, nu: f64) -> Result<Self> {
        if !(n > 0.0) {
            return Err(invalid("N", "cutoff level must be positive"));
        }
        if !(nu > 0.0 && nu.is_finite()) {
            return Err(invalid("nu", "viscosity must be positive and finite"));
        }
        Ok(Self { n, nu })
    }

    /// η = 7⁷ N⁸ / (2¹³ ν⁷).
    pub fn eta(&self) -> f64 {
        monotonicity_constant(self.n, self.nu)
    }
}

/// 7⁷ N⁸ / (2¹³ ν⁷).
pub fn monotonicity_constant(n: f64, nu: f64) -> f64 {
    823_543.0 * libm::pow(n, 8.0) / (8192.0 * libm::pow(nu, 7.0))
}

/// F_N(r) = min{1, N/r}, with F_N(0) = 1.
pub fn f_cutoff(r: f64, n: f64) -> Result<f64> {
    if !(n > 0.0) {
        return Err(invalid("N", "cutoff level must be positive"));
    }
    Ok(cutoff(r, n))
}

#[inline]
pub(crate) fn cutoff(r: f64, n: f64) -> f64 {
    if r <= n {
        1.0
    } else {
        n / r
    }
}

/// ‖u‖_{L⁴} F_N(‖u‖_{L⁴}), evaluated as min{‖u‖_{L⁴}, N} so that no rounding
/// in r·(N/r) pushes it above N.
pub fn cutoff_product_bound(u: &SpectralField, n: f64) -> Result<f64> {
    let r = norm_l4(u);
    f_cutoff(r, n)?;
    Ok(r.min(n))
}

/// Which branch of the Lipschitz estimate a pair falls into.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum LipschitzCase {
    /// Both norms at most N.
    BothBelow,
    /// ‖u‖ ≤ N < ‖v‖.
    FirstBelow,
    /// ‖v‖ ≤ N < ‖u‖.
    SecondBelow,
    /// Both norms above N.
    BothAbove,
}

impl LipschitzCase {
    pub fn classify(ru: f64, rv: f64, n: f64) -> Self {
        match (ru <= n, rv <= n) {
            (true, true) => Self::BothBelow,
            (true, false) => Self::FirstBelow,
            (false, true) => Self::SecondBelow,
            (false, false) => Self::BothAbove,
        }
    }
}

/// Both sides of |F_N(‖u‖) − F_N(‖v‖)| ≤ N⁻¹ F_N(‖u‖) F_N(‖v‖) ‖u − v‖, norms in L⁴.
pub fn cutoff_lipschitz_check(u: &SpectralField, v: &SpectralField, n: f64) -> Result<(f64, f64)> {
    u.check_basis(v)?;
    let (ru, rv) = (norm_l4(u), norm_l4(v));
    let d = norm_l4(&(u - v));
    let (fu, fv) = (f_cutoff(ru, n)?, f_cutoff(rv, n)?);
    Ok(((fu - fv).abs(), fu * fv * d / n))
}

/// B_N(u) = F_N(‖u‖_{L⁴}) B(u, u).
pub fn b_n_apply(u: &SpectralField, n: f64) -> Result<SpectralField> {
    Ok(b_n_with_norm(u, n)?.0)
}

/// B_N(u) together with ‖u‖_{L⁴} and the cutoff value used.
pub fn b_n_with_norm(u: &SpectralField, n: f64) -> Result<(SpectralField, f64, f64)> {
    if !(n > 0.0) {
        return Err(invalid("N", "cutoff level must be positive"));
    }
    let (mut b, r) = nonlinear_self(u);
    let f = cutoff(r, n);
    if f != 1.0 {
        b.scale_mut(f);
    }
    Ok((b, r, f))
}

/// G_N(v) = νAv + B_N(v + Z).
pub fn g_n_apply(v: &SpectralField, z: &SpectralField, params: &CutoffParams) -> Result<SpectralField> {
    v.check_basis(z)?;
    let mut out = b_n_apply(&(v + z), params.n)?;
    out.axpy(params.nu, &v.stokes_apply());
    Ok(out)
}

/// ⟨G_N(v₁) − G_N(v₂), v₁ − v₂⟩ + η‖v₁ − v₂‖²_H − (ν/2)‖v₁ − v₂‖²_V.
pub fn monotonicity_gap(
    v1: &SpectralField,
    v2: &SpectralField,
    z: &SpectralField,
    params: &CutoffParams,
) -> Result<f64> {
    v1.check_basis(v2)?;
    let w = v1 - v2;
    let dg = &g_n_apply(v1, z, params)? - &g_n_apply(v2, z, params)?;
    Ok(dg.inner(&w) + params.eta() * w.norm_h_sq() - 0.5 * params.nu * w.norm_v_sq())
}

/// Tolerance for [`monotonicity_gap`]: 1e-10 (1 + ‖v₁‖²_V + ‖v₂‖²_V).
pub fn monotonicity_tolerance(v1: &SpectralField, v2: &SpectralField) -> f64 {
    1e-10 * (1.0 + v1.norm_v_sq() + v2.norm_v_sq())
}
