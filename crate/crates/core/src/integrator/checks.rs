use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use super::params::SimParams;
use super::stepper::{solve_from, Solution, SolveOptions, TrajectoryState};
use crate::error::{invalid, Result};
use crate::noise::{grid_index, WienerPath};
use crate::operators::monotonicity_constant;
use crate::spectral::SpectralField;

/// u(t) = v(t) + Z(t) at every recorded time.
pub fn doss_sussman_recover(sol: &Solution) -> Vec<(f64, SpectralField)> {
    sol.states.iter().map(|(t, v, z)| (*t, v + z)).collect()
}

/// v(t) = u(t) − Z(t), the inverse of [`doss_sussman_recover`].
pub fn doss_sussman_transform(u: &[(f64, SpectralField)], z: &[SpectralField]) -> Vec<(f64, SpectralField)> {
    u.iter().zip(z).map(|((t, u), z)| (*t, u - z)).collect()
}

/// Solve from velocity `x` at path time 0 over `params.t_end`.
pub fn solve_velocity(x: &SpectralField, path: &WienerPath, params: &SimParams, opts: SolveOptions) -> Result<Solution> {
    params.validate()?;
    let st = TrajectoryState::from_velocity(x, path, params)?;
    solve_from(st, path, params, params.steps()?, opts)
}

/// Φ(t, ω)x: the velocity at time t started from x at time 0 on `path`.
///
/// Pass `shift_path(path, s)` for Φ(t, θ_s ω).
pub fn cocycle_apply(t: f64, path: &WienerPath, x: &SpectralField, params: &SimParams) -> Result<SpectralField> {
    if !(t >= 0.0) {
        return Err(invalid("t", "must be nonnegative"));
    }
    let steps = grid_index(t, params.dt)?;
    let mut p = params.clone();
    if steps == 0 {
        return Ok(x.clone());
    }
    p.t_end = t;
    let opts = SolveOptions { record_every: u64::MAX, keep_states: false, track_bounds: false };
    Ok(solve_velocity(x, path, &p, opts)?.final_state.u())
}

/// sup over recorded times of ‖u^{χ₁}(t) − u^{χ₂}(t)‖_H on one path.
pub fn chi_independence_check(
    x: &SpectralField,
    path: &WienerPath,
    chi1: f64,
    chi2: f64,
    params: &SimParams,
) -> Result<f64> {
    Ok(chi_independence_series(x, path, chi1, chi2, params)?.sup_diff)
}

/// Detailed output of a χ comparison.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChiComparison {
    pub sup_diff: f64,
    pub sup_norm_u: f64,
    pub times: Vec<f64>,
    pub diffs: Vec<f64>,
}

pub fn chi_independence_series(
    x: &SpectralField,
    path: &WienerPath,
    chi1: f64,
    chi2: f64,
    params: &SimParams,
) -> Result<ChiComparison> {
    let opts = SolveOptions { record_every: 1, keep_states: true, track_bounds: false };
    let mut p1 = params.clone();
    p1.chi = chi1;
    let mut p2 = params.clone();
    p2.chi = chi2;
    let a = doss_sussman_recover(&solve_velocity(x, path, &p1, opts)?);
    let b = doss_sussman_recover(&solve_velocity(x, path, &p2, opts)?);
    let mut out = ChiComparison { sup_diff: 0.0, sup_norm_u: 0.0, times: Vec::new(), diffs: Vec::new() };
    for ((t, ua), (_, ub)) in a.iter().zip(&b) {
        let d = (ua - ub).norm_h();
        out.sup_diff = out.sup_diff.max(d);
        out.sup_norm_u = out.sup_norm_u.max(ua.norm_h());
        out.times.push(*t);
        out.diffs.push(d);
    }
    Ok(out)
}

/// Differences between solutions with perturbed data, and the Gronwall bound.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ContinuityReport {
    pub sup_diff_h: f64,
    /// ∫‖vₙ − v‖²_V dt (trapezoid).
    pub int_diff_v: f64,
    /// sup_t (‖xₙ − x‖² + t‖fₙ − f‖²_{V'}/ν) e^{2ηt} with η = 7⁷N⁸/(2¹³ν⁷), squared-norm scale.
    pub gronwall_bound_sq: f64,
}

/// Compare the transformed solutions for data (x, f) and (xₙ, fₙ) on one path.
///
/// The difference X obeys d/dt‖X‖² ≤ 2η‖X‖² + ‖fₙ − f‖²_{V'}/ν by the
/// monotonicity estimate, so ‖X(t)‖² ≤ (‖X₀‖² + t‖fₙ − f‖²_{V'}/ν) e^{2ηt}.
pub fn data_continuity_check(
    x: &SpectralField,
    x_n: &SpectralField,
    f: &SpectralField,
    f_n: &SpectralField,
    path: &WienerPath,
    params: &SimParams,
) -> Result<ContinuityReport> {
    let opts = SolveOptions { record_every: 1, keep_states: true, track_bounds: false };
    let mut p = params.clone();
    p.forcing = f.clone();
    let mut pn = params.clone();
    pn.forcing = f_n.clone();
    let a = solve_velocity(x, path, &p, opts)?;
    let b = solve_velocity(x_n, path, &pn, opts)?;
    let mut sup: f64 = 0.0;
    let mut int_v = 0.0;
    let mut last_v: Option<(f64, f64)> = None;
    for ((t, va, _), (_, vb, _)) in a.states.iter().zip(&b.states) {
        let d = vb - va;
        sup = sup.max(d.norm_h());
        let dv = d.norm_v_sq();
        if let Some((t0, v0)) = last_v {
            int_v += 0.5 * (t - t0) * (v0 + dv);
        }
        last_v = Some((*t, dv));
    }
    let eta = monotonicity_constant(params.n(), params.nu);
    let df = (f_n - f).norm_vdual_sq();
    let t = params.t_end;
    let bound = ((x_n - x).norm_h_sq() + t * df / params.nu) * libm::exp(2.0 * eta * t);
    Ok(ContinuityReport { sup_diff_h: sup, int_diff_v: int_v, gronwall_bound_sq: bound })
}
