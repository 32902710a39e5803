use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use super::stats::trapezoid;
use super::EnsembleRunner;
use crate::error::{invalid, Result};
use crate::integrator::{solve_velocity, SimParams, Solution, SolveOptions};
use crate::noise::{make_path, NoiseSpectrum};
use crate::spectral::{ladyzhenskaya_ratio, SpectralField};

/// Constant of ‖u‖_{L⁴} ≤ C‖u‖_H^{1/4}‖∇u‖^{3/4} used for K_T.
pub const LADYZHENSKAYA_CONSTANT: f64 = core::f64::consts::SQRT_2;

/// K_T such that ∫₀ᵀ‖u‖_{L⁴}^{8/3} ≤ K_T^{4/3} along any deterministic
/// trajectory from x with forcing f.
///
/// The energy inequality gives sup‖u‖² + ν∫‖u‖²_V ≤ E := ‖x‖² + T‖f‖²_{V'}/ν,
/// so ∫‖u‖_{L⁴}^{8/3} ≤ C^{8/3} E^{1/3} E/ν and K_T = C² E / ν^{3/4}.
pub fn ladyzhenskaya_k_t(x_norm_sq: f64, f_vdual_sq: f64, t: f64, nu: f64, c_l: f64) -> f64 {
    let e = x_norm_sq + t * f_vdual_sq / nu;
    c_l * c_l * e / libm::pow(nu, 0.75)
}

/// Deterministic Galerkin Navier-Stokes from `x`: no cutoff and no noise.
pub fn solve_nse(x: &SpectralField, params: &SimParams) -> Result<Solution> {
    run_deterministic(x, params, None)
}

fn run_deterministic(x: &SpectralField, params: &SimParams, n: Option<f64>) -> Result<Solution> {
    let mut p = params.clone();
    p.n_cutoff = n;
    p.noise = NoiseSpectrum::off();
    p.chi = 0.0;
    let path = make_path(0, p.dt_path, 0.0, p.t_end + p.dt_path, p.noise, p.basis())?;
    let opts = SolveOptions { record_every: 1, keep_states: true, track_bounds: false };
    solve_velocity(x, &path, &p, opts)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NseLimitRow {
    pub n: f64,
    /// ‖u^N − u*‖_{L²(0,T;H)}
    pub l2_error: f64,
    /// Measure of {s : ‖u^N(s)‖_{L⁴} ≥ N}, counted on the step grid.
    pub i_n: f64,
    /// (K_T/N²)^{4/3}
    pub i_n_bound: f64,
    /// ∫₀ᵀ|1 − F_N| ds
    pub int_one_minus_f: f64,
    /// ∫₀ᵀ|1 − F_N|² ds
    pub int_one_minus_f_sq: f64,
    pub sup_l4: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NseLimitReport {
    pub rows: Vec<NseLimitRow>,
    pub k_t: f64,
    /// Largest ‖u‖_{L⁴}/(‖u‖_H^{1/4}‖∇u‖^{3/4}) seen on any trajectory.
    pub ladyzhenskaya_observed: f64,
    pub c_l: f64,
    /// sup_t ‖u*(t)‖_{L⁴}
    pub nse_sup_l4: f64,
    pub bound_ok: bool,
    pub cutoff_monotone: bool,
    pub error_monotone: bool,
    pub exact_at_largest: bool,
    pub pass: bool,
}

/// sup_t ‖u*(t)‖_{L⁴} along the deterministic Navier-Stokes trajectory.
pub fn nse_l4_scale(x: &SpectralField, params: &SimParams) -> Result<f64> {
    Ok(solve_nse(x, params)?.ledger.rows.iter().map(|r| r.l4_u).fold(0.0, f64::max))
}

/// Solve the modified system for each N in `n_list` and compare with the
/// uncut Navier-Stokes trajectory.
pub fn nse_limit_experiment<R: EnsembleRunner>(
    x: &SpectralField,
    params: &SimParams,
    n_list: &[f64],
    runner: &R,
) -> Result<NseLimitReport> {
    params.validate()?;
    if n_list.is_empty() || n_list.windows(2).any(|w| !(w[0] < w[1])) || !(n_list[0] > 0.0) {
        return Err(invalid("n_list", "must be positive and strictly increasing"));
    }
    let reference = solve_nse(x, params)?;
    let runs: Vec<Result<Solution>> = runner.map(n_list.len(), |i| run_deterministic(x, params, Some(n_list[i])));
    let mut sols = Vec::with_capacity(runs.len());
    for r in runs {
        sols.push(r?);
    }

    let lady = |s: &Solution| s.states.iter().map(|(_, v, z)| ladyzhenskaya_ratio(&(v + z))).fold(0.0, f64::max);
    let observed = sols.iter().map(lady).fold(lady(&reference), f64::max);
    let c_l = LADYZHENSKAYA_CONSTANT.max(observed);
    let k_t = ladyzhenskaya_k_t(x.norm_h_sq(), params.forcing.norm_vdual_sq(), params.t_end, params.nu, c_l);
    let nse_sup_l4 = reference.ledger.rows.iter().map(|r| r.l4_u).fold(0.0, f64::max);
    let dt = params.dt;

    let rows: Vec<NseLimitRow> = n_list
        .iter()
        .zip(&sols)
        .map(|(&n, s)| {
            let times: Vec<f64> = s.ledger.rows.iter().map(|r| r.t).collect();
            let err_sq: Vec<f64> =
                s.states.iter().zip(&reference.states).map(|((_, v, z), (_, vr, zr))| (&(v + z) - &(vr + zr)).norm_h_sq()).collect();
            let one_minus: Vec<f64> = s.ledger.rows.iter().map(|r| 1.0 - r.f_n).collect();
            let one_minus_sq: Vec<f64> = one_minus.iter().map(|d| d * d).collect();
            // Left-point counting: each grid time stands for the step after it.
            let rows = &s.ledger.rows;
            let count = rows[..rows.len() - 1].iter().filter(|r| r.l4_u >= n).count();
            NseLimitRow {
                n,
                l2_error: libm::sqrt(trapezoid(&times, &err_sq)),
                i_n: count as f64 * dt,
                i_n_bound: libm::pow(k_t / (n * n), 4.0 / 3.0),
                int_one_minus_f: trapezoid(&times, &one_minus),
                int_one_minus_f_sq: trapezoid(&times, &one_minus_sq),
                sup_l4: rows.iter().map(|r| r.l4_u).fold(0.0, f64::max),
            }
        })
        .collect();

    let bound_ok = rows.iter().all(|r| r.i_n <= r.i_n_bound && r.int_one_minus_f_sq <= r.int_one_minus_f);
    let cutoff_monotone = rows.windows(2).all(|w| w[1].int_one_minus_f <= w[0].int_one_minus_f);
    let error_monotone = rows.windows(2).all(|w| w[1].l2_error <= w[0].l2_error);
    let exact_at_largest = rows.last().map(|r| r.l2_error == 0.0).unwrap_or(false);
    Ok(NseLimitReport {
        rows,
        k_t,
        ladyzhenskaya_observed: observed,
        c_l,
        nse_sup_l4,
        bound_ok,
        cutoff_monotone,
        error_monotone,
        exact_at_largest,
        pass: bound_ok && cutoff_monotone && error_monotone && exact_at_largest,
    })
}
