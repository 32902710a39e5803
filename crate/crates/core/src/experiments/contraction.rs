use alloc::format;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use super::stats::{linear_fit, mean, std_error};
use super::{stability_threshold, EnsembleRunner};
use crate::error::{invalid, Result};
use crate::integrator::{solve_velocity, SimParams, SolveOptions};
use crate::noise::{derive_seed, make_path};
use crate::spectral::SpectralField;

/// Ensemble statistics of ‖u₁(t) − u₂(t)‖²_H against the e^{−rate·t} envelope.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContractionReport {
    pub ensemble: usize,
    pub nu: f64,
    pub n_cutoff: f64,
    pub lambda_p: f64,
    pub threshold: f64,
    pub rate: f64,
    pub initial_gap_sq: f64,
    pub times: Vec<f64>,
    pub mean_sq_diff: Vec<f64>,
    pub std_err: Vec<f64>,
    pub envelope: Vec<f64>,
    /// Least-squares slope of ln(mean) over the second half of the horizon.
    pub fitted_slope: f64,
    pub fitted_slope_se: f64,
    pub envelope_ok: bool,
    pub slope_ok: bool,
    pub pass: bool,
}

/// Solve from `x1` and `x2` on `ensemble` independent paths and compare the
/// mean squared difference with ‖x₁ − x₂‖² e^{−(νλ − 7⁷N⁸/(2¹²ν⁷))t}.
///
/// With `strict`, parameters at or below the viscosity threshold are rejected.
pub fn contraction_experiment<R: EnsembleRunner>(
    params: &SimParams,
    x1: &SpectralField,
    x2: &SpectralField,
    ensemble: usize,
    output_every: u64,
    root_seed: u64,
    runner: &R,
    strict: bool,
) -> Result<ContractionReport> {
    params.validate()?;
    let rate = params.contraction_rate();
    let threshold = stability_threshold(params.n(), params.lambda_p);
    if strict && !(params.nu > threshold) {
        return Err(invalid("nu", format!("nu = {} is not above the stability threshold {threshold}", params.nu)));
    }
    if ensemble == 0 {
        return Err(invalid("ensemble", "must be positive"));
    }
    let opts = SolveOptions { record_every: output_every.max(1), keep_states: true, track_bounds: false };
    let basis = params.basis().clone();
    let runs: Vec<Result<(Vec<f64>, Vec<f64>)>> = runner.map(ensemble, |e| {
        let seed = derive_seed(root_seed, &format!("contract/path/{e}"));
        let path = make_path(seed, params.dt_path, 0.0, params.t_end + params.dt_path, params.noise, &basis)?;
        let a = solve_velocity(x1, &path, params, opts)?;
        let b = solve_velocity(x2, &path, params, opts)?;
        let times = a.states.iter().map(|s| s.0).collect();
        // Both runs share Z, so u₁ − u₂ = v₁ − v₂.
        let d = a.states.iter().zip(&b.states).map(|(p, q)| (&p.1 - &q.1).norm_h_sq()).collect();
        Ok((times, d))
    });
    let mut per: Vec<Vec<f64>> = Vec::with_capacity(ensemble);
    let mut times = Vec::new();
    for r in runs {
        let (t, d) = r?;
        times = t;
        per.push(d);
    }
    let g0 = (x1 - x2).norm_h_sq();
    let nt = times.len();
    let mut mean_sq = Vec::with_capacity(nt);
    let mut se = Vec::with_capacity(nt);
    let mut envelope = Vec::with_capacity(nt);
    let mut envelope_ok = true;
    for i in 0..nt {
        let col: Vec<f64> = per.iter().map(|d| d[i]).collect();
        let m = mean(&col);
        let s = std_error(&col);
        let env = g0 * libm::exp(-rate * times[i]);
        // Relative slack at rounding level keeps t = 0 (m = env) from failing.
        if m > env + 3.0 * s + 1e-12 * g0 {
            envelope_ok = false;
        }
        mean_sq.push(m);
        se.push(s);
        envelope.push(env);
    }
    let half = params.t_end / 2.0;
    let (ft, fy): (Vec<f64>, Vec<f64>) = times
        .iter()
        .zip(&mean_sq)
        .filter(|(t, m)| **t >= half && **m > 0.0)
        .map(|(t, m)| (*t, libm::log(*m)))
        .unzip();
    let (slope, slope_se) = linear_fit(&ft, &fy);
    let slope_ok = if slope.is_nan() { g0 == 0.0 } else { slope <= -rate + 3.0 * slope_se + 1e-9 };
    Ok(ContractionReport {
        ensemble,
        nu: params.nu,
        n_cutoff: params.n(),
        lambda_p: params.lambda_p,
        threshold,
        rate,
        initial_gap_sq: g0,
        times,
        mean_sq_diff: mean_sq,
        std_err: se,
        envelope,
        fitted_slope: slope,
        fitted_slope_se: slope_se,
        envelope_ok,
        slope_ok,
        pass: envelope_ok && slope_ok,
    })
}
