use alloc::format;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use super::stats::{batch_means, integrated_autocorrelation, mean, std_error};
use super::{stability_threshold, EnsembleRunner};
use crate::error::{invalid, Result};
use crate::integrator::{SimParams, Stepper, TrajectoryState};
use crate::noise::{derive_seed, grid_index, make_path, ou_expected_energy};
use crate::spectral::{norm_l4, SpectralField};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Observable {
    /// ‖u‖²_H
    EnergyH,
    /// ‖u‖²_V
    EnstrophyV,
    /// ‖u‖_{L⁴}
    NormL4,
}

impl Observable {
    pub const DEFAULT: [Observable; 3] = [Observable::EnergyH, Observable::EnstrophyV, Observable::NormL4];

    pub fn eval(&self, u: &SpectralField) -> f64 {
        match self {
            Observable::EnergyH => u.norm_h_sq(),
            Observable::EnstrophyV => u.norm_v_sq(),
            Observable::NormL4 => norm_l4(u),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Observable::EnergyH => "energy_h",
            Observable::EnstrophyV => "enstrophy_v",
            Observable::NormL4 => "norm_l4",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeasureConfig {
    pub observables: Vec<Observable>,
    pub burn_in: f64,
    /// Averaging window after burn-in.
    pub horizon: f64,
    /// Steps between samples.
    pub sample_every: u64,
    pub batches: usize,
    pub root_seed: u64,
    /// Require ν above the stability threshold.
    pub strict: bool,
}

impl MeasureConfig {
    /// Burn-in 5/(νλ), horizon 200/(νλ), 20 batches.
    pub fn for_params(params: &SimParams, root_seed: u64) -> Self {
        let r = params.nu * params.lambda_p;
        Self {
            observables: Observable::DEFAULT.to_vec(),
            burn_in: 5.0 / r,
            horizon: 200.0 / r,
            sample_every: 4,
            batches: 20,
            root_seed,
            strict: true,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ObservableStats {
    pub observable: Observable,
    pub mean: f64,
    /// Batch-means standard error of the time average.
    pub se: f64,
    /// Integrated autocorrelation time in time units.
    pub tau: f64,
}

/// Time averages from one initial condition.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeasureRun {
    pub x_norm: f64,
    pub samples: usize,
    pub stats: Vec<ObservableStats>,
    /// Autocorrelation time exceeds horizon/20 for some observable.
    pub insufficient_horizon: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PairCheck {
    pub i: usize,
    pub j: usize,
    pub observable: Observable,
    pub diff: f64,
    pub combined_se: f64,
    pub ok: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeasureReport {
    pub burn_in: f64,
    pub horizon: f64,
    pub runs: Vec<MeasureRun>,
    /// Mean over initial conditions of each observable's time average.
    pub ensemble_mean: Vec<f64>,
    pub ensemble_se: Vec<f64>,
    pub pairs: Vec<PairCheck>,
    /// Stationary E‖Z‖²_H of the linear (χ = 0) problem, Σσ²/(ν|k|²) over slots.
    pub linear_oracle_h_sq: f64,
    pub insufficient_horizon: bool,
    pub pass: bool,
}

/// Long-run time averages from each initial condition on independent paths,
/// with pairwise agreement within 3 combined standard errors.
pub fn invariant_measure_sampler<R: EnsembleRunner>(
    params: &SimParams,
    config: &MeasureConfig,
    initial_set: &[SpectralField],
    runner: &R,
) -> Result<MeasureReport> {
    params.validate()?;
    if config.strict && !(params.nu > stability_threshold(params.n(), params.lambda_p)) {
        return Err(invalid("nu", "must exceed the stability threshold for the mixing assertion"));
    }
    let min_burn = 5.0 / (params.nu * params.lambda_p);
    if !(config.burn_in >= min_burn * (1.0 - 1e-12)) {
        return Err(invalid("burn_in", format!("must be at least 5/(nu lambda) = {min_burn}")));
    }
    if !(config.horizon > 0.0) || config.sample_every == 0 || config.observables.is_empty() {
        return Err(invalid("horizon", "horizon, sample_every and observables must be positive"));
    }
    let burn_steps = grid_index(config.burn_in, params.dt)? as u64;
    let total = burn_steps + grid_index(config.horizon, params.dt)? as u64;
    let t_total = total as f64 * params.dt;
    let sample_dt = config.sample_every as f64 * params.dt;

    let runs: Vec<Result<MeasureRun>> = runner.map(initial_set.len(), |i| {
        let x = &initial_set[i];
        let seed = derive_seed(config.root_seed, &format!("measure/path/{i}"));
        let path = make_path(seed, params.dt_path, 0.0, t_total + params.dt_path, params.noise, params.basis())?;
        let mut st = TrajectoryState::from_velocity(x, &path, params)?;
        let stepper = Stepper::new(params, st.v.norm_h())?;
        let mut ex = stepper.explicit(&st)?;
        let mut series: Vec<Vec<f64>> = config.observables.iter().map(|_| Vec::new()).collect();
        for n in 1..=total {
            let (next, nex) = stepper.step_with(&st, &ex, &path)?;
            st = next;
            ex = nex;
            if n > burn_steps && (n - burn_steps) % config.sample_every == 0 {
                let u = st.u();
                for (s, o) in series.iter_mut().zip(&config.observables) {
                    s.push(o.eval(&u));
                }
            }
        }
        let mut insufficient = false;
        let stats = series
            .iter()
            .zip(&config.observables)
            .map(|(s, o)| {
                let (m, se) = batch_means(s, config.batches);
                let tau = integrated_autocorrelation(s) * sample_dt;
                if tau > config.horizon / 20.0 {
                    insufficient = true;
                }
                ObservableStats { observable: *o, mean: m, se, tau }
            })
            .collect();
        Ok(MeasureRun { x_norm: x.norm_h(), samples: series[0].len(), stats, insufficient_horizon: insufficient })
    });
    let mut out = Vec::with_capacity(runs.len());
    for r in runs {
        out.push(r?);
    }

    let nobs = config.observables.len();
    let mut ensemble_mean = Vec::with_capacity(nobs);
    let mut ensemble_se = Vec::with_capacity(nobs);
    for k in 0..nobs {
        let m: Vec<f64> = out.iter().map(|r| r.stats[k].mean).collect();
        ensemble_mean.push(mean(&m));
        ensemble_se.push(std_error(&m));
    }
    let mut pairs = Vec::new();
    for i in 0..out.len() {
        for j in i + 1..out.len() {
            for k in 0..nobs {
                let (a, b) = (&out[i].stats[k], &out[j].stats[k]);
                let diff = (a.mean - b.mean).abs();
                let combined_se = libm::sqrt(a.se * a.se + b.se * b.se);
                pairs.push(PairCheck { i, j, observable: a.observable, diff, combined_se, ok: diff <= 3.0 * combined_se });
            }
        }
    }
    let insufficient = out.iter().any(|r| r.insufficient_horizon);
    let pass = pairs.iter().all(|p| p.ok);
    Ok(MeasureReport {
        burn_in: config.burn_in,
        horizon: config.horizon,
        runs: out,
        ensemble_mean,
        ensemble_se,
        pairs,
        linear_oracle_h_sq: ou_expected_energy(&params.noise, 0.0, params.nu, params.basis()),
        insufficient_horizon: insufficient,
        pass,
    })
}
