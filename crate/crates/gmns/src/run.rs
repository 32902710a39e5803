//! Running one configured experiment into a run directory.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use gmns_core::experiments::{
    contraction_experiment, invariant_measure_sampler, nse_l4_scale, nse_limit_experiment, pullback_absorption,
    MeasureConfig, Observable,
};
use gmns_core::integrator::{solve_velocity, SimParams, SolveOptions};
use gmns_core::noise::{derive_seed, make_path, rng_from};
use gmns_core::spectral::{encode_field, SpectralField};
use serde_json::{json, Value};

use crate::checks::{run_suite, CheckContext};
use crate::config::{Experiment, FieldKind, Mode, RunConfig};
use crate::error::{exit, AppError, AppResult};
use crate::io::Checkpoint;
use crate::output::{fmt_f64, OutputDir, Table};
use crate::registry::{Registry, RunRecord};
use crate::runner::RayonRunner;

/// What one experiment produced before the exit code is decided.
struct Outcome {
    assertions: BTreeMap<String, bool>,
    /// Set when an integrated-autocorrelation time is too long for the horizon.
    insufficient_horizon: bool,
    results: Value,
}

/// Result of [`run_experiment`].
#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub exit_code: i32,
    pub pass: bool,
    pub out_dir: PathBuf,
    pub content_hash: String,
    /// Earlier registry entries with the same config hash and different outputs.
    pub diverged_from: Vec<String>,
    pub summary: Value,
}

fn unix_now() -> u64 {
    SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0)
}

/// Default run directory: `runs/<experiment>-<first 12 hex digits of the config hash>`.
pub fn default_out_dir(cfg: &RunConfig) -> PathBuf {
    PathBuf::from("runs").join(format!("{}-{}", cfg.experiment.name(), &cfg.hash()[..12]))
}

/// Run `cfg` into `out`, append to `registry`, and decide the exit code.
pub fn run_experiment(cfg: &RunConfig, out: &Path, registry: &Registry, runner: &RayonRunner) -> AppResult<RunOutcome> {
    let started = unix_now();
    cfg.validate()?;
    let config_hash = cfg.hash();
    let mut dir = OutputDir::create(out)?;
    dir.write_bytes("config.toml", cfg.to_toml_string().as_bytes())?;

    let strict = cfg.mode == Mode::Strict;
    let (pass, mut exit_code, body) = match dispatch(cfg, &mut dir, runner) {
        Ok(o) => {
            let pass = o.assertions.values().all(|v| *v);
            let code = if !strict {
                exit::OK
            } else if !pass {
                exit::ASSERTION
            } else if o.insufficient_horizon {
                exit::HORIZON
            } else {
                exit::OK
            };
            let failed: Vec<&String> = o.assertions.iter().filter(|(_, v)| !**v).map(|(k, _)| k).collect();
            let body = json!({
                "assertions": o.assertions,
                "failed": failed,
                "insufficient_horizon": o.insufficient_horizon,
                "results": o.results,
            });
            (pass, code, body)
        }
        Err(e @ AppError::Core(gmns_core::Error::Unstable { .. })) => {
            (false, exit::INSTABILITY, json!({ "error": e.to_string() }))
        }
        Err(e) => return Err(e),
    };
    let summary = json!({
        "experiment": cfg.experiment.name(),
        "seed": cfg.seed,
        "mode": if strict { "strict" } else { "exploratory" },
        "config_hash": config_hash,
        "pass": pass,
        "exit_code": exit_code,
        "report": body,
    });
    dir.write_json("summary.json", &summary)?;

    let content_hash = dir.content_hash();
    let diverged_from = registry.divergences(&config_hash, &content_hash)?;
    if !diverged_from.is_empty() && strict {
        exit_code = exit::ASSERTION;
    }
    let record = RunRecord {
        config_hash,
        experiment: cfg.experiment.name().into(),
        seed: cfg.seed,
        out_dir: out.display().to_string(),
        started_unix: started,
        finished_unix: unix_now(),
        content_hash: content_hash.clone(),
        outputs: dir.hashes().clone(),
        pass,
        exit_code,
        diverged_from: diverged_from.clone(),
    };
    registry.append(&record)?;
    Ok(RunOutcome { exit_code, pass, out_dir: out.to_path_buf(), content_hash, diverged_from, summary })
}

fn dispatch(cfg: &RunConfig, dir: &mut OutputDir, runner: &RayonRunner) -> AppResult<Outcome> {
    match cfg.experiment {
        Experiment::Check => run_check(cfg, dir, runner),
        Experiment::Simulate => run_simulate(cfg, dir),
        Experiment::Contract => run_contract(cfg, dir, runner),
        Experiment::Pullback => run_pullback(cfg, dir, runner),
        Experiment::NseLimit => run_nse_limit(cfg, dir, runner),
        Experiment::Measure => run_measure(cfg, dir, runner),
    }
}

fn params_json(p: &SimParams) -> Value {
    json!({
        "nu": p.nu,
        "n_cutoff": p.n_cutoff,
        "chi": p.chi,
        "lambda": p.lambda_p,
        "dt": p.dt,
        "dt_path": p.dt_path,
        "t_end": p.t_end,
        "kmax": p.kmax,
        "noise": p.noise,
        "ou_scheme": p.ou_scheme,
        "forcing_vdual_sq": p.forcing.norm_vdual_sq(),
    })
}

/// Unit direction from the `initial` field, or a fixed random one if it is zero.
fn unit_direction(cfg: &RunConfig, p: &SimParams, label: &str) -> AppResult<SpectralField> {
    let x = cfg.initial.build(p.basis(), cfg.seed, "initial")?;
    if cfg.initial.kind != FieldKind::Zero && x.norm_h() > 0.0 {
        return Ok(x.scale(1.0 / x.norm_h()));
    }
    let mut rng = rng_from(derive_seed(cfg.seed, label), "field");
    Ok(SpectralField::random(p.basis(), 1.0, &mut rng))
}

fn run_check(cfg: &RunConfig, dir: &mut OutputDir, runner: &RayonRunner) -> AppResult<Outcome> {
    let basis = cfg.basis()?;
    let p = cfg.sim_params(&basis)?;
    let cx = CheckContext { params: &p, seed: cfg.seed, config: &cfg.check, runner };
    let mut assertions = BTreeMap::new();
    let mut suites = Vec::new();
    let mut table = Table::new(&["suite", "case", "seed", "lhs", "rhs", "margin"]);
    for suite in &cfg.check.suites {
        let rep = run_suite(*suite, &cx)?;
        assertions.insert(suite.name().to_string(), rep.pass);
        let (bad, good): (Vec<_>, Vec<_>) = rep.rows.iter().partition(|r| !r.ok());
        for r in bad.into_iter().chain(good.into_iter().take(cfg.check.csv_rows)) {
            table.push(vec![
                r.suite.into(),
                r.case.clone(),
                r.seed.to_string(),
                fmt_f64(r.lhs),
                fmt_f64(r.rhs),
                fmt_f64(r.margin),
            ]);
        }
        suites.push(rep);
    }
    dir.write_csv("checks.csv", &table)?;
    Ok(Outcome { assertions, insufficient_horizon: false, results: json!({ "params": params_json(&p), "suites": suites }) })
}

fn run_simulate(cfg: &RunConfig, dir: &mut OutputDir) -> AppResult<Outcome> {
    let basis = cfg.basis()?;
    let p = cfg.sim_params(&basis)?;
    let x = cfg.initial.build(&basis, cfg.seed, "initial")?;
    let path = make_path(derive_seed(cfg.seed, "simulate/path"), p.dt_path, 0.0, p.t_end + p.dt_path, p.noise, &basis)?;
    let opts = SolveOptions { record_every: cfg.simulate.record_every, keep_states: true, track_bounds: cfg.simulate.track_bounds };
    let sol = solve_velocity(&x, &path, &p, opts)?;

    let mut ledger = Table::new(&["t", "v_h_sq", "v_v_sq", "u_l4", "f_n", "work_b", "work_f", "work_chi", "residual", "u_h"]);
    for r in &sol.ledger.rows {
        ledger.push_nums(&[r.t, r.h_sq_v, r.v_sq_v, r.l4_u, r.f_n, r.work_b, r.work_f, r.work_chi, r.residual, r.h_u]);
    }
    dir.write_csv("ledger.csv", &ledger)?;
    let mut traj = Table::new(&["t", "u_h", "v_h", "z_h"]);
    for (t, v, z) in &sol.states {
        traj.push_nums(&[*t, (v + z).norm_h(), v.norm_h(), z.norm_h()]);
    }
    dir.write_csv("trajectory.csv", &traj)?;
    let mut assertions = BTreeMap::new();
    if cfg.simulate.track_bounds {
        let mut bounds = Table::new(&["t", "integral_lhs", "integral_rhs", "decay_lhs", "decay_rhs", "effective_constant"]);
        for b in &sol.bounds {
            bounds.push_nums(&[b.t, b.integral_lhs, b.integral_rhs, b.decay_lhs, b.decay_rhs, b.effective_constant]);
        }
        dir.write_csv("bounds.csv", &bounds)?;
        assertions.insert("a_priori_bounds".into(), sol.bounds.iter().all(|b| b.holds()));
    }
    let residual = sol.ledger.last_residual();
    assertions.insert("finite_energy".into(), residual.is_finite() && sol.final_state.v.norm_h().is_finite());
    dir.write_json("path_manifest.json", &path.manifest())?;
    dir.write_json("checkpoint.json", &Checkpoint::new(&p, &path, &sol.final_state))?;
    dir.write_bytes("initial.field", &encode_field(&x))?;
    dir.write_bytes("final.field", &encode_field(&sol.final_state.u()))?;
    let results = json!({
        "params": params_json(&p),
        "steps": sol.final_state.step,
        "final_time": sol.final_state.time,
        "final_u_h": sol.final_state.u().norm_h(),
        "energy_residual": residual,
        "max_abs_residual": sol.ledger.max_abs_residual(),
        "dissipation": sol.ledger.dissipation,
        "work": sol.ledger.work,
    });
    Ok(Outcome { assertions, insufficient_horizon: false, results })
}

fn run_contract(cfg: &RunConfig, dir: &mut OutputDir, runner: &RayonRunner) -> AppResult<Outcome> {
    let basis = cfg.basis()?;
    let p = cfg.sim_params(&basis)?;
    let x1 = cfg.initial.build(&basis, cfg.seed, "initial")?;
    let x2 = cfg.contract.second.build(&basis, cfg.seed, "second")?;
    let strict = cfg.mode == Mode::Strict;
    let r = contraction_experiment(&p, &x1, &x2, cfg.ensemble, cfg.contract.output_every, cfg.seed, runner, strict)?;
    let mut t = Table::new(&["t", "mean_sq_diff", "std_err", "envelope"]);
    for i in 0..r.times.len() {
        t.push_nums(&[r.times[i], r.mean_sq_diff[i], r.std_err[i], r.envelope[i]]);
    }
    dir.write_csv("contraction.csv", &t)?;
    let assertions = BTreeMap::from([("envelope".to_string(), r.envelope_ok)]);
    let results = json!({
        "params": params_json(&p),
        "ensemble": r.ensemble,
        "threshold": r.threshold,
        "rate": r.rate,
        "initial_gap_sq": r.initial_gap_sq,
        "fitted_slope": r.fitted_slope,
        "fitted_slope_se": r.fitted_slope_se,
        "slope_at_least_rate": r.slope_ok,
    });
    Ok(Outcome { assertions, insufficient_horizon: false, results })
}

fn run_pullback(cfg: &RunConfig, dir: &mut OutputDir, runner: &RayonRunner) -> AppResult<Outcome> {
    let basis = cfg.basis()?;
    let p = cfg.sim_params(&basis)?;
    let pc = &cfg.pullback;
    let t_max = pc.times.last().copied().unwrap_or(0.0);
    let path = make_path(derive_seed(cfg.seed, "pullback/path"), p.dt_path, -t_max - p.dt_path, 2.0 * p.dt_path, p.noise, &basis)?;
    let dir_x = unit_direction(cfg, &p, "pullback/direction")?;
    let r = pullback_absorption(&p, &path, &pc.times, &dir_x, &pc.x_norms, pc.agreement_from, pc.tolerance, runner)?;
    let mut t = Table::new(&["t_m", "x_norm", "radius", "initial_term", "noise_start_term", "integral_term", "z_now", "radius_bound"]);
    for q in &r.points {
        t.push_nums(&[q.t_m, q.x_norm, q.radius, q.initial_term, q.noise_start_term, q.integral_term, q.z_now, q.radius_bound]);
    }
    dir.write_csv("pullback.csv", &t)?;
    dir.write_json("path_manifest.json", &path.manifest())?;
    let assertions = BTreeMap::from([
        ("radius_bound".to_string(), r.bound_ok),
        ("initial_condition_independence".to_string(), r.agreement_ok),
        ("initial_terms_decay".to_string(), r.initial_terms_decay),
    ]);
    let results = json!({
        "params": params_json(&p),
        "agreement_from": r.agreement_from,
        "tolerance": r.tolerance,
        "max_spread": r.max_spread,
    });
    Ok(Outcome { assertions, insufficient_horizon: false, results })
}

fn run_nse_limit(cfg: &RunConfig, dir: &mut OutputDir, runner: &RayonRunner) -> AppResult<Outcome> {
    let basis = cfg.basis()?;
    let p = cfg.sim_params(&basis)?;
    let x = cfg.initial.build(&basis, cfg.seed, "initial")?;
    let scale = nse_l4_scale(&x, &p)?;
    let n_list: Vec<f64> = cfg.nse_limit.multipliers.iter().map(|m| m * scale).collect();
    let r = nse_limit_experiment(&x, &p, &n_list, runner)?;
    let mut t = Table::new(&["n", "l2_error", "i_n", "i_n_bound", "int_one_minus_f", "int_one_minus_f_sq", "sup_l4"]);
    for row in &r.rows {
        t.push_nums(&[row.n, row.l2_error, row.i_n, row.i_n_bound, row.int_one_minus_f, row.int_one_minus_f_sq, row.sup_l4]);
    }
    dir.write_csv("nse_limit.csv", &t)?;
    let assertions = BTreeMap::from([
        ("i_n_bound".to_string(), r.bound_ok),
        ("cutoff_defect_monotone".to_string(), r.cutoff_monotone),
        ("error_monotone".to_string(), r.error_monotone),
        ("exact_at_largest_n".to_string(), r.exact_at_largest),
    ]);
    let results = json!({
        "params": params_json(&p),
        "l4_scale": scale,
        "k_t": r.k_t,
        "ladyzhenskaya_observed": r.ladyzhenskaya_observed,
        "c_l": r.c_l,
        "nse_sup_l4": r.nse_sup_l4,
    });
    Ok(Outcome { assertions, insufficient_horizon: false, results })
}

/// `units / (νλ)` rounded up to the dt grid.
fn on_grid(units: f64, p: &SimParams) -> f64 {
    let t = units / (p.nu * p.lambda_p);
    (t / p.dt - 1e-9).ceil() * p.dt
}

fn run_measure(cfg: &RunConfig, dir: &mut OutputDir, runner: &RayonRunner) -> AppResult<Outcome> {
    let basis = cfg.basis()?;
    let p = cfg.sim_params(&basis)?;
    let m = &cfg.measure;
    let mc = MeasureConfig {
        observables: Observable::DEFAULT.to_vec(),
        burn_in: on_grid(m.burn_in, &p),
        horizon: on_grid(m.horizon, &p),
        sample_every: m.sample_every,
        batches: m.batches,
        root_seed: cfg.seed,
        strict: cfg.mode == Mode::Strict,
    };
    let dir_x = unit_direction(cfg, &p, "measure/direction")?;
    let xs: Vec<SpectralField> = m.x_norms.iter().map(|r| dir_x.scale(*r)).collect();
    let r = invariant_measure_sampler(&p, &mc, &xs, runner)?;
    let mut runs = Table::new(&["x_norm", "observable", "mean", "se", "tau", "samples"]);
    for run in &r.runs {
        for s in &run.stats {
            runs.push(vec![
                fmt_f64(run.x_norm),
                s.observable.name().into(),
                fmt_f64(s.mean),
                fmt_f64(s.se),
                fmt_f64(s.tau),
                run.samples.to_string(),
            ]);
        }
    }
    dir.write_csv("measure_runs.csv", &runs)?;
    let mut pairs = Table::new(&["i", "j", "observable", "diff", "combined_se", "ok"]);
    for q in &r.pairs {
        pairs.push(vec![
            q.i.to_string(),
            q.j.to_string(),
            q.observable.name().into(),
            fmt_f64(q.diff),
            fmt_f64(q.combined_se),
            q.ok.to_string(),
        ]);
    }
    dir.write_csv("measure_pairs.csv", &pairs)?;
    let assertions = BTreeMap::from([("time_averages_agree".to_string(), r.pass)]);
    let results = json!({
        "params": params_json(&p),
        "burn_in": r.burn_in,
        "horizon": r.horizon,
        "ensemble_mean": r.ensemble_mean,
        "ensemble_se": r.ensemble_se,
        "linear_oracle_h_sq": r.linear_oracle_h_sq,
    });
    Ok(Outcome { assertions, insufficient_horizon: r.insufficient_horizon, results })
}
