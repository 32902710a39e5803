use std::path::Path;
use std::process::Command;

use gmns::config::FieldSpec;
use gmns::io::{load_checkpoint, save_checkpoint, Checkpoint};
use gmns::output::fmt_f64;
use gmns::{exit, run_experiment, AppError, Experiment, Mode, RayonRunner, Registry, RunConfig};
use gmns_core::integrator::{solve_from, solve_velocity, SolveOptions};
use gmns_core::noise::{make_path, OuScheme};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_gmns"))
}

fn config_err(text: &str) -> (String, String) {
    match RunConfig::from_toml_str(text) {
        Err(AppError::Config { field, reason }) => (field, reason),
        other => panic!("expected a config error, got {other:?}"),
    }
}

fn write(dir: &Path, name: &str, text: &str) -> std::path::PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p
}

#[test]
fn minimal_config_fills_defaults() {
    let c = RunConfig::from_toml_str("experiment = \"simulate\"").unwrap();
    assert_eq!(c.params.kmax, 2);
    assert_eq!(c.params.dt, 1.0 / 256.0);
    assert_eq!(c.params.chi, 0.0);
    assert_eq!(c.noise.s, 1.0);
    assert_eq!(c.mode, Mode::Strict);
    assert_eq!(c.ensemble, 64);
    let b = c.basis().unwrap();
    let p = c.sim_params(&b).unwrap();
    assert_eq!(p.dt_path, p.dt);
    assert_eq!(p.ou_scheme, OuScheme::PiecewiseLinear);
}

#[test]
fn config_roundtrip() {
    let text = "experiment = \"nse-limit\"\nseed = 9\nout_dir = \"x\"\n[params]\nn_cutoff = inf\nkmax = 1\n[initial]\nkind = \"single-mode\"\nk = [0, 1, 1]\nmagnitude = 2.5\n";
    let c = RunConfig::from_toml_str(text).unwrap();
    assert_eq!(c.out_dir.as_deref(), Some("x"));
    assert!(c.params.n_cutoff.is_infinite());
    let b = c.basis().unwrap();
    assert_eq!(c.sim_params(&b).unwrap().n_cutoff, None);
    let back = RunConfig::from_toml_str(&c.to_toml_string()).unwrap();
    let mut want = c.clone();
    want.out_dir = None;
    assert_eq!(back, want);
    // The output directory does not enter the hash.
    assert_eq!(back.hash(), c.hash());
    let mut other = c.clone();
    other.seed = 10;
    assert_ne!(other.hash(), c.hash());
    let x = c.initial.build(&b, c.seed, "initial").unwrap();
    assert!((x.norm_h() - 2.5).abs() < 1e-15);
}

#[test]
fn dt_off_path_grid_names_both_values() {
    let (field, reason) = config_err("experiment = \"simulate\"\n[params]\ndt = 0.00390625\ndt_path = 0.003\n");
    assert_eq!(field, "params.dt");
    assert!(reason.contains("0.00390625") && reason.contains("0.003"), "{reason}");
}

#[test]
fn low_regularity_rejected() {
    let (field, reason) = config_err("experiment = \"simulate\"\n[noise]\ns = 0.5\n");
    assert_eq!(field, "noise.s");
    assert!(reason.contains("s > 3/4"), "{reason}");
    assert!(RunConfig::from_toml_str("experiment = \"simulate\"\n[noise]\ns = 0.5\nallow_low_regularity = true\n").is_ok());
}

#[test]
fn structural_errors_name_the_field() {
    let (field, _) = config_err("experiment = \"simulate\"\n[params]\nviscosity = 1.0\n");
    assert!(field.contains("viscosity"), "{field}");
    let (field, _) = config_err("experiment = \"simulate\"\n[params]\nnu = -1.0\n");
    assert_eq!(field, "params.nu");
    let (field, _) = config_err("experiment = \"simulate\"\n[params]\nkmax = 0\n");
    assert_eq!(field, "params.kmax");
    let (field, _) = config_err("experiment = \"simulate\"\n[params]\nt_end = 0.001\n");
    assert_eq!(field, "params.t_end");
    let (field, _) = config_err("experiment = \"measure\"\n[params]\nnu = 4.0\n[measure]\nburn_in = 1.0\n");
    assert_eq!(field, "measure.burn_in");
    let (field, _) = config_err("experiment = \"pullback\"\n[pullback]\ntimes = [2.0, 1.0]\n");
    assert_eq!(field, "pullback.times");
}

#[test]
fn threshold_enforced_in_strict_mode() {
    let (field, reason) = config_err("experiment = \"contract\"\n[params]\nnu = 1.0\n");
    assert_eq!(field, "params.nu");
    assert!(reason.contains("threshold"));
    assert!(RunConfig::from_toml_str("experiment = \"contract\"\nmode = \"exploratory\"\n[params]\nnu = 1.0\n").is_ok());
    assert!(RunConfig::from_toml_str("experiment = \"contract\"\n[params]\nnu = 2.0\n").is_ok());
}

#[test]
fn csv_numbers_have_17_digits() {
    assert_eq!(fmt_f64(0.1), "1.0000000000000001e-1");
    for x in [0.1, 1.0 / 3.0, -2.5e-300, 6.02e23] {
        assert_eq!(fmt_f64(x).parse::<f64>().unwrap(), x);
    }
}

#[test]
fn checkpoint_resume_is_exact() {
    let mut c = RunConfig::new(Experiment::Simulate);
    c.params.t_end = 2.0;
    c.params.dt = 1.0 / 64.0;
    c.forcing = FieldSpec::random(1.0, 2.0, "forcing");
    let b = c.basis().unwrap();
    let p = c.sim_params(&b).unwrap();
    let x = c.initial.build(&b, c.seed, "initial").unwrap();
    let path = make_path(4, p.dt_path, 0.0, 2.0 + p.dt_path, p.noise, &b).unwrap();
    let opts = SolveOptions { record_every: u64::MAX, keep_states: false, track_bounds: false };
    let full = solve_velocity(&x, &path, &p, opts).unwrap();
    let mut half = p.clone();
    half.t_end = 1.0;
    let first = solve_velocity(&x, &path, &half, opts).unwrap();

    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("ck.json");
    save_checkpoint(&file, &Checkpoint::new(&p, &path, &first.final_state)).unwrap();
    let (p2, path2, st) = load_checkpoint(&file).unwrap().restore().unwrap();
    assert_eq!(p2, p);
    let rest = solve_from(st, &path2, &p2, 64, opts).unwrap();
    assert_eq!(rest.final_state.v, full.final_state.v);
    assert_eq!(rest.final_state.z.z, full.final_state.z.z);
}

#[test]
fn registry_detects_divergence() {
    let dir = tempfile::tempdir().unwrap();
    let reg = Registry::new(dir.path().join("registry.jsonl"));
    let runner = RayonRunner::new(2);
    let mut c = RunConfig::new(Experiment::Simulate);
    c.params.t_end = 0.25;
    let a = run_experiment(&c, &dir.path().join("a"), &reg, &runner).unwrap();
    let b = run_experiment(&c, &dir.path().join("b"), &reg, &runner).unwrap();
    assert_eq!(a.exit_code, exit::OK);
    assert_eq!(a.content_hash, b.content_hash);
    assert!(b.diverged_from.is_empty());

    // Forge an earlier record of the same config with different outputs.
    let mut forged = reg.records().unwrap()[0].clone();
    forged.content_hash = "0".repeat(64);
    reg.append(&forged).unwrap();
    let d = run_experiment(&c, &dir.path().join("d"), &reg, &runner).unwrap();
    assert_eq!(d.diverged_from, vec!["0".repeat(64)]);
    assert_eq!(d.exit_code, exit::ASSERTION);
    assert_eq!(reg.records().unwrap().len(), 4);
}

#[test]
fn cli_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();

    let bad = write(d, "bad.toml", "experiment = \"simulate\"\n[noise]\ns = 0.5\n");
    let out = bin().args(["simulate", "--config"]).arg(&bad).output().unwrap();
    assert_eq!(out.status.code(), Some(exit::CONFIG));
    assert!(String::from_utf8_lossy(&out.stderr).contains("noise.s"));

    let wrong = write(d, "wrong.toml", "experiment = \"simulate\"\n");
    let out = bin().args(["pullback", "--config"]).arg(&wrong).output().unwrap();
    assert_eq!(out.status.code(), Some(exit::CONFIG));

    let ok = write(d, "ok.toml", "experiment = \"simulate\"\n[params]\nt_end = 0.25\n");
    let out = bin().args(["simulate", "--threads", "1", "--config"]).arg(&ok).arg("--out").arg(d.join("ok")).output().unwrap();
    assert_eq!(out.status.code(), Some(exit::OK), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(d.join("ok/config.toml").exists() && d.join("ok/ledger.csv").exists() && d.join("registry.jsonl").exists());
    let written = std::fs::read_to_string(d.join("ok/config.toml")).unwrap();
    assert_eq!(RunConfig::from_toml_str(&written).unwrap(), RunConfig::from_toml_str(&std::fs::read_to_string(&ok).unwrap()).unwrap());

    // Pullback radii cannot agree to zero tolerance after a short time.
    let fail = write(
        d,
        "fail.toml",
        "experiment = \"pullback\"\n[params]\nnu = 4.0\ndt = 0.015625\n[pullback]\ntimes = [0.25, 0.5]\nx_norms = [1.0, 50.0]\nagreement_from = 0.25\ntolerance = 0.0\n",
    );
    let out = bin().args(["pullback", "--config"]).arg(&fail).arg("--out").arg(d.join("fail")).output().unwrap();
    assert_eq!(out.status.code(), Some(exit::ASSERTION));
    let summary: serde_json::Value = serde_json::from_slice(&std::fs::read(d.join("fail/summary.json")).unwrap()).unwrap();
    assert_eq!(summary["report"]["failed"][0], "initial_condition_independence");
    let out = bin().args(["pullback", "--exploratory", "--config"]).arg(&fail).arg("--out").arg(d.join("fail2")).output().unwrap();
    assert_eq!(out.status.code(), Some(exit::OK));

    let blow = write(
        d,
        "blow.toml",
        "experiment = \"simulate\"\n[params]\nt_end = 1.0\nceiling_factor = 1.01\n[initial]\nkind = \"zero\"\n[forcing]\nkind = \"random\"\nmagnitude = 100.0\n",
    );
    let out = bin().args(["simulate", "--config"]).arg(&blow).arg("--out").arg(d.join("blow")).output().unwrap();
    assert_eq!(out.status.code(), Some(exit::INSTABILITY));

    let short = write(
        d,
        "short.toml",
        "experiment = \"measure\"\n[params]\nnu = 4.0\ndt = 0.015625\n[measure]\nhorizon = 1.0\nsample_every = 1\nbatches = 4\nx_norms = [0.0, 0.0]\n",
    );
    let out = bin().args(["measure", "--config"]).arg(&short).arg("--out").arg(d.join("short")).output().unwrap();
    assert_eq!(out.status.code(), Some(exit::HORIZON), "{}", String::from_utf8_lossy(&out.stdout));

    let blocker = write(d, "file", "");
    let out = bin().args(["simulate", "--config"]).arg(&ok).arg("--out").arg(blocker.join("sub")).output().unwrap();
    assert_eq!(out.status.code(), Some(exit::IO));
}
