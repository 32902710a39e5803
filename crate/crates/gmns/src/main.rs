use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use gmns::{default_out_dir, exit, parse_config, run_experiment, AppResult, Experiment, Mode, RayonRunner, Registry, RunConfig};

#[derive(Parser)]
#[command(name = "gmns", version, about = "Globally modified stochastic Navier-Stokes experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Property suites for the operators, noise and integrator.
    Check(RunArgs),
    /// One trajectory with its energy ledger.
    Simulate(RunArgs),
    /// Mean-square contraction of two solutions on shared noise.
    Contract(RunArgs),
    /// Pullback absorption and initial-condition independence.
    Pullback(RunArgs),
    /// Convergence to plain Navier-Stokes as the cutoff level grows.
    NseLimit(RunArgs),
    /// Time averages from several initial data.
    Measure(RunArgs),
}

#[derive(Args)]
struct RunArgs {
    /// TOML run configuration; defaults are used when omitted.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Root seed (overrides the config).
    #[arg(long)]
    seed: Option<u64>,
    /// Run directory (overrides the config).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Enforce assertions through the exit code.
    #[arg(long, conflicts_with = "exploratory")]
    strict: bool,
    /// Report assertions without enforcing them.
    #[arg(long)]
    exploratory: bool,
    /// Worker threads (0 = all cores).
    #[arg(long, default_value_t = 0)]
    threads: usize,
    /// Registry file; defaults to `registry.jsonl` next to the run directory.
    #[arg(long)]
    registry: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (experiment, args) = match cli.command {
        Command::Check(a) => (Experiment::Check, a),
        Command::Simulate(a) => (Experiment::Simulate, a),
        Command::Contract(a) => (Experiment::Contract, a),
        Command::Pullback(a) => (Experiment::Pullback, a),
        Command::NseLimit(a) => (Experiment::NseLimit, a),
        Command::Measure(a) => (Experiment::Measure, a),
    };
    match execute(experiment, args) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn execute(experiment: Experiment, args: RunArgs) -> AppResult<i32> {
    let mut cfg = match &args.config {
        Some(path) => parse_config(path)?,
        None => RunConfig::new(experiment),
    };
    if cfg.experiment != experiment {
        return Err(gmns::AppError::config(
            "experiment",
            format!("config is for `{}` but the command is `{}`", cfg.experiment.name(), experiment.name()),
        ));
    }
    if let Some(s) = args.seed {
        cfg.seed = s;
    }
    if args.strict {
        cfg.mode = Mode::Strict;
    }
    if args.exploratory {
        cfg.mode = Mode::Exploratory;
    }
    cfg.validate()?;
    let out = match (&args.out, &cfg.out_dir) {
        (Some(o), _) => o.clone(),
        (None, Some(o)) => PathBuf::from(o),
        (None, None) => default_out_dir(&cfg),
    };
    let registry_path = args.registry.clone().unwrap_or_else(|| {
        out.parent().filter(|p| !p.as_os_str().is_empty()).map(|p| p.join("registry.jsonl")).unwrap_or_else(|| "registry.jsonl".into())
    });
    let registry = Registry::new(registry_path);
    let runner = RayonRunner::new(args.threads);
    let outcome = run_experiment(&cfg, &out, &registry, &runner)?;
    let status = if outcome.pass { "PASS" } else { "FAIL" };
    println!("{} {status} exit={} out={}", experiment.name(), outcome.exit_code, outcome.out_dir.display());
    if let Some(failed) = outcome.summary["report"]["failed"].as_array() {
        for f in failed {
            println!("  failed: {}", f.as_str().unwrap_or_default());
        }
    }
    if let Some(err) = outcome.summary["report"]["error"].as_str() {
        println!("  error: {err}");
    }
    if !outcome.diverged_from.is_empty() {
        eprintln!("warning: outputs differ from earlier runs of the same config: {:?}", outcome.diverged_from);
    }
    if outcome.exit_code == exit::HORIZON {
        eprintln!("warning: autocorrelation time too long for the sampling horizon");
    }
    Ok(outcome.exit_code)
}
