//! TOML run configuration.

use std::path::Path;
use std::sync::Arc;

use gmns_core::integrator::SimParams;
use gmns_core::noise::{derive_seed, rng_from, NoiseSpectrum, OuScheme};
use gmns_core::spectral::{build_basis, GalerkinBasis, SpectralField, WaveVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{AppError, AppResult};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Experiment {
    Check,
    Simulate,
    Contract,
    Pullback,
    NseLimit,
    Measure,
}

impl Experiment {
    pub fn name(&self) -> &'static str {
        match self {
            Experiment::Check => "check",
            Experiment::Simulate => "simulate",
            Experiment::Contract => "contract",
            Experiment::Pullback => "pullback",
            Experiment::NseLimit => "nse-limit",
            Experiment::Measure => "measure",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    #[default]
    Strict,
    Exploratory,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ParamsConfig {
    pub nu: f64,
    /// `inf` disables the cutoff.
    pub n_cutoff: f64,
    pub chi: f64,
    pub dt: f64,
    pub t_end: f64,
    pub kmax: u32,
    /// Defaults to `dt`.
    pub dt_path: Option<f64>,
    pub ou_scheme: OuScheme,
    pub ceiling_factor: f64,
}

impl Default for ParamsConfig {
    fn default() -> Self {
        Self {
            nu: 1.0,
            n_cutoff: 1.0,
            chi: 0.0,
            dt: 1.0 / 256.0,
            t_end: 8.0,
            kmax: 2,
            dt_path: None,
            ou_scheme: OuScheme::PiecewiseLinear,
            ceiling_factor: 1e6,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NoiseConfig {
    pub s: f64,
    /// 0 switches the noise off.
    pub amplitude: f64,
    pub delta: f64,
    pub allow_low_regularity: bool,
}

impl Default for NoiseConfig {
    fn default() -> Self {
        let d = NoiseSpectrum::default();
        Self { s: d.s, amplitude: d.amplitude, delta: d.delta, allow_low_regularity: d.allow_low_regularity }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FieldKind {
    #[default]
    Zero,
    /// Gaussian coefficients with amplitude |k|^{-decay}, scaled to `magnitude` in H.
    Random,
    /// One Fourier mode `k` with polarization `pol` and H-norm `magnitude`.
    SingleMode,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FieldSpec {
    pub kind: FieldKind,
    pub magnitude: f64,
    pub decay: f64,
    /// Seed label; fields with the same label and run seed coincide.
    pub label: String,
    pub k: [i32; 3],
    pub pol: usize,
}

impl Default for FieldSpec {
    fn default() -> Self {
        Self { kind: FieldKind::Zero, magnitude: 1.0, decay: 2.0, label: String::new(), k: [1, 0, 0], pol: 0 }
    }
}

impl FieldSpec {
    pub fn random(magnitude: f64, decay: f64, label: &str) -> Self {
        Self { kind: FieldKind::Random, magnitude, decay, label: label.into(), ..Self::default() }
    }

    /// Build the field on `basis`; `fallback_label` is used when `label` is empty.
    pub fn build(&self, basis: &Arc<GalerkinBasis>, seed: u64, fallback_label: &str) -> AppResult<SpectralField> {
        let label = if self.label.is_empty() { fallback_label } else { &self.label };
        let f = match self.kind {
            FieldKind::Zero => SpectralField::zeros(basis),
            FieldKind::Random => {
                let mut rng = rng_from(derive_seed(seed, &format!("field/{label}")), "field");
                SpectralField::random(basis, self.decay, &mut rng).scale(self.magnitude)
            }
            FieldKind::SingleMode => {
                SpectralField::single_mode(basis, WaveVector(self.k), self.pol, Complex64::new(self.magnitude, 0.0))
                    .map_err(|e| AppError::config(format!("{fallback_label}.k"), e.to_string()))?
            }
        };
        Ok(f)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimulateConfig {
    pub record_every: u64,
    pub track_bounds: bool,
}

impl Default for SimulateConfig {
    fn default() -> Self {
        Self { record_every: 1, track_bounds: true }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ContractConfig {
    pub second: FieldSpec,
    pub output_every: u64,
}

impl Default for ContractConfig {
    fn default() -> Self {
        Self { second: FieldSpec::random(2.0, 1.0, "second"), output_every: 16 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PullbackConfig {
    /// Pullback times t_m, on the dt grid.
    pub times: Vec<f64>,
    pub x_norms: Vec<f64>,
    /// Radii must agree across x_norms for t_m at or beyond this.
    pub agreement_from: f64,
    pub tolerance: f64,
}

impl Default for PullbackConfig {
    fn default() -> Self {
        Self {
            times: vec![1.0, 2.0, 4.0, 8.0, 16.0, 32.0],
            x_norms: vec![1.0, 100.0],
            agreement_from: 30.0,
            tolerance: 1e-6,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NseLimitConfig {
    /// Cutoff levels as multiples of sup_t ‖u*(t)‖_{L⁴}.
    pub multipliers: Vec<f64>,
}

impl Default for NseLimitConfig {
    fn default() -> Self {
        Self { multipliers: vec![0.25, 0.5, 1.0, 2.0, 4.0, 8.0] }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MeasureSection {
    /// In units of 1/(νλ).
    pub burn_in: f64,
    /// In units of 1/(νλ).
    pub horizon: f64,
    pub x_norms: Vec<f64>,
    pub sample_every: u64,
    pub batches: usize,
}

impl Default for MeasureSection {
    fn default() -> Self {
        Self { burn_in: 5.0, horizon: 200.0, x_norms: vec![0.0, 10.0], sample_every: 4, batches: 20 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Suite {
    Cutoff,
    Trilinear,
    Monotonicity,
    EnergyOrder,
    ChiOrder,
    OuStationarity,
    ShiftCovariance,
}

impl Suite {
    pub const ALL: [Suite; 7] = [
        Suite::Cutoff,
        Suite::Trilinear,
        Suite::Monotonicity,
        Suite::EnergyOrder,
        Suite::ChiOrder,
        Suite::OuStationarity,
        Suite::ShiftCovariance,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Suite::Cutoff => "cutoff",
            Suite::Trilinear => "trilinear",
            Suite::Monotonicity => "monotonicity",
            Suite::EnergyOrder => "energy-order",
            Suite::ChiOrder => "chi-order",
            Suite::OuStationarity => "ou-stationarity",
            Suite::ShiftCovariance => "shift-covariance",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CheckConfig {
    pub suites: Vec<Suite>,
    pub cutoff_pairs: usize,
    pub trilinear_triples: usize,
    pub monotonicity_triples: usize,
    pub ou_samples: usize,
    pub shift_pairs: usize,
    /// Fuzz rows kept per suite in the CSV (all violations are always kept).
    pub csv_rows: usize,
}

impl Default for CheckConfig {
    fn default() -> Self {
        Self {
            suites: Suite::ALL.to_vec(),
            cutoff_pairs: 10_000,
            trilinear_triples: 1000,
            monotonicity_triples: 1000,
            ou_samples: 100_000,
            shift_pairs: 100,
            csv_rows: usize::MAX,
        }
    }
}

/// One run: experiment, parameters, data and seed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub experiment: Experiment,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub mode: Mode,
    #[serde(default = "default_ensemble")]
    pub ensemble: usize,
    /// Not part of the config hash and not written back out.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out_dir: Option<String>,
    #[serde(default)]
    pub params: ParamsConfig,
    #[serde(default)]
    pub noise: NoiseConfig,
    #[serde(default)]
    pub forcing: FieldSpec,
    #[serde(default = "default_initial")]
    pub initial: FieldSpec,
    #[serde(default)]
    pub simulate: SimulateConfig,
    #[serde(default)]
    pub contract: ContractConfig,
    #[serde(default)]
    pub pullback: PullbackConfig,
    #[serde(default)]
    pub nse_limit: NseLimitConfig,
    #[serde(default)]
    pub measure: MeasureSection,
    #[serde(default)]
    pub check: CheckConfig,
}

fn default_ensemble() -> usize {
    64
}

fn default_initial() -> FieldSpec {
    FieldSpec::random(1.0, 1.0, "initial")
}

impl RunConfig {
    /// Defaults for `experiment`.
    pub fn new(experiment: Experiment) -> Self {
        Self {
            experiment,
            seed: 0,
            mode: Mode::Strict,
            ensemble: default_ensemble(),
            out_dir: None,
            params: ParamsConfig::default(),
            noise: NoiseConfig::default(),
            forcing: FieldSpec::default(),
            initial: default_initial(),
            simulate: SimulateConfig::default(),
            contract: ContractConfig::default(),
            pullback: PullbackConfig::default(),
            nse_limit: NseLimitConfig::default(),
            measure: MeasureSection::default(),
            check: CheckConfig::default(),
        }
    }

    pub fn from_toml_str(text: &str) -> AppResult<Self> {
        let cfg: RunConfig = toml::from_str(text).map_err(|e| {
            let field = e.span().map(|s| text[s].trim().to_string()).unwrap_or_else(|| "<document>".into());
            AppError::config(field, e.message().to_string())
        })?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_toml_string(&self) -> String {
        let mut c = self.clone();
        c.out_dir = None;
        toml::to_string(&c).expect("config serializes")
    }

    /// SHA-256 of the canonical serialization, in hex.
    pub fn hash(&self) -> String {
        use sha2::{Digest, Sha256};
        hex::encode(Sha256::digest(self.to_toml_string().as_bytes()))
    }

    pub fn noise_spectrum(&self) -> NoiseSpectrum {
        NoiseSpectrum {
            s: self.noise.s,
            amplitude: self.noise.amplitude,
            delta: self.noise.delta,
            allow_low_regularity: self.noise.allow_low_regularity,
        }
    }

    pub fn basis(&self) -> AppResult<Arc<GalerkinBasis>> {
        build_basis(self.params.kmax)
            .map(Arc::new)
            .map_err(|e| AppError::config("params.kmax", e.to_string()))
    }

    /// Simulation parameters on `basis`, validated.
    pub fn sim_params(&self, basis: &Arc<GalerkinBasis>) -> AppResult<SimParams> {
        let p = &self.params;
        let forcing = self.forcing.build(basis, self.seed, "forcing")?;
        let sp = SimParams {
            nu: p.nu,
            n_cutoff: if p.n_cutoff.is_infinite() && p.n_cutoff > 0.0 { None } else { Some(p.n_cutoff) },
            chi: p.chi,
            lambda_p: basis.lambda_min(),
            forcing,
            dt: p.dt,
            t_end: p.t_end,
            kmax: p.kmax,
            noise: self.noise_spectrum(),
            dt_path: p.dt_path.unwrap_or(p.dt),
            ou_scheme: p.ou_scheme,
            ceiling_factor: p.ceiling_factor,
        };
        sp.validate().map_err(config_error)?;
        Ok(sp)
    }

    /// Cross-field checks.
    pub fn validate(&self) -> AppResult<()> {
        let basis = self.basis()?;
        let p = self.sim_params(&basis)?;
        if self.ensemble == 0 {
            return Err(AppError::config("ensemble", "must be positive"));
        }
        let threshold = gmns_core::experiments::stability_threshold(p.n(), p.lambda_p);
        let needs_threshold = matches!(self.experiment, Experiment::Contract | Experiment::Measure);
        if needs_threshold && self.mode == Mode::Strict && !(p.nu > threshold) {
            return Err(AppError::config(
                "params.nu",
                format!("nu = {} must exceed the stability threshold {threshold} in strict mode", p.nu),
            ));
        }
        let positive = |name: &str, v: &[f64]| -> AppResult<()> {
            if v.is_empty() || v.iter().any(|x| !(x.is_finite() && *x >= 0.0)) {
                return Err(AppError::config(name, "must be a nonempty list of finite nonnegative numbers"));
            }
            Ok(())
        };
        match self.experiment {
            Experiment::Pullback => {
                positive("pullback.times", &self.pullback.times)?;
                positive("pullback.x_norms", &self.pullback.x_norms)?;
                if self.pullback.times.windows(2).any(|w| !(w[0] < w[1])) || self.pullback.times[0] <= 0.0 {
                    return Err(AppError::config("pullback.times", "must be positive and strictly increasing"));
                }
                if p.n_cutoff.is_none() {
                    return Err(AppError::config("params.n_cutoff", "the absorbing-radius bound needs a finite cutoff"));
                }
            }
            Experiment::NseLimit => {
                positive("nse_limit.multipliers", &self.nse_limit.multipliers)?;
                if self.nse_limit.multipliers.windows(2).any(|w| !(w[0] < w[1])) || self.nse_limit.multipliers[0] <= 0.0 {
                    return Err(AppError::config("nse_limit.multipliers", "must be positive and strictly increasing"));
                }
            }
            Experiment::Measure => {
                positive("measure.x_norms", &self.measure.x_norms)?;
                if !(self.measure.burn_in >= 5.0) {
                    return Err(AppError::config("measure.burn_in", "must be at least 5 (units of 1/(nu lambda))"));
                }
                if !(self.measure.horizon > 0.0) || self.measure.sample_every == 0 || self.measure.batches < 2 {
                    return Err(AppError::config("measure", "horizon, sample_every and batches must be positive"));
                }
            }
            Experiment::Contract => {
                if self.contract.output_every == 0 {
                    return Err(AppError::config("contract.output_every", "must be positive"));
                }
            }
            Experiment::Simulate => {
                if self.simulate.record_every == 0 {
                    return Err(AppError::config("simulate.record_every", "must be positive"));
                }
            }
            Experiment::Check => {}
        }
        Ok(())
    }
}

/// Read and validate a config file.
pub fn parse_config(path: &Path) -> AppResult<RunConfig> {
    let text = std::fs::read_to_string(path).map_err(|e| AppError::io(path, e))?;
    RunConfig::from_toml_str(&text)
}

fn config_error(e: gmns_core::Error) -> AppError {
    match e {
        gmns_core::Error::InvalidParameter { name, reason } => {
            let field = match name {
                "s" | "amplitude" | "delta" => format!("noise.{name}"),
                "N" => "params.n_cutoff".into(),
                "T" => "params.t_end".into(),
                other => format!("params.{other}"),
            };
            AppError::config(field, reason)
        }
        gmns_core::Error::OffGrid { t, spacing } => {
            AppError::config("params.t_end", format!("t = {t} is not a multiple of dt = {spacing}"))
        }
        other => AppError::config("params", other.to_string()),
    }
}
