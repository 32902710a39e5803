//! Property suites behind the `check` command.

use std::sync::Arc;

use gmns_core::experiments::stats::{mean, std_error};
use gmns_core::experiments::EnsembleRunner;
use gmns_core::integrator::{chi_independence_series, solve_velocity, SimParams, SolveOptions};
use gmns_core::noise::{
    derive_seed, make_path, ou_evolve, ou_expected_energy, ou_shift_covariance_check, rng_from, NoiseSpectrum, OuScheme,
    OuState,
};
use gmns_core::operators::{
    cutoff_lipschitz_check, cutoff_product_bound, monotonicity_gap, monotonicity_tolerance, CutoffParams, LipschitzCase,
};
use gmns_core::spectral::{norm_l4, trilinear_b, GalerkinBasis, SpectralField};
use rand_distr::{Distribution, Uniform};
use serde::Serialize;
use serde_json::json;

use crate::config::{CheckConfig, Suite};
use crate::error::AppResult;

/// Tolerance of the cutoff inequalities.
pub const CUTOFF_TOL: f64 = 1e-14;
/// Relative tolerance of the trilinear identities.
pub const TRILINEAR_TOL: f64 = 1e-12;
/// (ν, N) grid of the monotonicity suite.
pub const MONOTONICITY_GRID: [f64; 3] = [0.5, 1.0, 2.0];
/// Refinement ratios must lie within this fraction of 4.
pub const ORDER_BAND: f64 = 0.2;
/// Relative χ-difference allowed at the finest step.
pub const CHI_REL_TOL: f64 = 1e-6;
/// χ values of the OU energy check.
pub const OU_CHI_LIST: [f64; 4] = [0.0, 1.0, 10.0, 100.0];
/// Allowed deviation in standard errors for sampled moments.
pub const OU_SE_BAND: f64 = 5.0;
pub const SHIFT_TOL: f64 = 1e-12;

/// One row of fuzz output: `margin >= 0` means the trial passed.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FuzzRow {
    pub suite: &'static str,
    pub case: String,
    pub seed: u64,
    pub lhs: f64,
    pub rhs: f64,
    pub margin: f64,
}

impl FuzzRow {
    fn new(suite: Suite, case: impl Into<String>, seed: u64, lhs: f64, rhs: f64, margin: f64) -> Self {
        Self { suite: suite.name(), case: case.into(), seed, lhs, rhs, margin }
    }

    pub fn ok(&self) -> bool {
        self.margin >= 0.0
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct SuiteReport {
    pub suite: &'static str,
    pub trials: usize,
    pub violations: usize,
    /// Smallest margin over all rows.
    pub worst_margin: f64,
    pub pass: bool,
    pub details: serde_json::Value,
    #[serde(skip)]
    pub rows: Vec<FuzzRow>,
}

impl SuiteReport {
    fn from_rows(suite: Suite, trials: usize, rows: Vec<FuzzRow>, extra_ok: bool, details: serde_json::Value) -> Self {
        let violations = rows.iter().filter(|r| !r.ok()).count();
        let worst_margin = rows.iter().map(|r| r.margin).fold(f64::INFINITY, f64::min);
        Self { suite: suite.name(), trials, violations, worst_margin, pass: violations == 0 && extra_ok, details, rows }
    }
}

/// Everything a suite needs besides its own constants.
pub struct CheckContext<'a, R> {
    pub params: &'a SimParams,
    pub seed: u64,
    pub config: &'a CheckConfig,
    pub runner: &'a R,
}

pub fn run_suite<R: EnsembleRunner + Sync>(suite: Suite, cx: &CheckContext<'_, R>) -> AppResult<SuiteReport> {
    match suite {
        Suite::Cutoff => cutoff_suite(cx),
        Suite::Trilinear => trilinear_suite(cx),
        Suite::Monotonicity => monotonicity_suite(cx),
        Suite::EnergyOrder => energy_order_suite(cx),
        Suite::ChiOrder => chi_order_suite(cx),
        Suite::OuStationarity => ou_stationarity_suite(cx),
        Suite::ShiftCovariance => shift_covariance_suite(cx),
    }
}

fn trial_seed(root: u64, suite: Suite, i: usize) -> u64 {
    derive_seed(root, &format!("check/{}/{i}", suite.name()))
}

fn log_uniform<R: rand_core::RngCore>(lo: f64, hi: f64, rng: &mut R) -> f64 {
    10f64.powf(Uniform::new(lo, hi).unwrap().sample(rng))
}

fn case_name(c: LipschitzCase) -> &'static str {
    match c {
        LipschitzCase::BothBelow => "both-below",
        LipschitzCase::FirstBelow => "first-below",
        LipschitzCase::SecondBelow => "second-below",
        LipschitzCase::BothAbove => "both-above",
    }
}

const CASES: [LipschitzCase; 4] =
    [LipschitzCase::BothBelow, LipschitzCase::FirstBelow, LipschitzCase::SecondBelow, LipschitzCase::BothAbove];

/// Cutoff range and Lipschitz bounds, stratified so each of the four norm
/// orderings gets a quarter of the pairs.
fn cutoff_suite<R: EnsembleRunner + Sync>(cx: &CheckContext<'_, R>) -> AppResult<SuiteReport> {
    let b = cx.params.basis().clone();
    let n_pairs = cx.config.cutoff_pairs;
    let res: Vec<(LipschitzCase, bool, [FuzzRow; 2])> = cx.runner.map(n_pairs, |i| {
        let seed = trial_seed(cx.seed, Suite::Cutoff, i);
        let mut rng = rng_from(seed, "trial");
        let unit = Uniform::new(0.05, 1.0).unwrap();
        let mut u = SpectralField::random(&b, 2.0, &mut rng).scale(log_uniform(-1.0, 1.5, &mut rng));
        let mut v = if i % 8 < 4 {
            SpectralField::random(&b, 2.0, &mut rng).scale(log_uniform(-1.0, 1.5, &mut rng))
        } else {
            // Nearby pair: the Lipschitz bound is tight only for small differences.
            let w = SpectralField::random(&b, 2.0, &mut rng).scale(u.norm_h() * log_uniform(-6.0, 0.0, &mut rng));
            &u + &w
        };
        let target = CASES[i % 4];
        let (mut ru, mut rv) = (norm_l4(&u), norm_l4(&v));
        let wrong_order = match target {
            LipschitzCase::FirstBelow => ru > rv,
            LipschitzCase::SecondBelow => ru < rv,
            _ => false,
        };
        if wrong_order {
            std::mem::swap(&mut u, &mut v);
            std::mem::swap(&mut ru, &mut rv);
        }
        let (lo, hi) = (ru.min(rv), ru.max(rv));
        let n = match target {
            LipschitzCase::BothBelow => hi / unit.sample(&mut rng),
            LipschitzCase::BothAbove => lo * unit.sample(&mut rng),
            _ => lo + (hi - lo) * unit.sample(&mut rng),
        };
        let case = LipschitzCase::classify(ru, rv, n);
        let fn1 = cutoff_product_bound(&u, n).expect("positive N");
        let (l, r) = cutoff_lipschitz_check(&u, &v, n).expect("same basis");
        let name = case_name(case);
        let rows = [
            FuzzRow::new(Suite::Cutoff, format!("fn1/{name}"), seed, fn1, n, n * (1.0 + CUTOFF_TOL) - fn1),
            FuzzRow::new(Suite::Cutoff, format!("fn2/{name}"), seed, l, r, r + CUTOFF_TOL - l),
        ];
        (case, case == target, rows)
    });
    let mut counts = [0usize; 4];
    let mut on_target = true;
    let mut rows = Vec::with_capacity(2 * n_pairs);
    for (case, hit, r) in res {
        counts[CASES.iter().position(|c| *c == case).unwrap()] += 1;
        on_target &= hit;
        rows.extend(r);
    }
    let all_cases = n_pairs < 4 || counts.iter().all(|c| *c > 0);
    let details = json!({
        "tolerance": CUTOFF_TOL,
        "case_counts": CASES.iter().zip(counts).map(|(c, k)| (case_name(*c), k)).collect::<std::collections::BTreeMap<_, _>>(),
        "stratified": on_target,
    });
    Ok(SuiteReport::from_rows(Suite::Cutoff, n_pairs, rows, all_cases && on_target, details))
}

/// b(u, v, v) = 0 and b(u, v, w) = −b(u, w, v).
fn trilinear_suite<R: EnsembleRunner + Sync>(cx: &CheckContext<'_, R>) -> AppResult<SuiteReport> {
    let b = cx.params.basis().clone();
    let n = cx.config.trilinear_triples;
    let res: Vec<[FuzzRow; 2]> = cx.runner.map(n, |i| {
        let seed = trial_seed(cx.seed, Suite::Trilinear, i);
        let mut rng = rng_from(seed, "trial");
        let draw = |rng: &mut _| {
            let decay = Uniform::new(0.0, 3.0).unwrap().sample(rng);
            SpectralField::random(&b, decay, rng).scale(log_uniform(-1.0, 2.0, rng))
        };
        let (u, v, w) = (draw(&mut rng), draw(&mut rng), draw(&mut rng));
        let bvv = trilinear_b(&u, &v, &v).expect("same basis").abs();
        let bound = TRILINEAR_TOL * u.norm_v() * v.norm_v_sq();
        let anti = (trilinear_b(&u, &v, &w).unwrap() + trilinear_b(&u, &w, &v).unwrap()).abs();
        let anti_bound = TRILINEAR_TOL * u.norm_v() * v.norm_v() * w.norm_v();
        [
            FuzzRow::new(Suite::Trilinear, "b(u,v,v)", seed, bvv, bound, bound - bvv),
            FuzzRow::new(Suite::Trilinear, "antisymmetry", seed, anti, anti_bound, anti_bound - anti),
        ]
    });
    let rows = res.into_iter().flatten().collect();
    Ok(SuiteReport::from_rows(Suite::Trilinear, n, rows, true, json!({ "relative_tolerance": TRILINEAR_TOL })))
}

/// ⟨G_N(v₁) − G_N(v₂), v₁ − v₂⟩ + η‖v₁ − v₂‖² ≥ (ν/2)‖v₁ − v₂‖²_V over a (ν, N) grid.
fn monotonicity_suite<R: EnsembleRunner + Sync>(cx: &CheckContext<'_, R>) -> AppResult<SuiteReport> {
    let b = cx.params.basis().clone();
    let per = cx.config.monotonicity_triples;
    let mut rows = Vec::new();
    for (gi, (nu, n)) in MONOTONICITY_GRID.iter().flat_map(|nu| MONOTONICITY_GRID.iter().map(move |n| (*nu, *n))).enumerate()
    {
        let p = CutoffParams::new(n, nu)?;
        let res: Vec<FuzzRow> = cx.runner.map(per, |i| {
            let seed = trial_seed(cx.seed, Suite::Monotonicity, gi * per + i);
            let mut rng = rng_from(seed, "trial");
            let v1 = SpectralField::random(&b, 2.0, &mut rng).scale(log_uniform(-1.0, 1.5, &mut rng));
            let v2 = if i % 2 == 0 {
                SpectralField::random(&b, 2.0, &mut rng).scale(log_uniform(-1.0, 1.5, &mut rng))
            } else {
                let w = SpectralField::random(&b, 2.0, &mut rng).scale(v1.norm_h() * log_uniform(-4.0, 0.0, &mut rng));
                &v1 + &w
            };
            let z = SpectralField::random(&b, 2.0, &mut rng).scale(log_uniform(-1.0, 1.5, &mut rng));
            let gap = monotonicity_gap(&v1, &v2, &z, &p).expect("same basis");
            let tol = monotonicity_tolerance(&v1, &v2);
            FuzzRow::new(Suite::Monotonicity, format!("nu={nu},N={n}"), seed, gap, -tol, gap + tol)
        });
        rows.extend(res);
    }
    let details = json!({ "grid": MONOTONICITY_GRID, "tolerance": "1e-10 (1 + |v1|_V^2 + |v2|_V^2)" });
    Ok(SuiteReport::from_rows(Suite::Monotonicity, rows.len(), rows, true, details))
}

/// Stochastic configuration shared by the two refinement studies.
pub struct OrderStudy {
    pub params: SimParams,
    pub x: SpectralField,
    pub path: gmns_core::noise::WienerPath,
}

impl OrderStudy {
    /// Noise on (unit amplitude unless the run configures one), unit forcing
    /// and data, path spacing `dt_path`, horizon `t_end`.
    pub fn new(base: &SimParams, seed: u64, dt_path: f64, t_end: f64) -> AppResult<Self> {
        let b = base.basis().clone();
        let mut p = base.clone();
        if p.noise.is_off() {
            p.noise = NoiseSpectrum::default();
        }
        p.ou_scheme = OuScheme::PiecewiseLinear;
        p.dt_path = dt_path;
        p.t_end = t_end;
        p.dt = dt_path;
        let mut rng = rng_from(derive_seed(seed, "check/order/data"), "data");
        p.forcing = SpectralField::random(&b, 2.0, &mut rng);
        let x = SpectralField::random(&b, 1.0, &mut rng);
        let path = make_path(derive_seed(seed, "check/order/path"), dt_path, 0.0, t_end + dt_path, p.noise, &b)?;
        Ok(Self { params: p, x, path })
    }

    pub fn at_dt(&self, dt: f64) -> SimParams {
        let mut p = self.params.clone();
        p.dt = dt;
        p
    }
}

pub const ENERGY_DTS: [f64; 4] = [1.0 / 32.0, 1.0 / 64.0, 1.0 / 128.0, 1.0 / 256.0];
pub const ENERGY_T: f64 = 4.0;
pub const ENERGY_DT_PATH: f64 = 1.0 / 32.0;
pub const CHI_DTS: [f64; 4] = [1.0 / 128.0, 1.0 / 256.0, 1.0 / 512.0, 1.0 / 1024.0];
pub const CHI_T: f64 = 1.0;
pub const CHI_DT_PATH: f64 = 1.0 / 128.0;

fn ratio_rows(suite: Suite, seed: u64, dts: &[f64], values: &[f64]) -> Vec<FuzzRow> {
    values
        .windows(2)
        .zip(dts.windows(2))
        .map(|(v, d)| {
            let ratio = v[0] / v[1];
            let case = format!("ratio dt={}->{}", d[0], d[1]);
            FuzzRow::new(suite, case, seed, ratio, 4.0, 4.0 * ORDER_BAND - (ratio - 4.0).abs())
        })
        .collect()
}

/// The energy-equality residual at the horizon shrinks fourfold per halving of dt.
fn energy_order_suite<R: EnsembleRunner + Sync>(cx: &CheckContext<'_, R>) -> AppResult<SuiteReport> {
    let study = OrderStudy::new(cx.params, cx.seed, ENERGY_DT_PATH, ENERGY_T)?;
    let opts = SolveOptions { record_every: u64::MAX, keep_states: false, track_bounds: false };
    let res: Vec<_> = cx.runner.map(ENERGY_DTS.len(), |i| {
        solve_velocity(&study.x, &study.path, &study.at_dt(ENERGY_DTS[i]), opts).map(|s| s.ledger.last_residual().abs())
    });
    let residuals = res.into_iter().collect::<Result<Vec<_>, _>>()?;
    let rows = ratio_rows(Suite::EnergyOrder, cx.seed, &ENERGY_DTS, &residuals);
    let details = json!({ "t_end": ENERGY_T, "dt_path": ENERGY_DT_PATH, "dts": ENERGY_DTS, "residuals": residuals });
    Ok(SuiteReport::from_rows(Suite::EnergyOrder, ENERGY_DTS.len(), rows, true, details))
}

/// The χ = 0 and χ = 1 velocities converge together at second order.
fn chi_order_suite<R: EnsembleRunner + Sync>(cx: &CheckContext<'_, R>) -> AppResult<SuiteReport> {
    let study = OrderStudy::new(cx.params, cx.seed, CHI_DT_PATH, CHI_T)?;
    let res: Vec<_> = cx.runner.map(CHI_DTS.len(), |i| {
        chi_independence_series(&study.x, &study.path, 0.0, 1.0, &study.at_dt(CHI_DTS[i])).map(|c| (c.sup_diff, c.sup_norm_u))
    });
    let res = res.into_iter().collect::<Result<Vec<_>, _>>()?;
    let diffs: Vec<f64> = res.iter().map(|r| r.0).collect();
    let mut rows = ratio_rows(Suite::ChiOrder, cx.seed, &CHI_DTS, &diffs);
    let (d, s) = *res.last().unwrap();
    let rel = d / s.max(f64::MIN_POSITIVE);
    rows.push(FuzzRow::new(Suite::ChiOrder, format!("relative dt={}", CHI_DTS[3]), cx.seed, rel, CHI_REL_TOL, CHI_REL_TOL - rel));
    let details = json!({ "t_end": CHI_T, "dt_path": CHI_DT_PATH, "dts": CHI_DTS, "sup_diffs": diffs, "relative_finest": rel });
    Ok(SuiteReport::from_rows(Suite::ChiOrder, CHI_DTS.len(), rows, true, details))
}

pub const OU_DT_PATH: f64 = 0.25;
pub const OU_HORIZON: f64 = 1.0;
pub const OU_CHI_SAMPLED: [f64; 2] = [0.0, 1.0];

/// Coefficients of Z at `OU_HORIZON` on independent paths, started
/// stationary and moved with the exact transition law.
pub fn ou_samples<R: EnsembleRunner>(
    basis: &Arc<GalerkinBasis>,
    spectrum: NoiseSpectrum,
    chi: f64,
    nu: f64,
    n: usize,
    seed: u64,
    runner: &R,
) -> AppResult<Vec<SpectralField>> {
    let res: Vec<_> = runner.map(n, |i| {
        let path = make_path(derive_seed(seed, &format!("check/ou/{chi}/{i}")), OU_DT_PATH, 0.0, OU_HORIZON, spectrum, basis)?;
        let z0 = OuState::stationary(basis, &path, chi, nu, OuScheme::ExactLaw, 1, 0)?;
        Ok::<_, gmns_core::Error>(ou_evolve(&z0, &path, OU_HORIZON)?.z)
    });
    Ok(res.into_iter().collect::<Result<Vec<_>, _>>()?)
}

/// Per-coordinate variance σ²/(2(ν|k|² + χ)) and E‖Z‖²_H from sampled paths,
/// and the closed-form energy decreasing in χ.
fn ou_stationarity_suite<R: EnsembleRunner + Sync>(cx: &CheckContext<'_, R>) -> AppResult<SuiteReport> {
    let b = cx.params.basis().clone();
    let sp = if cx.params.noise.is_off() { NoiseSpectrum::default() } else { cx.params.noise };
    let nu = cx.params.nu;
    let n = cx.config.ou_samples;
    let mut rows = Vec::new();
    let mut energies_sampled = Vec::new();
    for chi in OU_CHI_SAMPLED {
        let zs = ou_samples(&b, sp, chi, nu, n, cx.seed, cx.runner)?;
        for j in 0..b.n_coeffs() {
            let lam = b.eigenvalue_of_slot(j);
            let want = sp.sigma(lam).powi(2) / (2.0 * (nu * lam + chi));
            let per: Vec<f64> = zs.iter().map(|z| 0.5 * z.coeffs()[j].norm_sqr()).collect();
            let (m, se) = (mean(&per), std_error(&per));
            let dev = (m - want).abs();
            rows.push(FuzzRow::new(Suite::OuStationarity, format!("chi={chi},slot={j}"), cx.seed, dev, OU_SE_BAND * se, OU_SE_BAND * se - dev));
        }
        let e: Vec<f64> = zs.iter().map(|z| z.norm_h_sq()).collect();
        let (m, se) = (mean(&e), std_error(&e));
        let want = ou_expected_energy(&sp, chi, nu, &b);
        let dev = (m - want).abs();
        rows.push(FuzzRow::new(Suite::OuStationarity, format!("chi={chi},energy"), cx.seed, dev, OU_SE_BAND * se, OU_SE_BAND * se - dev));
        energies_sampled.push(json!({ "chi": chi, "mean": m, "se": se, "closed_form": want }));
    }
    let closed: Vec<f64> = OU_CHI_LIST.iter().map(|c| ou_expected_energy(&sp, *c, nu, &b)).collect();
    for (w, c) in closed.windows(2).zip(OU_CHI_LIST.windows(2)) {
        rows.push(FuzzRow::new(Suite::OuStationarity, format!("energy chi={}->{}", c[0], c[1]), cx.seed, w[1], w[0], w[0] - w[1]));
    }
    let details = json!({
        "samples": n,
        "se_band": OU_SE_BAND,
        "sampled": energies_sampled,
        "chi_list": OU_CHI_LIST,
        "closed_form_energy": closed,
    });
    Ok(SuiteReport::from_rows(Suite::OuStationarity, n * OU_CHI_SAMPLED.len(), rows, true, details))
}

pub const SHIFT_DT_PATH: f64 = 1.0 / 16.0;
pub const SHIFT_SPAN: i64 = 64;

/// Z(θ_s ω)(t) = Z(ω)(t + s) for random grid pairs, both transition schemes.
fn shift_covariance_suite<R: EnsembleRunner + Sync>(cx: &CheckContext<'_, R>) -> AppResult<SuiteReport> {
    let b = cx.params.basis().clone();
    let sp = if cx.params.noise.is_off() { NoiseSpectrum::default() } else { cx.params.noise };
    let h = SHIFT_DT_PATH;
    let span = SHIFT_SPAN as f64 * h;
    let path = make_path(derive_seed(cx.seed, "check/shift/path"), h, -span, 2.0 * span, sp, &b)?;
    let n = cx.config.shift_pairs;
    let res: Vec<_> = cx.runner.map(n, |i| {
        let seed = trial_seed(cx.seed, Suite::ShiftCovariance, i);
        let mut rng = rng_from(seed, "trial");
        let s = Uniform::new(-SHIFT_SPAN, SHIFT_SPAN).unwrap().sample(&mut rng) as f64 * h;
        let t = Uniform::new(0, SHIFT_SPAN).unwrap().sample(&mut rng) as f64 * h;
        let chi = Uniform::new(0.0, 5.0).unwrap().sample(&mut rng);
        let mut rows = Vec::new();
        for scheme in [OuScheme::ExactLaw, OuScheme::PiecewiseLinear] {
            let (l, r) = ou_shift_covariance_check(&path, &b, s, t, chi, cx.params.nu, scheme)?;
            let d = (&l - &r).norm_h();
            let case = format!("{scheme:?} s={s} t={t}");
            rows.push(FuzzRow::new(Suite::ShiftCovariance, case, seed, d, SHIFT_TOL, SHIFT_TOL - d));
        }
        Ok::<_, gmns_core::Error>(rows)
    });
    let mut rows = Vec::new();
    for r in res {
        rows.extend(r?);
    }
    Ok(SuiteReport::from_rows(Suite::ShiftCovariance, n, rows, true, json!({ "dt_path": h, "tolerance": SHIFT_TOL })))
}
