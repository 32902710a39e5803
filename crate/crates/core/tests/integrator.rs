use std::sync::Arc;

use gmns_core::integrator::*;
use gmns_core::noise::*;
use gmns_core::operators::b_n_apply;
use gmns_core::spectral::*;
use gmns_core::Error;
use num_complex::Complex64;

fn basis(k: u32) -> Arc<GalerkinBasis> {
    Arc::new(build_basis(k).unwrap())
}

struct Setup {
    p: SimParams,
    path: WienerPath,
    x: SpectralField,
}

fn setup(kmax: u32, amp: f64, fmag: f64, dt: f64, h: f64, t: f64) -> Setup {
    let b = basis(kmax);
    let mut p = SimParams::defaults(&b);
    p.dt = dt;
    p.dt_path = h;
    p.t_end = t;
    p.noise = if amp > 0.0 { NoiseSpectrum::new(1.0, amp).unwrap() } else { NoiseSpectrum::off() };
    let mut rng = rng_from(5, "integrator-test");
    p.forcing = SpectralField::random(&b, 2.0, &mut rng).scale(fmag);
    let x = SpectralField::random(&b, 1.0, &mut rng);
    let path = make_path(99, h, 0.0, t + 1.0, p.noise, &b).unwrap();
    Setup { p, path, x }
}

fn quiet() -> SolveOptions {
    SolveOptions { record_every: u64::MAX, keep_states: false, track_bounds: false }
}

#[test]
fn rhs_examples() {
    let s = setup(2, 1.0, 1.0, 1.0 / 64.0, 1.0 / 64.0, 1.0);
    let b = s.p.basis().clone();
    let zero = SpectralField::zeros(&b);
    let mut p0 = s.p.clone();
    p0.forcing = zero.clone();
    assert!(rhs_transformed(&zero, &zero, &p0).unwrap().is_zero());

    let b1 = basis(1);
    let mut p1 = SimParams::defaults(&b1);
    p1.nu = 0.3;
    let v = SpectralField::single_mode(&b1, WaveVector([1, 1, 0]), 1, Complex64::new(0.4, 0.9)).unwrap();
    let z1 = SpectralField::zeros(&b1);
    let r = rhs_transformed(&v, &z1, &p1).unwrap();
    let want = v.stokes_apply().scale(-0.3);
    assert!((&r - &want).norm_h() < 1e-15);

    let mut rng = rng_from(1, "duality");
    let mut p = s.p.clone();
    p.chi = 0.7;
    let v = SpectralField::random(&b, 2.0, &mut rng);
    let z = SpectralField::random(&b, 2.0, &mut rng);
    let lhs = rhs_transformed(&v, &z, &p).unwrap().inner(&v);
    let rhs = -p.nu * v.norm_v_sq() - b_n_apply(&(&v + &z), p.n()).unwrap().inner(&v) + p.chi * z.inner(&v)
        + p.forcing.inner(&v);
    assert!((lhs - rhs).abs() < 1e-13 * (1.0 + lhs.abs()));
}

#[test]
fn heat_decay_is_exact() {
    let b = basis(1);
    let mut p = SimParams::defaults(&b);
    p.noise = NoiseSpectrum::off();
    p.nu = 0.8;
    p.dt = 1.0 / 16.0;
    p.dt_path = 1.0 / 16.0;
    p.t_end = 2.0;
    let path = make_path(1, p.dt_path, 0.0, 3.0, p.noise, &b).unwrap();
    let x = SpectralField::single_mode(&b, WaveVector([0, 1, 0]), 0, Complex64::new(1.5, 0.0)).unwrap();
    let sol = solve_velocity(&x, &path, &p, SolveOptions::default()).unwrap();
    for (t, v, _) in &sol.states {
        let want = 1.5 * (-0.8 * t).exp();
        assert!((v.norm_h() - want).abs() < 1e-14 * 1.5, "t {t}");
    }
    // Stokes-only ledger closes to rounding.
    assert!(sol.ledger.max_abs_residual() <= 1e-10);
}

#[test]
fn stokes_only_residual_kmax2() {
    let b = basis(2);
    let mut p = SimParams::defaults(&b);
    p.noise = NoiseSpectrum::off();
    p.t_end = 4.0;
    let path = make_path(1, p.dt_path, 0.0, 5.0, p.noise, &b).unwrap();
    let x = SpectralField::single_mode(&b, WaveVector([2, 1, 0]), 1, Complex64::new(0.3, -2.0)).unwrap();
    let sol = solve_velocity(&x, &path, &p, SolveOptions::default()).unwrap();
    assert!(sol.ledger.max_abs_residual() <= 1e-10, "{}", sol.ledger.max_abs_residual());
}

#[test]
fn zero_is_equilibrium() {
    let s = setup(2, 0.0, 0.0, 1.0 / 64.0, 1.0 / 64.0, 1.0);
    let zero = SpectralField::zeros(s.p.basis());
    let sol = solve_velocity(&zero, &s.path, &s.p, SolveOptions::default()).unwrap();
    assert!(sol.states.iter().all(|(_, v, z)| v.is_zero() && z.is_zero()));
}

#[test]
fn dissipative_without_forcing() {
    let s = setup(2, 0.0, 0.0, 1.0 / 64.0, 1.0 / 64.0, 2.0);
    let sol = solve_velocity(&s.x.scale(5.0), &s.path, &s.p, SolveOptions::default()).unwrap();
    let h: Vec<f64> = sol.ledger.rows.iter().map(|r| r.h_sq_v).collect();
    assert!(h.windows(2).all(|w| w[1] < w[0]));
}

#[test]
fn residual_second_order() {
    let mut prev: Option<f64> = None;
    for lvl in 0..3 {
        let dt = 1.0 / (32.0 * 2f64.powi(lvl));
        let s = setup(2, 1.0, 1.0, dt, 1.0 / 32.0, 2.0);
        let r = solve_velocity(&s.x, &s.path, &s.p, quiet()).unwrap().ledger.last_residual().abs();
        if let Some(q) = prev {
            let ratio = q / r;
            assert!((3.2..=4.8).contains(&ratio), "ratio {ratio}");
        }
        prev = Some(r);
    }
}

#[test]
fn repeat_is_bit_identical() {
    let s = setup(2, 1.0, 1.0, 1.0 / 64.0, 1.0 / 64.0, 1.0);
    let a = solve_velocity(&s.x, &s.path, &s.p, SolveOptions::default()).unwrap();
    let b = solve_velocity(&s.x, &s.path, &s.p, SolveOptions::default()).unwrap();
    assert_eq!(a.ledger, b.ledger);
    assert_eq!(a.final_state.v, b.final_state.v);
}

#[test]
fn resume_is_exact() {
    for h in [1.0 / 64.0, 1.0 / 16.0] {
        let s = setup(2, 1.0, 1.0, 1.0 / 64.0, h, 1.0);
        let full = solve_velocity(&s.x, &s.path, &s.p, quiet()).unwrap();
        let mut half = s.p.clone();
        half.t_end = 0.5;
        let first = solve_velocity(&s.x, &s.path, &half, quiet()).unwrap();
        let rec = first.final_state.to_record();
        let st = TrajectoryState::from_record(&rec, &s.path, &s.p).unwrap();
        let rest = solve_from(st, &s.path, &s.p, 32, quiet()).unwrap();
        assert_eq!(rest.final_state.v, full.final_state.v);
        assert_eq!(rest.final_state.z.z, full.final_state.z.z);
        assert_eq!(rest.final_state.step, full.final_state.step);
    }
}

#[test]
fn doss_sussman_roundtrip() {
    let s = setup(2, 1.0, 1.0, 1.0 / 64.0, 1.0 / 64.0, 0.5);
    let sol = solve_velocity(&s.x, &s.path, &s.p, SolveOptions::default()).unwrap();
    let u = doss_sussman_recover(&sol);
    assert!((&u[0].1 - &s.x).norm_h() <= 1e-15 * s.x.norm_h().max(1.0));
    let z: Vec<SpectralField> = sol.states.iter().map(|s| s.2.clone()).collect();
    let back = doss_sussman_transform(&u, &z);
    for ((_, v), (_, w, _)) in back.iter().zip(&sol.states) {
        assert!((v - w).norm_h() <= 1e-15 * w.norm_h().max(1.0));
    }

    let off = setup(2, 0.0, 1.0, 1.0 / 64.0, 1.0 / 64.0, 0.5);
    let sol = solve_velocity(&off.x, &off.path, &off.p, SolveOptions::default()).unwrap();
    for ((_, u), (_, v, _)) in doss_sussman_recover(&sol).iter().zip(&sol.states) {
        assert_eq!(u, v);
    }
}

fn cocycle_gap(chi: f64, dt: f64) -> f64 {
    let mut s = setup(2, 1.0, 1.0, dt, 1.0 / 32.0, 1.0);
    s.p.chi = chi;
    let (a, b) = (0.5, 0.5);
    let direct = cocycle_apply(a + b, &s.path, &s.x, &s.p).unwrap();
    let mid = cocycle_apply(a, &s.path, &s.x, &s.p).unwrap();
    let shifted = shift_path(&s.path, a).unwrap();
    let comp = cocycle_apply(b, &shifted, &mid, &s.p).unwrap();
    (&direct - &comp).norm_h()
}

#[test]
fn cocycle_property() {
    let s = setup(2, 1.0, 1.0, 1.0 / 64.0, 1.0 / 64.0, 1.0);
    assert_eq!(cocycle_apply(0.0, &s.path, &s.x, &s.p).unwrap(), s.x);

    // With χ = 0 the OU transition and the integrating factor share the decay
    // e^{−ν|k|²dt}, so restarting Z only relabels v and the composition is exact.
    assert!(cocycle_gap(0.0, 1.0 / 64.0) < 1e-12);

    let mut prev: Option<f64> = None;
    for lvl in 0..3 {
        let d = cocycle_gap(1.0, 1.0 / (32.0 * 2f64.powi(lvl)));
        if let Some(q) = prev {
            assert!(d < q / 2.0, "{d} vs {q}");
        }
        prev = Some(d);
    }
}

#[test]
fn chi_independence() {
    let s = setup(2, 1.0, 1.0, 1.0 / 64.0, 1.0 / 64.0, 1.0);
    assert_eq!(chi_independence_check(&s.x, &s.path, 0.5, 0.5, &s.p).unwrap(), 0.0);
    let off = setup(2, 0.0, 1.0, 1.0 / 64.0, 1.0 / 64.0, 1.0);
    assert_eq!(chi_independence_check(&off.x, &off.path, 0.0, 3.0, &off.p).unwrap(), 0.0);
    let mut prev: Option<f64> = None;
    for lvl in 0..3 {
        let dt = 1.0 / (64.0 * 2f64.powi(lvl));
        let s = setup(2, 1.0, 1.0, dt, 1.0 / 32.0, 1.0);
        let d = chi_independence_check(&s.x, &s.path, 0.0, 1.0, &s.p).unwrap();
        if let Some(q) = prev {
            let ratio = q / d;
            assert!((3.0..=5.0).contains(&ratio), "ratio {ratio}");
        }
        prev = Some(d);
    }
}

#[test]
fn data_continuity() {
    let s = setup(2, 1.0, 1.0, 1.0 / 64.0, 1.0 / 64.0, 1.0);
    let f = s.p.forcing.clone();
    let same = data_continuity_check(&s.x, &s.x, &f, &f, &s.path, &s.p).unwrap();
    assert_eq!((same.sup_diff_h, same.int_diff_v), (0.0, 0.0));

    let mut rng = rng_from(3, "perturb");
    let dx = SpectralField::random(s.p.basis(), 1.0, &mut rng).scale(0.1);
    let df = SpectralField::random(s.p.basis(), 1.0, &mut rng).scale(0.1);
    let mut prev: Option<ContinuityReport> = None;
    for k in 0..5 {
        let e = 0.5f64.powi(k);
        let xn = &s.x + &dx.scale(e);
        let fn_ = &f + &df.scale(e);
        let r = data_continuity_check(&s.x, &xn, &f, &fn_, &s.path, &s.p).unwrap();
        assert!(r.sup_diff_h * r.sup_diff_h <= r.gronwall_bound_sq);
        if let Some(q) = prev {
            assert!(r.sup_diff_h < q.sup_diff_h && r.int_diff_v < q.int_diff_v);
        }
        prev = Some(r);
    }
}

#[test]
fn a_priori_bounds_hold() {
    let s = setup(2, 1.0, 1.0, 1.0 / 128.0, 1.0 / 128.0, 4.0);
    let opts = SolveOptions { record_every: 8, keep_states: false, track_bounds: true };
    for (chi, scale) in [(0.0, 1.0), (2.0, 10.0)] {
        let mut p = s.p.clone();
        p.chi = chi;
        let sol = solve_velocity(&s.x.scale(scale), &s.path, &p, opts).unwrap();
        assert!(!sol.bounds.is_empty());
        for row in &sol.bounds {
            assert!(row.holds(), "{row:?}");
            assert!(row.effective_constant <= 3.0 / (p.nu * p.lambda_p).min(p.nu) * (1.0 + chi * chi) + 1e-9);
        }
    }
}

#[test]
fn instability_guard() {
    let mut s = setup(2, 1.0, 50.0, 1.0 / 8.0, 1.0 / 8.0, 4.0);
    s.p.ceiling_factor = 1.5;
    match solve_velocity(&s.x, &s.path, &s.p, quiet()) {
        Err(Error::Unstable { .. }) => {}
        other => panic!("expected instability, got {:?}", other.map(|_| ())),
    }
}

#[test]
fn params_validation() {
    let s = setup(2, 1.0, 1.0, 1.0 / 64.0, 1.0 / 64.0, 1.0);
    let mut p = s.p.clone();
    p.dt = 1.0 / 48.0;
    p.dt_path = 1.0 / 64.0;
    assert!(p.validate().is_err());
    let mut p = s.p.clone();
    p.dt = 1.0 / 128.0;
    p.ou_scheme = OuScheme::ExactLaw;
    assert!(p.validate().is_err());
    let mut p = s.p.clone();
    p.lambda_p = 2.0;
    assert!(p.validate().is_err());
    let mut p = s.p.clone();
    p.t_end = 0.0;
    assert!(p.validate().is_err());
    let mut p = s.p.clone();
    p.n_cutoff = Some(0.0);
    assert!(p.validate().is_err());
    assert!((contraction_rate(4.0, 1.0, 1.0) - (4.0 - 823543.0 / 67108864.0)).abs() < 1e-15);
    assert_eq!(s.p.time_grid().unwrap(), TimeGrid { sub: 1, ticks_per_step: 1 });
    let mut p = s.p.clone();
    p.dt = 1.0 / 16.0;
    assert_eq!(p.time_grid().unwrap(), TimeGrid { sub: 1, ticks_per_step: 4 });
    p.dt = 1.0 / 256.0;
    assert_eq!(p.time_grid().unwrap(), TimeGrid { sub: 4, ticks_per_step: 1 });
}

#[test]
fn path_window_too_short() {
    let mut s = setup(2, 1.0, 1.0, 1.0 / 64.0, 1.0 / 64.0, 1.0);
    s.p.t_end = 3.0;
    assert!(matches!(solve_velocity(&s.x, &s.path, &s.p, quiet()), Err(Error::PathWindow { .. })));
}
