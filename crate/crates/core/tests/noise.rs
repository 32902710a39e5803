use std::sync::Arc;

use gmns_core::noise::*;
use gmns_core::spectral::*;
use gmns_core::Error;
use proptest::prelude::*;

fn basis(k: u32) -> Arc<GalerkinBasis> {
    Arc::new(build_basis(k).unwrap())
}

#[test]
fn seeds_are_labeled() {
    assert_eq!(derive_seed(7, "a"), derive_seed(7, "a"));
    assert_ne!(derive_seed(7, "a"), derive_seed(7, "b"));
    assert_ne!(derive_seed(7, "a"), derive_seed(8, "a"));
    assert_ne!(stream_key(1, "wiener"), stream_key(1, "ou-init"));
    let key = stream_key(3, "wiener");
    assert_eq!(normals_at(&key, -5, 10), normals_at(&key, -5, 10));
    assert_ne!(normals_at(&key, -5, 10), normals_at(&key, -4, 10));
    assert!(stream_of(-1) < stream_of(0));
}

#[test]
fn spectrum_validation() {
    assert!(NoiseSpectrum::new(0.5, 1.0).is_err());
    assert!(NoiseSpectrum::new(1.0, -1.0).is_err());
    assert!(NoiseSpectrum::new(0.8, 1.0).is_ok());
    let low = NoiseSpectrum { s: 0.5, allow_low_regularity: true, ..NoiseSpectrum::default() };
    assert!(low.validate().is_ok());
    let bad_delta = NoiseSpectrum { delta: 0.6, ..NoiseSpectrum::default() };
    assert!(bad_delta.validate().is_err());
    let sp = NoiseSpectrum::new(1.0, 2.0).unwrap();
    assert_eq!(sp.sigma(4.0), 0.5);
    assert_eq!(NoiseSpectrum::off().sigma(1.0), 0.0);
    assert!(NoiseSpectrum::off().is_off());
}

#[test]
fn path_window_and_shift() {
    let b = basis(1);
    let sp = NoiseSpectrum::default();
    let p = make_path(9, 0.25, -1.0, 2.0, sp, &b).unwrap();
    assert_eq!(p.window(), (-4, 7));
    assert_eq!(p.time_span(), (-1.0, 2.0));
    assert!(matches!(p.normals(8), Err(Error::PathWindow { .. })));
    let s = shift_path(&p, 0.5).unwrap();
    assert_eq!(s.window(), (-6, 5));
    for n in -6..=5 {
        assert_eq!(s.normals(n).unwrap(), p.normals(n + 2).unwrap());
    }
    let inc = p.increments(0).unwrap();
    let xi = p.normals(0).unwrap();
    for (a, x) in inc.iter().zip(&xi) {
        assert!((a - 0.5 * x).abs() < 1e-15);
    }
    assert!(shift_path(&p, 0.1).is_err());
    assert!(make_path(1, 0.25, 1.0, 1.0, sp, &b).is_err());
}

#[test]
fn manifest_roundtrip() {
    let b = basis(2);
    let p = make_path(11, 1.0 / 16.0, -2.0, 3.0, NoiseSpectrum::default(), &b).unwrap();
    let s = shift_path(&p, -1.0).unwrap();
    for q in [&p, &s] {
        let m = q.manifest();
        let r = WienerPath::from_manifest(&m, &b).unwrap();
        assert_eq!(&r, q);
    }
    assert!(WienerPath::from_manifest(&p.manifest(), &basis(1)).is_err());
}

#[test]
fn ou_tables_schemes() {
    let b = basis(1);
    let sp = NoiseSpectrum::default();
    let h = 0.1;
    let ex = OuTables::new(&b, &sp, 0.0, 1.0, h, 1, OuScheme::ExactLaw);
    let pl = OuTables::new(&b, &sp, 0.0, 1.0, h, 1, OuScheme::PiecewiseLinear);
    for j in 0..b.n_coeffs() {
        let mu = b.eigenvalue_of_slot(j);
        let sigma = sp.sigma(mu);
        // Stationarity of each recursion: sd² = decay² sd² + gain².
        for t in [&ex, &pl] {
            let sd = t.stationary_sd[j];
            assert!((sd * sd - (t.decay[j].powi(2) * sd * sd + t.gain[j].powi(2))).abs() < 1e-14);
        }
        assert!((ex.stationary_sd[j] - sigma / (2.0 * mu).sqrt()).abs() < 1e-15);
        // PL variance approaches the exact one as μh → 0.
        assert!((pl.stationary_sd[j] / ex.stationary_sd[j] - 1.0).abs() < 0.01);
    }
}

#[test]
fn ou_stationary_sample_variance() {
    let b = basis(1);
    let sp = NoiseSpectrum::default();
    let (chi, nu) = (1.0, 0.5);
    let mut rng = rng_from(4, "ou-sample");
    let n = 20_000;
    let mut acc = vec![0.0; b.n_coeffs()];
    let mut energy = 0.0;
    for _ in 0..n {
        let z = ou_stationary_sample(&sp, chi, nu, &b, &mut rng);
        for (a, c) in acc.iter_mut().zip(z.coeffs()) {
            *a += c.norm_sqr();
        }
        energy += z.norm_h_sq();
    }
    for (j, a) in acc.iter().enumerate() {
        let lam = b.eigenvalue_of_slot(j);
        let want = sp.sigma(lam).powi(2) / (nu * lam + chi);
        // |c|² is σ²/(2μ) times a χ²₂ variable: sd equals its mean.
        let se = want / (n as f64).sqrt();
        assert!((a / n as f64 - want).abs() <= 5.0 * se);
    }
    let e = ou_expected_energy(&sp, chi, nu, &b);
    assert!((energy / n as f64 - e).abs() < 0.05 * e);
}

#[test]
fn ou_energy_decreases_in_chi() {
    let b = basis(2);
    let sp = NoiseSpectrum::default();
    let e: Vec<f64> = [0.0, 1.0, 10.0, 100.0].iter().map(|&c| ou_expected_energy(&sp, c, 1.0, &b)).collect();
    assert!(e.windows(2).all(|w| w[1] < w[0]));
    assert!(ou_expected_energy(&sp, 1e8, 1.0, &b) < 1e-6);
    assert_eq!(ou_expected_energy(&NoiseSpectrum::off(), 0.0, 1.0, &b), 0.0);
}

#[test]
fn exact_law_preserves_stationary_law() {
    let b = basis(1);
    let sp = NoiseSpectrum::default();
    let (chi, nu, h) = (0.0, 1.0, 0.25);
    let n = 4000;
    let mut acc = vec![0.0; b.n_coeffs()];
    for i in 0..n {
        let path = make_path(derive_seed(5, &format!("ou/{i}")), h, 0.0, 2.0, sp, &b).unwrap();
        let z0 = OuState::stationary(&b, &path, chi, nu, OuScheme::ExactLaw, 1, 0).unwrap();
        let z = ou_evolve(&z0, &path, 2.0).unwrap();
        for (a, c) in acc.iter_mut().zip(z.z.coeffs()) {
            *a += c.norm_sqr();
        }
    }
    for (j, a) in acc.iter().enumerate() {
        let lam = b.eigenvalue_of_slot(j);
        let want = sp.sigma(lam).powi(2) / (nu * lam + chi);
        let se = want / (n as f64).sqrt();
        assert!((a / n as f64 - want).abs() <= 5.0 * se);
    }
}

#[test]
fn ou_rejects_bad_inputs() {
    let b = basis(1);
    let path = make_path(1, 0.25, 0.0, 1.0, NoiseSpectrum::default(), &b).unwrap();
    let z = SpectralField::zeros(&b);
    assert!(OuState::new(z.clone(), 0.0, &path, -1.0, 1.0, OuScheme::ExactLaw, 1).is_err());
    assert!(OuState::new(z.clone(), 0.0, &path, 0.0, 0.0, OuScheme::ExactLaw, 1).is_err());
    assert!(OuState::new(z.clone(), 0.0, &path, 0.0, 1.0, OuScheme::ExactLaw, 2).is_err());
    assert!(OuState::new(z.clone(), 0.1, &path, 0.0, 1.0, OuScheme::ExactLaw, 1).is_err());
    let st = OuState::new(z, 0.0, &path, 0.0, 1.0, OuScheme::ExactLaw, 1).unwrap();
    assert!(ou_evolve(&st, &path, 2.0).is_err());
    let later = ou_evolve(&st, &path, 0.5).unwrap();
    assert!(ou_evolve(&later, &path, 0.25).is_err());
}

#[test]
fn ou_substeps_compose() {
    // sub PL ticks over one interval equal one PL step of length h with the same draw.
    let b = basis(1);
    let sp = NoiseSpectrum::default();
    let path = make_path(2, 0.5, 0.0, 1.0, sp, &b).unwrap();
    let mut rng = rng_from(1, "z0");
    let z0 = SpectralField::random(&b, 1.0, &mut rng);
    let one = OuState::new(z0.clone(), 0.0, &path, 0.3, 1.0, OuScheme::PiecewiseLinear, 1).unwrap();
    let four = OuState::new(z0, 0.0, &path, 0.3, 1.0, OuScheme::PiecewiseLinear, 4).unwrap();
    let a = ou_evolve(&one, &path, 0.5).unwrap();
    let c = ou_evolve(&four, &path, 0.5).unwrap();
    assert!((&a.z - &c.z).norm_h() < 1e-14);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn shift_covariance(s in -64i64..64, t in 0i64..64, seed in any::<u64>(), chi in 0.0f64..5.0) {
        let b = basis(1);
        let h = 1.0 / 16.0;
        let path = make_path(seed, h, -8.0, 8.0, NoiseSpectrum::default(), &b).unwrap();
        for scheme in [OuScheme::ExactLaw, OuScheme::PiecewiseLinear] {
            let (l, r) = ou_shift_covariance_check(&path, &b, s as f64 * h, t as f64 * h, chi, 1.0, scheme).unwrap();
            prop_assert!((&l - &r).norm_h() <= 1e-12);
        }
    }

    #[test]
    fn grid_index_roundtrip(n in -100_000i64..100_000, e in 0i32..12) {
        let h = 2f64.powi(-e);
        prop_assert_eq!(grid_index(n as f64 * h, h).unwrap(), n);
    }
}
