use std::sync::Arc;

use gmns_core::noise::rng_from;
use gmns_core::operators::*;
use gmns_core::spectral::*;
use proptest::prelude::*;
use rand_distr::{Distribution, Uniform};

fn basis(k: u32) -> Arc<GalerkinBasis> {
    Arc::new(build_basis(k).unwrap())
}

#[test]
fn cutoff_examples() {
    assert_eq!(f_cutoff(0.5, 1.0).unwrap(), 1.0);
    assert_eq!(f_cutoff(2.0, 1.0).unwrap(), 0.5);
    assert_eq!(f_cutoff(3.0, 3.0).unwrap(), 1.0);
    assert_eq!(f_cutoff(0.0, 1.0).unwrap(), 1.0);
    assert!(f_cutoff(1.0, 0.0).is_err());
    assert!(f_cutoff(1.0, -1.0).is_err());
}

#[test]
fn eta_value() {
    let p = CutoffParams::new(1.0, 1.0).unwrap();
    assert!((p.eta() - 823543.0 / 8192.0).abs() < 1e-12);
    assert!((p.eta() - 100.53).abs() < 5e-3);
    assert!(CutoffParams::new(0.0, 1.0).is_err());
    assert!(CutoffParams::new(1.0, 0.0).is_err());
}

#[test]
fn product_bound_saturates() {
    let b = basis(2);
    let mut rng = rng_from(1, "fn1");
    let u = SpectralField::random(&b, 2.0, &mut rng);
    let r = norm_l4(&u);
    let small = u.scale(0.3 / r);
    assert!((cutoff_product_bound(&small, 1.0).unwrap() - 0.3).abs() < 1e-15);
    let big = u.scale(5.0 / r);
    assert!((cutoff_product_bound(&big, 1.0).unwrap() - 1.0).abs() < 1e-15);
    assert_eq!(cutoff_product_bound(&SpectralField::zeros(&b), 1.0).unwrap(), 0.0);
}

#[test]
fn lipschitz_cases() {
    let b = basis(2);
    let mut rng = rng_from(2, "fn2");
    let u = SpectralField::random(&b, 2.0, &mut rng);
    let n = 1.0;
    let u2 = u.scale(2.0 * n / norm_l4(&u));
    let (l, r) = cutoff_lipschitz_check(&u2, &u2, n).unwrap();
    assert_eq!((l, r), (0.0, 0.0));
    let small = u.scale(0.5 / norm_l4(&u));
    let v = SpectralField::random(&b, 2.0, &mut rng);
    let v = v.scale(0.7 / norm_l4(&v));
    let (l, r) = cutoff_lipschitz_check(&small, &v, n).unwrap();
    assert_eq!(l, 0.0);
    assert!(r > 0.0);
    assert_eq!(LipschitzCase::classify(0.5, 0.7, 1.0), LipschitzCase::BothBelow);
    assert_eq!(LipschitzCase::classify(0.5, 1.7, 1.0), LipschitzCase::FirstBelow);
    assert_eq!(LipschitzCase::classify(1.5, 0.7, 1.0), LipschitzCase::SecondBelow);
    assert_eq!(LipschitzCase::classify(1.5, 1.7, 1.0), LipschitzCase::BothAbove);
}

#[test]
fn b_n_below_cutoff_is_plain_b() {
    let b = basis(2);
    let mut rng = rng_from(3, "bn");
    let u = SpectralField::random(&b, 2.0, &mut rng);
    let r = norm_l4(&u);
    let plain = nonlinear_self(&u).0;
    assert_eq!(b_n_apply(&u, 2.0 * r).unwrap(), plain);
}

#[test]
fn b_n_scaling_structure() {
    let b = basis(2);
    let mut rng = rng_from(4, "bn-scale");
    let u = SpectralField::random(&b, 2.0, &mut rng);
    let base = nonlinear_self(&u).0;
    let n = 1.0;
    for alpha in [10.0, 40.0, 100.0] {
        let au = u.scale(alpha);
        let r = norm_l4(&au);
        assert!(r >= n);
        let got = b_n_apply(&au, n).unwrap();
        let want = base.scale(n * alpha * alpha / r);
        let err = (&got - &want).norm_h();
        assert!(err <= 1e-12 * want.norm_h(), "alpha {alpha}: {err}");
    }
}

#[test]
fn b_n_orthogonal_to_argument() {
    let b = basis(2);
    let mut rng = rng_from(5, "bn-orth");
    for i in 0..100 {
        let u = SpectralField::random(&b, 2.0, &mut rng).scale(1.0 + i as f64 * 0.3);
        let w = b_n_apply(&u, 1.0).unwrap().inner(&u);
        assert!(w.abs() <= 1e-12 * u.norm_v().powi(3), "{w}");
    }
}

#[test]
fn g_n_properties() {
    let b = basis(2);
    let p = CutoffParams::new(1.0, 0.7).unwrap();
    let zero = SpectralField::zeros(&b);
    assert!(g_n_apply(&zero, &zero, &p).unwrap().is_zero());

    // A single Fourier mode does not interact with itself.
    let b1 = basis(1);
    let k = WaveVector([1, 0, 0]);
    let v = SpectralField::single_mode(&b1, k, 0, num_complex::Complex64::new(0.8, -0.3)).unwrap();
    let z1 = SpectralField::zeros(&b1);
    let g = g_n_apply(&v, &z1, &p).unwrap();
    let want = v.stokes_apply().scale(p.nu);
    assert!((&g - &want).norm_h() <= 1e-14);

    let mut rng = rng_from(6, "gn");
    let v = SpectralField::random(&b, 2.0, &mut rng);
    let z = SpectralField::random(&b, 2.0, &mut rng).scale(0.5);
    let lhs = g_n_apply(&v, &z, &p).unwrap().inner(&v);
    let rhs = p.nu * v.norm_v_sq() + b_n_apply(&(&v + &z), p.n).unwrap().inner(&v);
    assert!((lhs - rhs).abs() <= 1e-13 * (1.0 + lhs.abs()));
}

#[test]
fn monotonicity_examples() {
    let b = basis(2);
    let mut rng = rng_from(7, "cl1");
    let p = CutoffParams::new(1.0, 1.0).unwrap();
    let v = SpectralField::random(&b, 2.0, &mut rng).scale(3.0);
    let z = SpectralField::random(&b, 2.0, &mut rng);
    assert_eq!(monotonicity_gap(&v, &v, &z, &p).unwrap(), 0.0);

    let zero = SpectralField::zeros(&b);
    let gap = monotonicity_gap(&v, &zero, &zero, &p).unwrap();
    let want = 0.5 * p.nu * v.norm_v_sq() + p.eta() * v.norm_h_sq();
    assert!((gap - want).abs() <= 1e-10 * want);

    for _ in 0..100 {
        let v1 = SpectralField::random(&b, 2.0, &mut rng).scale(4.0);
        let v2 = SpectralField::random(&b, 2.0, &mut rng).scale(4.0);
        let z = SpectralField::random(&b, 2.0, &mut rng).scale(4.0);
        let gap = monotonicity_gap(&v1, &v2, &z, &p).unwrap();
        assert!(gap >= -monotonicity_tolerance(&v1, &v2));
    }
}

#[test]
fn lipschitz_fuzz_all_cases() {
    let b = basis(2);
    let mut rng = rng_from(8, "fn2-fuzz");
    let unit = Uniform::new(0.05, 1.0).unwrap();
    let mut seen = std::collections::HashSet::new();
    for i in 0..400 {
        let u = SpectralField::random(&b, 2.0, &mut rng).scale(1.0 + 10.0 * unit.sample(&mut rng));
        let v = SpectralField::random(&b, 2.0, &mut rng).scale(1.0 + 10.0 * unit.sample(&mut rng));
        let (ru, rv) = (norm_l4(&u), norm_l4(&v));
        let (lo, hi) = (ru.min(rv), ru.max(rv));
        let n = match i % 4 {
            0 => hi / unit.sample(&mut rng),
            1 | 2 => lo + (hi - lo) * unit.sample(&mut rng),
            _ => lo * unit.sample(&mut rng),
        };
        seen.insert(LipschitzCase::classify(ru, rv, n));
        let (l, r) = cutoff_lipschitz_check(&u, &v, n).unwrap();
        assert!(l <= r + 1e-14, "{l} > {r}");
        assert!(cutoff_product_bound(&u, n).unwrap() <= n);
    }
    assert!(seen.len() >= 3);
}

proptest! {
    #[test]
    fn cutoff_scaling(alpha in 1e-3f64..1e3, r in 0.0f64..1e3, n in 1e-3f64..1e3) {
        let a = f_cutoff(alpha * r, n).unwrap();
        let b = f_cutoff(r, n / alpha).unwrap();
        prop_assert!((a - b).abs() <= 4.0 * f64::EPSILON * a.max(b));
    }

    #[test]
    fn cutoff_scaling_dyadic(e in -20i32..20, r in 0.0f64..1e3, n in 1e-3f64..1e3) {
        let alpha = 2f64.powi(e);
        prop_assert_eq!(f_cutoff(alpha * r, n).unwrap(), f_cutoff(r, n / alpha).unwrap());
    }

    #[test]
    fn cutoff_range(r in 0.0f64..1e6, n in 1e-6f64..1e6) {
        let f = f_cutoff(r, n).unwrap();
        prop_assert!(f > 0.0 && f <= 1.0);
        prop_assert!(r * f <= n * (1.0 + f64::EPSILON));
    }

    #[test]
    fn lipschitz_scalar(ru in 0.0f64..10.0, rv in 0.0f64..10.0, extra in 0.0f64..5.0, n in 0.01f64..10.0) {
        // Any d ≥ |ru − rv| is a valid ‖u − v‖ by the triangle inequality.
        let d = (ru - rv).abs() + extra;
        let (fu, fv) = (f_cutoff(ru, n).unwrap(), f_cutoff(rv, n).unwrap());
        prop_assert!((fu - fv).abs() <= fu * fv * d / n + 1e-14);
    }
}
