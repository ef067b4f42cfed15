mod common;

use cdkit::comparison_ode::model_volume;
use cdkit::mm_core::*;
use cdkit::CurvatureProfile;
use common::*;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_space(seed: u64, n: usize) -> FiniteMmSpace {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let dist = random_plane_metric(&mut rng, n);
    let w = (0..n).map(|_| rng.gen_range(0.1..2.0)).collect();
    let k = (0..n).map(|_| rng.gen_range(-5.0..2.0)).collect();
    FiniteMmSpace::new(dist, w, k, Some(rng.gen_range(0..n))).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(60))]

    #[test]
    fn normalizations_are_idempotent(seed in 0u64..1_000_000, n in 2usize..25) {
        let x = random_space(seed, n);
        let a = x.normalize().unwrap();
        prop_assert!((a.total_mass() - 1.0).abs() < 1e-14);
        let aa = a.normalize().unwrap();
        for (p, q) in a.weights().iter().zip(aa.weights()) {
            prop_assert!((p - q).abs() <= 1e-15);
        }
        let b = x.normalize_pointed().unwrap();
        let o = b.base().unwrap();
        prop_assert!((b.ball_mass(o, 1.0) - 1.0).abs() < 1e-14);
        let bb = b.normalize_pointed().unwrap();
        for (p, q) in b.weights().iter().zip(bb.weights()) {
            prop_assert!((p - q).abs() <= 1e-15);
        }
    }

    #[test]
    fn excess_rescaling_identity(seed in 0u64..1_000_000, n in 2usize..25, k in -2.0f64..2.0, p in 1.0f64..4.0) {
        let x = random_space(seed, n);
        let base = x.excess_k(p, k).unwrap();
        for &r in &[0.1, 2.0, 10.0] {
            let y = x.rescale(r).unwrap();
            let v = y.excess_k(p, k / (r * r)).unwrap();
            prop_assert!((v - base).abs() <= 1e-12 * base.max(1e-300), "r={} {} vs {}", r, v, base);
        }
    }

    #[test]
    fn excess_vanishes_under_lower_bound(seed in 0u64..1_000_000, n in 2usize..20) {
        let x = random_space(seed, n);
        let kmin = x.kappa().iter().copied().fold(f64::INFINITY, f64::min);
        prop_assert_eq!(x.excess_k(2.0, kmin).unwrap(), 0.0);
        prop_assert!(x.excess_k(2.0, kmin + 1.0).unwrap() > 0.0);
    }

    #[test]
    fn pointed_excess_monotone_in_radius(seed in 0u64..1_000_000, n in 2usize..20) {
        let x = random_space(seed, n).normalize_pointed().unwrap();
        let mut last = 0.0f64;
        for &r in &[0.25, 0.5, 1.0, 2.0] {
            let v = x.excess_k_pointed(2.0, 1.0, r).unwrap() / (r * r);
            prop_assert!(v >= last - 1e-15);
            last = v;
        }
    }
}

#[test]
fn printed_linear_rescaling_exponent_fails() {
    let x = random_space(3, 12);
    let base = x.excess_k(2.0, 1.0).unwrap();
    let y = x.rescale(2.0).unwrap();
    let linear = y.excess_k(2.0, 1.0 / 2.0).unwrap();
    assert!((linear - base).abs() > 1e-3 * base);
}

#[test]
fn json_round_trips() {
    let x = random_space(5, 6);
    let back: FiniteMmSpace = serde_json::from_str(&serde_json::to_string(&x).unwrap()).unwrap();
    assert_eq!(back, x);
    let s = make_model_space(1.0, 3.0, 0.01)
        .unwrap()
        .with_base(0.5)
        .unwrap();
    let text = serde_json::to_string(&s).unwrap();
    assert!(text.contains("\"L\"") && text.contains("\"h\""));
    let back: OneDimMmSpace = serde_json::from_str(&text).unwrap();
    assert_eq!(back, s);
}

#[test]
fn json_errors_name_the_problem() {
    let bad = r#"{"dist": [[0, 1], [1, 0]], "weights": [1, -1], "kappa": [0, 0]}"#;
    let err = serde_json::from_str::<FiniteMmSpace>(bad)
        .unwrap_err()
        .to_string();
    assert!(err.contains("weights"), "{err}");
    let one = r#"{"dist": [[0]], "weights": [1], "kappa": [0]}"#;
    assert!(serde_json::from_str::<FiniteMmSpace>(one).is_err());
}

#[test]
fn model_space_mass_matches_model_volume() {
    for &(k, n) in &[(1.0, 2.0), (1.0, 3.0), (2.0, 3.0), (3.0, 5.0)] {
        let s = make_model_space(k, n, 1e-3).unwrap();
        let exact = model_volume(k, n, s.length()).unwrap();
        assert!((s.total_mass() / exact - 1.0).abs() < 1e-5, "K={k} N={n}");
    }
}

#[test]
fn cd_fixture_density_matches_power_series() {
    // κ(r) = 2r with N = 3 gives u'' + r u = 0.
    let kappa = CurvatureProfile::from_fn(1.5, 30, |r| 2.0 * r).unwrap();
    let s = make_cd_fixture(&kappa, 3.0, 0.0, 1.0, 1e-2).unwrap();
    for j in 0..=s.cells() {
        let (u, _) = airy_like_series(s.node(j));
        assert!((s.density()[j] - u * u).abs() < 1e-9, "node {j}");
    }
}

#[test]
fn cd_fixture_truncates_at_first_zero() {
    let kappa = CurvatureProfile::constant(5.0, 2.0, 50).unwrap();
    let s = make_cd_fixture(&kappa, 3.0, 1.0, 0.0, 1e-2).unwrap();
    // u = cos r vanishes at π/2.
    assert!((s.length() - std::f64::consts::FRAC_PI_2).abs() < 1e-9);
    assert_eq!(*s.density().last().unwrap(), 0.0);
    assert!(make_cd_fixture(&kappa, 3.0, 0.0, 0.0, 1e-2).is_err());
}

#[test]
fn warped_product_mass() {
    let circle = circle_space(10, 3.0).unwrap();
    let f: Vec<f64> = (0..=30).map(|a| 1.0 + a as f64 / 30.0).collect();
    let w = make_warped_product(0.0, 3.0, 2.0, &f, &circle).unwrap();
    // ∫_0^2 (1 + t/2)² dt · m(circle) = 14/3 · 10
    let exact = 10.0 * 14.0 / 3.0;
    assert!(
        (w.total_mass() - exact).abs() < 2e-3 * exact,
        "{} vs {exact}",
        w.total_mass()
    );
    for i in 0..w.len() {
        for j in 0..w.len() {
            assert!((w.dist()[[i, j]] - w.dist()[[j, i]]).abs() == 0.0);
        }
    }
}

#[test]
fn finite_view_of_interval_space() {
    let kappa = CurvatureProfile::constant(2.0, -1.0, 20).unwrap();
    let s = make_cd_fixture(&kappa, 3.0, 1.0, 0.3, 1e-2).unwrap();
    let x = s.to_finite().unwrap();
    assert!((x.total_mass() - s.total_mass()).abs() < 1e-12);
    let exact = s.excess_k(2.0, 0.0).unwrap();
    let approx = x.excess_k(2.0, 0.0).unwrap();
    // diam of the atoms is L - h
    assert!((approx - exact * ((2.0 - 0.01) / 2.0f64).powi(2)).abs() < 1e-9);
    assert_eq!(x.dist().dim(), (200, 200));
}
