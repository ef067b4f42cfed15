mod common;

use cdkit::cd_verify::*;
use cdkit::mm_core::{make_cd_fixture, make_model_space};
use cdkit::{CurvatureProfile, VerificationReport};
use common::*;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn same_rows(a: &VerificationReport, b: &VerificationReport) -> bool {
    a.details == b.details
        && a.params == b.params
        && a.worst_slack.to_bits() == b.worst_slack.to_bits()
}

#[test]
fn flat_blocks_match_closed_form() {
    // Uniform blocks of lengths l0, l1 on a flat interval: μ_t is uniform on a block of
    // length (1-t) l0 + t l1 and τ_{0,N}^{(t)} = t.
    let s = flat_space(4.0, 400, 3.0);
    let (l0, l1) = (0.5, 1.5);
    let mu0 = restricted_measure(&s, &cells_in(&s, 0.2, 0.2 + l0)).unwrap();
    let mu1 = restricted_measure(&s, &cells_in(&s, 2.0, 2.0 + l1)).unwrap();
    let r = check_cd_inequality(&s, &mu0, &mu1, &t_grid(11), &[3.0, 5.0], None).unwrap();
    for row in &r.details {
        let (t, n) = (row.point[0], row.point[1]);
        let lhs = -((1.0 - t) * l0 + t * l1).powf(1.0 / n);
        let rhs = -(1.0 - t) * l0.powf(1.0 / n) - t * l1.powf(1.0 / n);
        assert!(
            (row.lhs - lhs).abs() < 1e-12,
            "t={t} N={n}: {} vs {lhs}",
            row.lhs
        );
        assert!(
            (row.rhs - rhs).abs() < 1e-12,
            "t={t} N={n}: {} vs {rhs}",
            row.rhs
        );
    }
    assert!(r.pass);
}

#[test]
fn identical_measures_have_zero_slack() {
    let s = spiked_fixture(10.0, 1e-2);
    let mu = restricted_measure(&s, &cells_in(&s, 0.3, 2.0)).unwrap();
    let r = check_cd_inequality(&s, &mu, &mu, &t_grid(9), &[3.0], None).unwrap();
    assert!(r.details.iter().all(|row| row.slack.abs() < 1e-12));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn random_fixtures_satisfy_cd(seed in 0u64..1_000_000, a in 0.0f64..0.4, b in 0.5f64..0.9) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let kappa = random_profile(&mut rng, 1.5, 12, -4.0, 2.0);
        let s = make_cd_fixture(&kappa, 3.0, 1.0, 0.2, 1e-2).unwrap();
        let len = s.length();
        let mu0 = restricted_measure(&s, &cells_in(&s, a * len, (a + 0.1) * len)).unwrap();
        let mu1 = restricted_measure(&s, &cells_in(&s, b * len, (b + 0.1) * len)).unwrap();
        let r = check_cd_inequality(&s, &mu0, &mu1, &t_grid(5), &[3.0, 6.0], None).unwrap();
        prop_assert!(r.pass, "worst {}", r.worst_slack);
    }

    #[test]
    fn error_term_is_monotone_in_excess(k1 in 0.0f64..10.0, dk in 0.0f64..10.0, ball in 0.1f64..10.0, p in 1.6f64..4.0) {
        let a = resulta_error_term(0.0, 3.0, p, 0.1, ball, k1).unwrap();
        let b = resulta_error_term(0.0, 3.0, p, 0.1, ball, k1 + dk).unwrap();
        prop_assert!(b >= a);
    }
}

#[test]
fn zero_excess_reduces_to_constant_curvature_cd() {
    let s = make_model_space(1.0, 3.0, 1e-2)
        .unwrap()
        .with_base(0.0)
        .unwrap();
    let budget = ExcessBudget {
        k: 1.0,
        p: 2.0,
        radius: 2.0,
        epsilon: 0.3,
    };
    let mu0 = restricted_measure(&s, &cells_in(&s, 0.1, 0.4)).unwrap();
    let mu1 = restricted_measure(&s, &cells_in(&s, 0.6, 1.0)).unwrap();
    let ts = t_grid(9);
    let a = check_resulta(&s, &budget, &mu0, &mu1, &ts, None).unwrap();
    assert_eq!(a.params["error_term"], 0.0);
    // Same entropies on the pointed-normalized space; the constant-K bound is the
    // CD bound with κ ≡ K.
    let normalized = s.normalize_pointed().unwrap();
    let b = check_cd_inequality(&normalized, &mu0, &mu1, &ts, &[3.0], None).unwrap();
    for (x, y) in a.details.iter().zip(&b.details) {
        assert!((x.lhs - y.lhs).abs() < 1e-14);
        assert!(
            (x.rhs - y.rhs).abs() < 1e-8 * (1.0 + y.rhs.abs()),
            "{} vs {}",
            x.rhs,
            y.rhs
        );
    }
    assert!(a.pass && b.pass);
}

#[test]
fn resulta_on_spike_family() {
    let budget = ExcessBudget {
        k: 0.0,
        p: 2.0,
        radius: 2.0,
        epsilon: 0.1,
    };
    for &depth in &[1.0, 10.0, 100.0] {
        let s = spiked_fixture(depth, 1e-2);
        let mu0 = restricted_measure(&s, &cells_in(&s, 0.05, 0.4)).unwrap();
        let mu1 = restricted_measure(&s, &cells_in(&s, 0.6, 0.95)).unwrap();
        let r = check_resulta(&s, &budget, &mu0, &mu1, &t_grid(9), None).unwrap();
        assert!(r.params["error_term"] > 0.0);
        assert!(r.pass, "depth {depth}: worst {}", r.worst_slack);
    }
}

#[test]
fn resulta_support_hypothesis() {
    let s = spiked_fixture(1.0, 1e-2);
    let budget = ExcessBudget {
        k: 0.0,
        p: 2.0,
        radius: 2.0,
        epsilon: 0.1,
    };
    let mu0 = restricted_measure(&s, &cells_in(&s, 0.0, 0.5)).unwrap();
    let mu1 = restricted_measure(&s, &cells_in(&s, 1.5, 2.0)).unwrap();
    let err = check_resulta(&s, &budget, &mu0, &mu1, &[0.5], None).unwrap_err();
    assert!(err.to_string().contains("mu1"), "{err}");
    let unpointed = make_model_space(1.0, 3.0, 1e-2).unwrap();
    assert!(check_resulta(&unpointed, &budget, &mu0, &mu0, &[0.5], None).is_err());
}

#[test]
fn brunn_minkowski_spiked_has_positive_defect() {
    let s = spiked_fixture(10.0, 1e-2);
    let r = check_brunn_minkowski(
        &s,
        &cells_in(&s, 0.0, 0.5),
        &cells_in(&s, 1.5, 2.5),
        &t_grid(9),
        2.0,
        None,
    )
    .unwrap();
    assert!(r.params["defect"] > 0.0);
    assert!(r.pass, "worst {}", r.worst_slack);
}

#[test]
fn brunn_minkowski_flat_disjoint_is_classical() {
    let s = flat_space(3.0, 300, 2.0);
    // A0 = [0, 0.5] ∪ [1, 1.2], A1 = [2, 3]
    let mut a0 = cells_in(&s, 0.0, 0.5);
    a0.extend(cells_in(&s, 1.0, 1.2));
    let a1 = cells_in(&s, 2.0, 3.0);
    let r = check_brunn_minkowski(&s, &a0, &a1, &t_grid(5), 1.5, None).unwrap();
    assert_eq!(r.params["defect"], 0.0);
    for row in &r.details {
        let t = row.point[0];
        // direct interval arithmetic: (1-t)[0,0.5] + t[2,3] and (1-t)[1,1.2] + t[2,3]
        let i1 = (2.0 * t, 0.5 * (1.0 - t) + 3.0 * t);
        let i2 = ((1.0 - t) + 2.0 * t, 1.2 * (1.0 - t) + 3.0 * t);
        let len = if i2.0 <= i1.1 {
            i2.1.max(i1.1) - i1.0
        } else {
            (i1.1 - i1.0) + (i2.1 - i2.0)
        };
        assert!((row.rhs - (len / 3.0).sqrt()).abs() < 1e-12, "t={t}");
    }
    assert!(r.pass);
}

#[test]
fn bishop_gromov_spiked() {
    let kappa = cdkit::mm_core::make_spiked_profile(-1.0, 20.0, 0.2, 1.0, 9.0, None).unwrap();
    let s = make_cd_fixture(&kappa, 3.0, 1.0, 0.0, 1e-2)
        .unwrap()
        .with_base(0.0)
        .unwrap();
    let r =
        check_bishop_gromov(&s, -1.0, 2.0, 8.0, &[0.2, 0.5, 0.9], &[2.0, 3.0, 4.0], None).unwrap();
    assert!(r.params["factor"] > 1.0);
    assert!(r.pass, "worst {}", r.worst_slack);
}

#[test]
fn mcp_entropy_spiked() {
    let s = spiked_fixture(30.0, 1e-2);
    let budget = ExcessBudget {
        k: 0.0,
        p: 2.0,
        radius: 2.0,
        epsilon: 0.1,
    };
    let r = check_mcp_entropy(
        &s,
        0.0,
        &cells_in(&s, 0.5, 1.8),
        &budget,
        1.9,
        &t_grid(9),
        None,
    )
    .unwrap();
    assert!(r.params["error_term"] > 0.0);
    assert!(r.pass, "worst {}", r.worst_slack);
}

#[test]
fn mcp_at_t_one_is_equality_on_a() {
    let s = make_model_space(2.0, 3.0, 1e-2).unwrap();
    let r = check_mcp(&s, 0.3, &cells_in(&s, 0.5, 1.5), 2.0, 3.0, &[1.0], None).unwrap();
    let row = &r.details[0];
    assert!((row.lhs - row.rhs).abs() < 1e-15 * (1.0 + row.rhs));
}

#[test]
fn checkers_are_deterministic() {
    let s = spiked_fixture(10.0, 1e-2);
    let mu0 = restricted_measure(&s, &cells_in(&s, 0.05, 0.4)).unwrap();
    let mu1 = restricted_measure(&s, &cells_in(&s, 0.6, 0.95)).unwrap();
    let ts = t_grid(5);
    let a = check_cd_inequality(&s, &mu0, &mu1, &ts, &[3.0, 4.0], None).unwrap();
    let b = check_cd_inequality(&s, &mu0, &mu1, &ts, &[3.0, 4.0], None).unwrap();
    assert!(same_rows(&a, &b));
    let a = check_mcp(&s, 0.0, &cells_in(&s, 0.2, 0.8), 0.0, 3.0, &ts, None).unwrap();
    let b = check_mcp(&s, 0.0, &cells_in(&s, 0.2, 0.8), 0.0, 3.0, &ts, None).unwrap();
    assert!(same_rows(&a, &b));
}

#[test]
fn halving_h_keeps_passes() {
    let kappa =
        CurvatureProfile::from_fn(2.0, 20, |r| 1.0 - 3.0 * (2.0 * r).sin().powi(2)).unwrap();
    let mut worst = Vec::new();
    for &h in &[4e-2, 2e-2, 1e-2, 5e-3] {
        let s = make_cd_fixture(&kappa, 3.0, 1.0, 0.0, h).unwrap();
        let mu0 = restricted_measure(&s, &cells_in(&s, 0.0, 0.4)).unwrap();
        let mu1 = restricted_measure(&s, &cells_in(&s, 1.2, 2.0)).unwrap();
        let r = check_cd_inequality(&s, &mu0, &mu1, &t_grid(9), &[3.0], None).unwrap();
        assert!(r.pass, "h={h}: worst {}", r.worst_slack);
        worst.push(
            r.details
                .iter()
                .map(|row| row.slack)
                .fold(f64::INFINITY, f64::min),
        );
    }
    // worst slack settles as h → 0
    let d1 = (worst[2] - worst[1]).abs();
    let d2 = (worst[3] - worst[2]).abs();
    assert!(d2 <= d1 + 1e-12, "{worst:?}");
}

#[test]
fn convergence_excess_follows_width_at_fixed_depth() {
    // depth 1, width i^{-2}: excess ∝ w^{1/p} = i^{-1}
    let mut cfg = ConvergenceConfig::new(0.0, 3.0, 2.0, 8);
    cfg.schedule = SpikeSchedule {
        depth_exponent: 0.0,
        width_exponent: 2.0,
    };
    let t = convergence_experiment(&cfg).unwrap();
    let (a, b) = (&t.rows[3], &t.rows[7]);
    let slope = (b.excess / a.excess).ln() / (8.0f64 / 4.0).ln();
    assert!((slope + 1.0).abs() < 0.02, "{slope}");
}

#[test]
fn overstated_curvature_is_caught() {
    // unit density on [0, 1] is CD(0, N) but not CD(5, N)
    let k = CurvatureProfile::constant(1.0, 5.0, 100).unwrap();
    let s = cdkit::OneDimMmSpace::new(1.0, vec![1.0; 101], k, 3.0, None).unwrap();
    let mu0 = restricted_measure(&s, &cells_in(&s, 0.0, 0.2)).unwrap();
    let mu1 = restricted_measure(&s, &cells_in(&s, 0.7, 1.0)).unwrap();
    // both sides are exact for unit density, so a tight tolerance is fair
    let tight = Some(cdkit::Tolerance::max_side(1e-9));
    let r = check_cd_inequality(&s, &mu0, &mu1, &t_grid(9), &[3.0], tight).unwrap();
    assert!(!r.pass);
    let honest = cdkit::OneDimMmSpace::new(
        1.0,
        vec![1.0; 101],
        CurvatureProfile::constant(1.0, 0.0, 100).unwrap(),
        3.0,
        None,
    )
    .unwrap();
    assert!(
        check_cd_inequality(&honest, &mu0, &mu1, &t_grid(9), &[3.0], tight)
            .unwrap()
            .pass
    );
}

#[test]
fn spike_without_error_budget_fails() {
    // Constant-K coefficients alone do not cover a deep dip; the error term does.
    let s = spiked_fixture(100.0, 1e-2);
    let mu0 = restricted_measure(&s, &cells_in(&s, 0.6, 0.8)).unwrap();
    let mu1 = restricted_measure(&s, &cells_in(&s, 1.2, 1.4)).unwrap();
    let budget = ExcessBudget {
        k: 0.0,
        p: 2.0,
        radius: 3.0,
        epsilon: 0.1,
    };
    let with = check_resulta(&s, &budget, &mu0, &mu1, &t_grid(9), None).unwrap();
    let flat = s.normalize_pointed().unwrap();
    let k0 = CurvatureProfile::constant(flat.length(), 0.0, flat.cells()).unwrap();
    let claimed =
        cdkit::OneDimMmSpace::new(flat.length(), flat.density().to_vec(), k0, 3.0, None).unwrap();
    let without = check_cd_inequality(&claimed, &mu0, &mu1, &t_grid(9), &[3.0], None).unwrap();
    assert!(with.pass, "worst {}", with.worst_slack);
    assert!(!without.pass, "worst {}", without.worst_slack);
}
