mod common;

use cdkit::mm_core::FiniteMmSpace;
use cdkit::transport::*;
use cdkit::{CurvatureProfile, OneDimMmSpace};
use common::*;
use ndarray::Array2;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn measure(masses: &[f64]) -> DiscreteMeasure {
    DiscreteMeasure::new((0..masses.len()).collect(), masses.to_vec()).unwrap()
}

fn flat_space(cells: usize) -> OneDimMmSpace {
    let k = CurvatureProfile::constant(1.0, 0.0, 4).unwrap();
    OneDimMmSpace::new(1.0, vec![1.0; cells + 1], k, 3.0, None).unwrap()
}

#[test]
fn simplex_matches_min_cost_flow_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..40 {
        let (m, n) = (rng.gen_range(2..20), rng.gen_range(2..20));
        let a = random_masses(&mut rng, m);
        let b = random_masses(&mut rng, n);
        let cost = Array2::from_shape_fn((m, n), |_| rng.gen_range(0.0..4.0));
        let x = solve_transport(&a, &b, &cost).unwrap();
        let got: f64 = (&x * &cost).sum();
        let want = ssp_transport_cost(&a, &b, &cost);
        assert!((got - want).abs() < 1e-10, "{got} vs {want}");
    }
}

#[test]
fn twenty_point_instances_and_marginals() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    for _ in 0..30 {
        let dist = random_plane_metric(&mut rng, 20);
        let a = random_masses(&mut rng, 20);
        let b = random_masses(&mut rng, 20);
        let (w, c) = w2_exact(&measure(&a), &measure(&b), &dist).unwrap();
        assert!(c.marginal_residual(&a, &b) <= 1e-10);
        let want = ssp_transport_cost(&a, &b, &dist.mapv(|d| d * d)).sqrt();
        assert!((w - want).abs() < 1e-8);
    }
}

#[test]
fn small_uniform_instances_match_assignment_brute_force() {
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    for n in 1..=8 {
        for _ in 0..4 {
            let pts = random_plane_metric(&mut rng, 2 * n);
            let dist = pts.clone();
            let u = vec![1.0 / n as f64; n];
            let mu0 = DiscreteMeasure::new((0..n).collect(), u.clone()).unwrap();
            let mu1 = DiscreteMeasure::new((n..2 * n).collect(), u).unwrap();
            let (w, _) = w2_exact(&mu0, &mu1, &dist).unwrap();
            let cost = Array2::from_shape_fn((n, n), |(i, j)| dist[[i, n + j]].powi(2));
            assert!((w * w - brute_force_assignment(&cost)).abs() < 1e-12);
        }
    }
}

#[test]
fn identical_measures_cost_nothing() {
    let mut rng = ChaCha8Rng::seed_from_u64(14);
    let dist = random_plane_metric(&mut rng, 12);
    let a = random_masses(&mut rng, 12);
    let (w, c) = w2_exact(&measure(&a), &measure(&a), &dist).unwrap();
    assert!(w < 1e-12);
    for ((i, j), p) in c.plan().indexed_iter() {
        if i != j {
            assert!(*p < 1e-15);
        }
    }
}

#[test]
fn one_dim_agrees_with_lp() {
    let mut rng = ChaCha8Rng::seed_from_u64(15);
    for _ in 0..100 {
        let cells = rng.gen_range(2..=60);
        let space = flat_space(cells);
        let a = random_masses(&mut rng, cells);
        let b = random_masses(&mut rng, cells);
        let (w1, plan) = w2_1d(&space, &measure(&a), &measure(&b)).unwrap();
        let xs: Vec<f64> = (0..cells).map(|j| space.cell_center(j)).collect();
        let dist = Array2::from_shape_fn((cells, cells), |(i, j)| (xs[i] - xs[j]).abs());
        let (w2, _) = w2_exact(&measure(&a), &measure(&b), &dist).unwrap();
        assert!((w1 - w2).abs() < 1e-8, "{w1} vs {w2}");
        assert!(plan.is_monotone());
        let total: f64 = plan.geodesics.iter().map(|g| g.weight).sum();
        assert!((total - 1.0).abs() < 1e-12);
    }
}

#[test]
fn uniform_translation() {
    let space = flat_space(100);
    let mu0 = DiscreteMeasure::uniform((0..20).collect()).unwrap();
    let mu1 = DiscreteMeasure::uniform((50..70).collect()).unwrap();
    let (w, _) = w2_1d(&space, &mu0, &mu1).unwrap();
    assert!((w - 0.5).abs() < 1e-12);
    let plan = MonotonePlan::new(&space, &mu0, &mu1).unwrap();
    assert!((plan.w2() - 0.5).abs() < 1e-12);
}

#[test]
fn interpolation_reproduces_grid_aligned_endpoints() {
    let mut rng = ChaCha8Rng::seed_from_u64(16);
    let space = flat_space(40);
    for _ in 0..20 {
        let a = random_masses(&mut rng, 40);
        let b = random_masses(&mut rng, 40);
        let (_, plan) = w2_1d(&space, &measure(&a), &measure(&b)).unwrap();
        let at0 = interpolate(&space, &plan, 0.0)
            .unwrap()
            .measure
            .to_dense(40)
            .unwrap();
        let at1 = interpolate(&space, &plan, 1.0)
            .unwrap()
            .measure
            .to_dense(40)
            .unwrap();
        for k in 0..40 {
            assert!((at0[k] - a[k]).abs() < 1e-14);
            assert!((at1[k] - b[k]).abs() < 1e-14);
        }
    }
}

#[test]
fn sturm_upper_bound_examples() {
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    let xs: Vec<f64> = (0..7).map(|_| rng.gen_range(0.0..2.0)).collect();
    let ys: Vec<f64> = (0..9).map(|_| rng.gen_range(0.5..3.0)).collect();
    let (a, b) = (random_masses(&mut rng, 7), random_masses(&mut rng, 9));
    let pos = |v: &[f64]| v.iter().map(|m| m.max(1e-3)).collect::<Vec<f64>>();
    let (a, b) = (pos(&a), pos(&b));
    let x = FiniteMmSpace::on_line(&xs, a, vec![0.0; 7], None)
        .unwrap()
        .normalize()
        .unwrap();
    let y = FiniteMmSpace::on_line(&ys, b, vec![0.0; 9], None)
        .unwrap()
        .normalize()
        .unwrap();
    let d = sturm_d_upper(&x, &y, &line_cross_distances(&xs, &ys)).unwrap();
    let want = line_w2(&xs, x.weights(), &ys, y.weights());
    assert!((d - want).abs() < 1e-10, "{d} vs {want}");

    let self_glue = sturm_d_upper(&x, &x, x.dist()).unwrap();
    assert!(self_glue < 1e-12);

    let mut bad = line_cross_distances(&xs, &ys);
    bad[[0, 0]] = 100.0;
    assert!(sturm_d_upper(&x, &y, &bad).is_err());
}

#[test]
fn gw_relabeling_and_symmetry() {
    let mut rng = ChaCha8Rng::seed_from_u64(18);
    let dist = random_plane_metric(&mut rng, 10);
    let w: Vec<f64> = (0..10).map(|_| rng.gen_range(0.5..1.5)).collect();
    let x = FiniteMmSpace::new(dist, w, vec![0.0; 10], None)
        .unwrap()
        .normalize()
        .unwrap();
    let perm = [3, 1, 4, 0, 9, 2, 6, 5, 8, 7];
    let y = x.relabel(&perm).unwrap();
    let mut init = Array2::zeros((10, 10));
    for (new, &old) in perm.iter().enumerate() {
        init[[old, new]] = x.weights()[old];
    }
    let start = Coupling::new((0..10).collect(), (0..10).collect(), init).unwrap();
    let g = gw_from(&x, &y, start).unwrap();
    assert!(g.value < 1e-10);

    let other = FiniteMmSpace::new(
        random_plane_metric(&mut rng, 8),
        vec![0.125; 8],
        vec![0.0; 8],
        None,
    )
    .unwrap();
    let ab = gw_surrogate(&x, &other).unwrap().value;
    let ba = gw_surrogate(&other, &x).unwrap().value;
    assert!((ab - ba).abs() <= 0.1 * ab.max(ba), "{ab} vs {ba}");
}

#[test]
fn gw_two_point_spaces_against_coupling_family() {
    for &(a, b) in &[(1.0, 2.0), (0.5, 0.1), (3.0, 3.0)] {
        let x = FiniteMmSpace::on_line(&[0.0, a], vec![0.5, 0.5], vec![0.0; 2], None).unwrap();
        let y = FiniteMmSpace::on_line(&[0.0, b], vec![0.5, 0.5], vec![0.0; 2], None).unwrap();
        // Couplings with equal marginals: [[s, 1/2-s], [1/2-s, s]].
        let energy = |s: f64| {
            let pi = [[s, 0.5 - s], [0.5 - s, s]];
            let dx = [[0.0, a], [a, 0.0]];
            let dy = [[0.0, b], [b, 0.0]];
            let mut e = 0.0;
            for i in 0..2 {
                for j in 0..2 {
                    for k in 0..2 {
                        for l in 0..2 {
                            e += (dx[i][k] - dy[j][l]).powi(2) * pi[i][j] * pi[k][l];
                        }
                    }
                }
            }
            e
        };
        let best = (0..=1000)
            .map(|k| energy(0.5 * k as f64 / 1000.0))
            .fold(f64::INFINITY, f64::min);
        let g = gw_surrogate(&x, &y).unwrap().value;
        assert!((g - best.sqrt()).abs() < 1e-12);
        assert!((g - (a - b).abs() / 2f64.sqrt()).abs() < 1e-12);
    }
}

#[test]
fn transfer_identity_returns_input() {
    let mut rng = ChaCha8Rng::seed_from_u64(19);
    let m = random_masses(&mut rng, 9)
        .iter()
        .map(|v| v + 0.01)
        .collect::<Vec<f64>>();
    let total: f64 = m.iter().sum();
    let m: Vec<f64> = m.iter().map(|v| v / total).collect();
    let diag = Array2::from_shape_fn((9, 9), |(i, j)| if i == j { m[i] } else { 0.0 });
    let q = Coupling::new((0..9).collect(), (0..9).collect(), diag).unwrap();
    let mu = measure(&random_masses(&mut rng, 9));
    let out = coupling_transfer(&q, &m, &m, &mu).unwrap();
    for (x, y) in out.masses().iter().zip(mu.masses()) {
        assert!((x - y).abs() < 1e-15);
    }
    let bad = Coupling::new((0..9).collect(), (0..9).collect(), Array2::zeros((9, 9))).unwrap();
    assert!(coupling_transfer(&bad, &m, &m, &mu).is_err());
}

fn positive_masses(n: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(0.01f64..1.0, n).prop_map(|v| {
        let s: f64 = v.iter().sum();
        v.iter().map(|x| x / s).collect()
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn w2_triangle_inequality(seed in 0u64..1_000_000, n in 3usize..15) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let dist = random_plane_metric(&mut rng, n);
        let (a, b, c) = (random_masses(&mut rng, n), random_masses(&mut rng, n), random_masses(&mut rng, n));
        let w = |x: &[f64], y: &[f64]| w2_exact(&measure(x), &measure(y), &dist).unwrap().0;
        prop_assert!(w(&a, &c) <= w(&a, &b) + w(&b, &c) + 1e-8);
    }

    #[test]
    fn renyi_within_bounds(w in prop::collection::vec(0.0f64..2.0, 2..30), seed in 0u64..1000, n in 1.1f64..8.0) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mu = random_masses(&mut rng, w.len());
        let s = renyi_entropy(&mu, &w, n).unwrap();
        let total: f64 = w.iter().sum();
        prop_assert!(s <= 0.0);
        prop_assert!(s >= -total.powf(1.0 / n) - 1e-12);
    }

    #[test]
    fn transfer_never_increases_entropy(
        m1 in positive_masses(7),
        m2 in positive_masses(5),
        seed in 0u64..1_000_000,
        lambda in 0.0f64..1.0,
        n in 1.2f64..6.0,
    ) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let cost = Array2::from_shape_fn((7, 5), |_| rng.gen::<f64>());
        let vertex = solve_transport(&m1, &m2, &cost).unwrap();
        let product = Array2::from_shape_fn((7, 5), |(i, j)| m1[i] * m2[j]);
        let plan = &vertex * lambda + &product * (1.0 - lambda);
        let q = Coupling::new((0..7).collect(), (0..5).collect(), plan).unwrap();
        prop_assert!(q.marginal_residual(&m1, &m2) <= 1e-10);
        let mu = measure(&random_masses(&mut rng, 7));
        let out = coupling_transfer(&q, &m1, &m2, &mu).unwrap();
        let before = renyi_entropy(mu.masses(), &m1, n).unwrap();
        let after = renyi_entropy(out.masses(), &m2, n).unwrap();
        prop_assert!(after <= before + 1e-10);
    }
}
