#![allow(dead_code)]

use cdkit::CurvatureProfile;
use proptest::prelude::*;
use rand::Rng;

/// Random piecewise-linear profile with values in `[lo, hi]`.
pub fn random_profile<R: Rng>(
    rng: &mut R,
    length: f64,
    cells: usize,
    lo: f64,
    hi: f64,
) -> CurvatureProfile {
    let samples = (0..=cells).map(|_| rng.gen_range(lo..=hi)).collect();
    CurvatureProfile::new(length, samples).unwrap()
}

pub fn profile_strategy(max_len: f64, lo: f64, hi: f64) -> impl Strategy<Value = CurvatureProfile> {
    (0.5..max_len, 2usize..40).prop_flat_map(move |(len, m)| {
        prop::collection::vec(lo..hi, m + 1)
            .prop_map(move |s| CurvatureProfile::new(len, s).unwrap())
    })
}

/// Power series of the solution of `v'' + r v = 0`, `v(0)=0`, `v'(0)=1`.
pub fn airy_like_series(r: f64) -> (f64, f64) {
    let mut a = vec![0.0f64; 200];
    a[1] = 1.0;
    for n in 1..198 {
        a[n + 2] = -a[n - 1] / ((n + 2) as f64 * (n + 1) as f64);
    }
    let mut s = 0.0;
    let mut c = 0.0;
    for n in (0..200).rev() {
        s = s * r + a[n];
    }
    for n in (1..200).rev() {
        c = c * r + n as f64 * a[n];
    }
    (s, c)
}

/// Min-cost flow by successive shortest paths (Bellman–Ford on the residual graph).
/// Returns the optimal cost of the transportation problem.
pub fn ssp_transport_cost(a: &[f64], b: &[f64], cost: &ndarray::Array2<f64>) -> f64 {
    let (m, n) = (a.len(), b.len());
    let mut flow = ndarray::Array2::<f64>::zeros((m, n));
    let mut ra = a.to_vec();
    let mut rb = b.to_vec();
    let tiny = 1e-15;
    loop {
        // nodes: rows 0..m, cols m..m+n; sources are rows with supply left.
        let total: f64 = ra.iter().sum();
        if total <= 1e-13 {
            break;
        }
        let nodes = m + n;
        let mut dist = vec![f64::INFINITY; nodes];
        let mut pred: Vec<Option<usize>> = vec![None; nodes];
        for i in 0..m {
            if ra[i] > tiny {
                dist[i] = 0.0;
            }
        }
        for _ in 0..nodes {
            let mut changed = false;
            for i in 0..m {
                for j in 0..n {
                    let c = cost[[i, j]];
                    if dist[i] + c < dist[m + j] - 1e-15 {
                        dist[m + j] = dist[i] + c;
                        pred[m + j] = Some(i);
                        changed = true;
                    }
                    if flow[[i, j]] > tiny && dist[m + j] - c < dist[i] - 1e-15 {
                        dist[i] = dist[m + j] - c;
                        pred[i] = Some(m + j);
                        changed = true;
                    }
                }
            }
            if !changed {
                break;
            }
        }
        let sink = (0..n)
            .filter(|&j| rb[j] > tiny && dist[m + j].is_finite())
            .min_by(|&x, &y| dist[m + x].total_cmp(&dist[m + y]))
            .expect("feasible");
        let mut path = vec![m + sink];
        let mut node = m + sink;
        while let Some(p) = pred[node] {
            path.push(p);
            node = p;
            if node < m && ra[node] > tiny && pred[node].is_none() {
                break;
            }
        }
        let src = *path.last().unwrap();
        let mut delta = ra[src].min(rb[sink]);
        for w in path.windows(2) {
            let (to, from) = (w[0], w[1]);
            if from >= m {
                delta = delta.min(flow[[to, from - m]]);
            }
        }
        for w in path.windows(2) {
            let (to, from) = (w[0], w[1]);
            if from < m {
                flow[[from, to - m]] += delta;
            } else {
                flow[[to, from - m]] -= delta;
            }
        }
        ra[src] -= delta;
        rb[sink] -= delta;
    }
    (&flow * cost).sum()
}

/// `min_σ (1/n) Σ c_{i σ(i)}` over permutations (uniform masses), by Heap's algorithm.
pub fn brute_force_assignment(cost: &ndarray::Array2<f64>) -> f64 {
    let n = cost.nrows();
    let mut perm: Vec<usize> = (0..n).collect();
    let mut best = f64::INFINITY;
    let mut c = vec![0usize; n];
    let eval = |p: &[usize]| {
        p.iter()
            .enumerate()
            .map(|(i, &j)| cost[[i, j]])
            .sum::<f64>()
            / n as f64
    };
    best = best.min(eval(&perm));
    let mut i = 0;
    while i < n {
        if c[i] < i {
            if i % 2 == 0 {
                perm.swap(0, i);
            } else {
                perm.swap(c[i], i);
            }
            best = best.min(eval(&perm));
            c[i] += 1;
            i = 0;
        } else {
            c[i] = 0;
            i += 1;
        }
    }
    best
}

/// `W_2` between atoms on the line via sorted cumulative masses.
pub fn line_w2(xs: &[f64], a: &[f64], ys: &[f64], b: &[f64]) -> f64 {
    let sort = |p: &[f64], m: &[f64]| {
        let mut v: Vec<(f64, f64)> = p.iter().copied().zip(m.iter().copied()).collect();
        v.sort_by(|x, y| x.0.total_cmp(&y.0));
        v
    };
    let (u, v) = (sort(xs, a), sort(ys, b));
    let (mut i, mut j) = (0, 0);
    let (mut ru, mut rv) = (u[0].1, v[0].1);
    let mut cost = 0.0;
    while i < u.len() && j < v.len() {
        let m = ru.min(rv);
        cost += m * (u[i].0 - v[j].0).powi(2);
        ru -= m;
        rv -= m;
        if ru <= rv {
            i += 1;
            if i < u.len() {
                ru = u[i].1;
            }
        } else {
            j += 1;
            if j < v.len() {
                rv = v[j].1;
            }
        }
    }
    cost.sqrt()
}

/// Random probability vector with some exact zeros.
pub fn random_masses<R: Rng>(rng: &mut R, n: usize) -> Vec<f64> {
    let mut m: Vec<f64> = (0..n)
        .map(|_| {
            if rng.gen_bool(0.15) {
                0.0
            } else {
                rng.gen_range(0.01..1.0)
            }
        })
        .collect();
    if m.iter().all(|x| *x == 0.0) {
        m[0] = 1.0;
    }
    let s: f64 = m.iter().sum();
    m.iter_mut().for_each(|x| *x /= s);
    m
}

/// Euclidean distance matrix of random points in the unit square.
pub fn random_plane_metric<R: Rng>(rng: &mut R, n: usize) -> ndarray::Array2<f64> {
    let pts: Vec<(f64, f64)> = (0..n)
        .map(|_| (rng.gen::<f64>(), rng.gen::<f64>()))
        .collect();
    ndarray::Array2::from_shape_fn((n, n), |(i, j)| {
        ((pts[i].0 - pts[j].0).powi(2) + (pts[i].1 - pts[j].1).powi(2)).sqrt()
    })
}

/// `K = 0`, `N = 3` fixture on `[0, 3]` with a triangular dip of the given depth and
/// width 0.2 centred at 1, based at 0.
pub fn spiked_fixture(depth: f64, h: f64) -> cdkit::OneDimMmSpace {
    let kappa = cdkit::mm_core::make_spiked_profile(0.0, depth, 0.2, 1.0, 3.0, None).unwrap();
    cdkit::mm_core::make_cd_fixture(&kappa, 3.0, 1.0, 0.0, h)
        .unwrap()
        .with_base(0.0)
        .unwrap()
}

/// Flat interval `[0, len]` with unit density.
pub fn flat_space(len: f64, cells: usize, n: f64) -> cdkit::OneDimMmSpace {
    let k = CurvatureProfile::constant(len, 0.0, cells).unwrap();
    cdkit::OneDimMmSpace::new(len, vec![1.0; cells + 1], k, n, None).unwrap()
}

/// Cells of `space` lying inside `[a, b]`.
pub fn cells_in(space: &cdkit::OneDimMmSpace, a: f64, b: f64) -> Vec<usize> {
    (0..space.cells())
        .filter(|&j| space.node(j) >= a - 1e-12 && space.node(j + 1) <= b + 1e-12)
        .collect()
}

pub fn t_grid(points: usize) -> Vec<f64> {
    (0..points)
        .map(|i| i as f64 / (points - 1) as f64)
        .collect()
}
