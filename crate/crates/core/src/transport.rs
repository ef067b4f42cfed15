//! Exact discrete optimal transport, monotone plans on interval spaces, Rényi
//! entropy, coupling transfer and distance surrogates between finite spaces.

use crate::mm_core::{FiniteMmSpace, OneDimMmSpace};
use crate::quadrature::GaussLegendre;
use crate::{Error, Result};
use ndarray::Array2;
use serde::{Deserialize, Serialize};
use std::collections::VecDeque;

/// Tolerance on the total mass of a probability measure.
pub const MASS_TOL: f64 = 1e-12;
/// Tolerance on coupling marginals.
pub const MARGINAL_TOL: f64 = 1e-10;

/// A probability measure on the points (or cells) `support[i]` of some space.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "MeasureJson", into = "MeasureJson")]
pub struct DiscreteMeasure {
    support: Vec<usize>,
    masses: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
struct MeasureJson {
    support: Vec<usize>,
    masses: Vec<f64>,
}

impl TryFrom<MeasureJson> for DiscreteMeasure {
    type Error = Error;
    fn try_from(j: MeasureJson) -> Result<Self> {
        DiscreteMeasure::new(j.support, j.masses)
    }
}

impl From<DiscreteMeasure> for MeasureJson {
    fn from(m: DiscreteMeasure) -> Self {
        MeasureJson {
            support: m.support,
            masses: m.masses,
        }
    }
}

impl DiscreteMeasure {
    pub fn new(support: Vec<usize>, masses: Vec<f64>) -> Result<Self> {
        if support.len() != masses.len() || support.is_empty() {
            return Err(Error::InvalidMeasure(
                "support and masses must be nonempty and of equal length".into(),
            ));
        }
        if let Some(i) = masses.iter().position(|m| !(m.is_finite() && *m >= 0.0)) {
            return Err(Error::InvalidMeasure(format!(
                "mass[{i}] = {} is invalid",
                masses[i]
            )));
        }
        let total: f64 = masses.iter().sum();
        if (total - 1.0).abs() > MASS_TOL {
            return Err(Error::InvalidMeasure(format!(
                "total mass {total} is not 1"
            )));
        }
        let mut sorted = support.clone();
        sorted.sort_unstable();
        if sorted.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::InvalidMeasure(
                "support indices must be distinct".into(),
            ));
        }
        Ok(DiscreteMeasure { support, masses })
    }

    /// Rescales nonnegative masses to total one.
    pub fn normalized(support: Vec<usize>, masses: Vec<f64>) -> Result<Self> {
        let total: f64 = masses.iter().sum();
        if !(total > 0.0 && total.is_finite()) {
            return Err(Error::InvalidMeasure(format!(
                "cannot normalize total mass {total}"
            )));
        }
        DiscreteMeasure::new(support, masses.iter().map(|m| m / total).collect())
    }

    /// Dense masses over `0..masses.len()`, rescaled to total one.
    pub fn from_dense(masses: &[f64]) -> Result<Self> {
        DiscreteMeasure::normalized((0..masses.len()).collect(), masses.to_vec())
    }

    pub fn dirac(i: usize) -> Self {
        DiscreteMeasure {
            support: vec![i],
            masses: vec![1.0],
        }
    }

    pub fn uniform(support: Vec<usize>) -> Result<Self> {
        let n = support.len();
        DiscreteMeasure::normalized(support, vec![1.0; n])
    }

    pub fn support(&self) -> &[usize] {
        &self.support
    }

    pub fn masses(&self) -> &[f64] {
        &self.masses
    }

    pub fn len(&self) -> usize {
        self.support.len()
    }

    pub fn is_empty(&self) -> bool {
        self.support.is_empty()
    }

    /// Masses scattered into a vector of length `n`.
    pub fn to_dense(&self, n: usize) -> Result<Vec<f64>> {
        let mut out = vec![0.0; n];
        for (&i, &m) in self.support.iter().zip(&self.masses) {
            if i >= n {
                return Err(Error::InvalidMeasure(format!(
                    "support index {i} out of range {n}"
                )));
            }
            out[i] += m;
        }
        Ok(out)
    }
}

/// A transport plan `π_{ij}` between the supports of two measures.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(into = "CouplingJson", try_from = "CouplingJson")]
pub struct Coupling {
    rows: Vec<usize>,
    cols: Vec<usize>,
    plan: Array2<f64>,
}

#[derive(Serialize, Deserialize)]
struct CouplingJson {
    rows: Vec<usize>,
    cols: Vec<usize>,
    plan: Vec<Vec<f64>>,
}

impl From<Coupling> for CouplingJson {
    fn from(c: Coupling) -> Self {
        CouplingJson {
            rows: c.rows,
            cols: c.cols,
            plan: c.plan.outer_iter().map(|r| r.to_vec()).collect(),
        }
    }
}

impl TryFrom<CouplingJson> for Coupling {
    type Error = Error;
    fn try_from(j: CouplingJson) -> Result<Self> {
        let (m, n) = (j.rows.len(), j.cols.len());
        if j.plan.len() != m || j.plan.iter().any(|r| r.len() != n) {
            return Err(Error::InvalidMeasure(
                "coupling shape does not match rows/cols".into(),
            ));
        }
        let plan = Array2::from_shape_vec((m, n), j.plan.into_iter().flatten().collect())
            .map_err(|e| Error::InvalidMeasure(e.to_string()))?;
        Coupling::new(j.rows, j.cols, plan)
    }
}

impl Coupling {
    pub fn new(rows: Vec<usize>, cols: Vec<usize>, plan: Array2<f64>) -> Result<Self> {
        if plan.dim() != (rows.len(), cols.len()) {
            return Err(Error::InvalidMeasure(
                "coupling shape does not match rows/cols".into(),
            ));
        }
        if plan.iter().any(|p| !(p.is_finite() && *p >= 0.0)) {
            return Err(Error::InvalidMeasure(
                "coupling entries must be nonnegative".into(),
            ));
        }
        Ok(Coupling { rows, cols, plan })
    }

    /// The product coupling `μ0 ⊗ μ1`.
    pub fn product(mu0: &DiscreteMeasure, mu1: &DiscreteMeasure) -> Self {
        let plan = Array2::from_shape_fn((mu0.len(), mu1.len()), |(i, j)| {
            mu0.masses[i] * mu1.masses[j]
        });
        Coupling {
            rows: mu0.support.clone(),
            cols: mu1.support.clone(),
            plan,
        }
    }

    pub fn rows(&self) -> &[usize] {
        &self.rows
    }

    pub fn cols(&self) -> &[usize] {
        &self.cols
    }

    pub fn plan(&self) -> &Array2<f64> {
        &self.plan
    }

    pub fn row_sums(&self) -> Vec<f64> {
        self.plan.rows().into_iter().map(|r| r.sum()).collect()
    }

    pub fn col_sums(&self) -> Vec<f64> {
        self.plan.columns().into_iter().map(|c| c.sum()).collect()
    }

    /// Largest deviation of the marginals from the given masses.
    pub fn marginal_residual(&self, a: &[f64], b: &[f64]) -> f64 {
        let r = self
            .row_sums()
            .iter()
            .zip(a)
            .map(|(x, y)| (x - y).abs())
            .fold(0.0, f64::max);
        let c = self
            .col_sums()
            .iter()
            .zip(b)
            .map(|(x, y)| (x - y).abs())
            .fold(0.0, f64::max);
        r.max(c)
    }

    /// `Σ π_{ij} d(rows_i, cols_j)²` for a distance matrix indexed by space points.
    pub fn quadratic_cost(&self, dist: &Array2<f64>) -> f64 {
        self.plan
            .indexed_iter()
            .map(|((i, j), p)| p * dist[[self.rows[i], self.cols[j]]].powi(2))
            .sum()
    }
}

/// Exact transportation simplex (network simplex on the bipartite graph) for
/// `min Σ c_ij x_ij` subject to row sums `a` and column sums `b`.
///
/// Starts from the north-west corner basis and pivots on the most negative reduced
/// cost, switching to first-improving pivots after a run of degenerate steps.
pub fn solve_transport(a: &[f64], b: &[f64], cost: &Array2<f64>) -> Result<Array2<f64>> {
    let (m, n) = (a.len(), b.len());
    if m == 0 || n == 0 {
        return Err(Error::Marginals("empty marginal".into()));
    }
    if cost.dim() != (m, n) {
        return Err(Error::Marginals(format!(
            "cost has shape {:?}, expected ({m}, {n})",
            cost.dim()
        )));
    }
    if a.iter().chain(b).any(|v| !(v.is_finite() && *v >= 0.0)) {
        return Err(Error::Marginals(
            "marginal masses must be nonnegative".into(),
        ));
    }
    let (sa, sb): (f64, f64) = (a.iter().sum(), b.iter().sum());
    if (sa - sb).abs() > MARGINAL_TOL * sa.max(1.0) {
        return Err(Error::Marginals(format!(
            "total masses differ: {sa} vs {sb}"
        )));
    }
    if cost.iter().any(|c| !c.is_finite()) {
        return Err(Error::Marginals("cost must be finite".into()));
    }

    // North-west corner: a staircase of exactly m + n - 1 basic cells.
    let mut cells: Vec<(usize, usize)> = Vec::with_capacity(m + n - 1);
    let mut flow: Vec<f64> = Vec::with_capacity(m + n - 1);
    let (mut ra, mut rb) = (a.to_vec(), b.to_vec());
    let (mut i, mut j) = (0, 0);
    loop {
        let x = ra[i].min(rb[j]).max(0.0);
        cells.push((i, j));
        flow.push(x);
        ra[i] -= x;
        rb[j] -= x;
        if i == m - 1 && j == n - 1 {
            break;
        }
        if j == n - 1 || (i < m - 1 && ra[i] <= rb[j]) {
            i += 1;
        } else {
            j += 1;
        }
    }
    let mut basic = vec![false; m * n];
    for &(i, j) in &cells {
        basic[i * n + j] = true;
    }

    let scale = cost.iter().fold(0.0f64, |s, c| s.max(c.abs()));
    let eps = 1e-12 * (1.0 + scale);
    let nodes = m + n;
    let mut u = vec![0.0; m];
    let mut v = vec![0.0; n];
    let mut adj: Vec<Vec<usize>> = vec![Vec::new(); nodes];
    let mut parent: Vec<(usize, usize)> = vec![(usize::MAX, usize::MAX); nodes];
    let mut degenerate_run = 0usize;
    let max_iter = 50 * (m + n) * (m + n) + 1000;
    for _ in 0..max_iter {
        for list in adj.iter_mut() {
            list.clear();
        }
        for (e, &(i, j)) in cells.iter().enumerate() {
            adj[i].push(e);
            adj[m + j].push(e);
        }
        // Potentials from the spanning tree, u_0 = 0.
        let mut seen = vec![false; nodes];
        let mut queue = VecDeque::from([0usize]);
        seen[0] = true;
        u[0] = 0.0;
        while let Some(node) = queue.pop_front() {
            for &e in &adj[node] {
                let (i, j) = cells[e];
                let other = if node < m { m + j } else { i };
                if !seen[other] {
                    seen[other] = true;
                    if node < m {
                        v[j] = cost[[i, j]] - u[i];
                    } else {
                        u[i] = cost[[i, j]] - v[j];
                    }
                    queue.push_back(other);
                }
            }
        }
        // Entering cell.
        let bland = degenerate_run > m + n;
        let mut enter: Option<(usize, usize)> = None;
        let mut best = -eps;
        'scan: for i in 0..m {
            for j in 0..n {
                if basic[i * n + j] {
                    continue;
                }
                let r = cost[[i, j]] - u[i] - v[j];
                if r < best {
                    enter = Some((i, j));
                    if bland {
                        break 'scan;
                    }
                    best = r;
                }
            }
        }
        let Some((ei, ej)) = enter else {
            let mut x = Array2::zeros((m, n));
            for (&(i, j), &f) in cells.iter().zip(&flow) {
                x[[i, j]] += f.max(0.0);
            }
            return Ok(x);
        };
        // Tree path from row ei to column ej.
        parent
            .iter_mut()
            .for_each(|p| *p = (usize::MAX, usize::MAX));
        let mut queue = VecDeque::from([ei]);
        parent[ei] = (ei, usize::MAX);
        let target = m + ej;
        while let Some(node) = queue.pop_front() {
            if node == target {
                break;
            }
            for &e in &adj[node] {
                let (i, j) = cells[e];
                let other = if node < m { m + j } else { i };
                if parent[other].0 == usize::MAX {
                    parent[other] = (node, e);
                    queue.push_back(other);
                }
            }
        }
        // Walking back from the column: edges alternate -, +, -, ...
        let mut path = Vec::new();
        let mut node = target;
        while node != ei {
            let (prev, e) = parent[node];
            path.push(e);
            node = prev;
        }
        let mut theta = f64::INFINITY;
        let mut leave = usize::MAX;
        for (k, &e) in path.iter().enumerate() {
            if k % 2 == 0 && flow[e] < theta {
                theta = flow[e];
                leave = e;
            }
        }
        let theta = theta.max(0.0);
        degenerate_run = if theta <= 0.0 { degenerate_run + 1 } else { 0 };
        for (k, &e) in path.iter().enumerate() {
            if k % 2 == 0 {
                flow[e] = (flow[e] - theta).max(0.0);
            } else {
                flow[e] += theta;
            }
        }
        let (li, lj) = cells[leave];
        basic[li * n + lj] = false;
        basic[ei * n + ej] = true;
        cells[leave] = (ei, ej);
        flow[leave] = theta;
    }
    Err(Error::Solver(
        "transportation simplex did not converge".into(),
    ))
}

/// Exact `W_2` between measures on one space with distance matrix `dist`.
pub fn w2_exact(
    mu0: &DiscreteMeasure,
    mu1: &DiscreteMeasure,
    dist: &Array2<f64>,
) -> Result<(f64, Coupling)> {
    let npts = dist.nrows();
    if let Some(&i) = mu0.support.iter().chain(&mu1.support).find(|&&i| i >= npts) {
        return Err(Error::InvalidMeasure(format!(
            "support index {i} out of range {npts}"
        )));
    }
    let cost = Array2::from_shape_fn((mu0.len(), mu1.len()), |(i, j)| {
        dist[[mu0.support[i], mu1.support[j]]].powi(2)
    });
    let plan = solve_transport(&mu0.masses, &mu1.masses, &cost)?;
    let value: f64 = (&plan * &cost).sum();
    Ok((
        value.max(0.0).sqrt(),
        Coupling {
            rows: mu0.support.clone(),
            cols: mu1.support.clone(),
            plan,
        },
    ))
}

/// One weighted constant-speed geodesic `γ(t) = (1-t) start + t end` of an interval.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PlanGeodesic {
    pub start: f64,
    pub end: f64,
    pub weight: f64,
}

impl PlanGeodesic {
    pub fn at(&self, t: f64) -> f64 {
        (1.0 - t) * self.start + t * self.end
    }

    pub fn length(&self) -> f64 {
        (self.end - self.start).abs()
    }
}

/// Weighted family of geodesics of an interval space realizing an optimal coupling.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DynamicalPlan1D {
    pub geodesics: Vec<PlanGeodesic>,
}

impl DynamicalPlan1D {
    pub fn cost(&self) -> f64 {
        self.geodesics
            .iter()
            .map(|g| g.weight * g.length().powi(2))
            .sum()
    }

    /// No two geodesics cross: starts and ends are both nondecreasing.
    pub fn is_monotone(&self) -> bool {
        self.geodesics
            .windows(2)
            .all(|w| w[0].start <= w[1].start && w[0].end <= w[1].end)
    }
}

/// `W_2` between cell measures of an interval space, viewed as atoms at the cell
/// centers, via the monotone (quantile) coupling.
pub fn w2_1d(
    space: &OneDimMmSpace,
    mu0: &DiscreteMeasure,
    mu1: &DiscreteMeasure,
) -> Result<(f64, DynamicalPlan1D)> {
    let a = mu0.to_dense(space.cells())?;
    let b = mu1.to_dense(space.cells())?;
    let mut geodesics = Vec::with_capacity(a.len() + b.len());
    let (mut i, mut j) = (0, 0);
    let (mut ra, mut rb) = (a.clone(), b.clone());
    loop {
        while i < ra.len() && ra[i] <= 0.0 {
            i += 1;
        }
        while j < rb.len() && rb[j] <= 0.0 {
            j += 1;
        }
        if i == ra.len() || j == rb.len() {
            break;
        }
        let x = ra[i].min(rb[j]);
        geodesics.push(PlanGeodesic {
            start: space.cell_center(i),
            end: space.cell_center(j),
            weight: x,
        });
        ra[i] -= x;
        rb[j] -= x;
        if ra[i] <= rb[j] {
            ra[i] = 0.0;
        } else {
            rb[j] = 0.0;
        }
    }
    let plan = DynamicalPlan1D { geodesics };
    Ok((plan.cost().sqrt(), plan))
}

/// The pushforward `(e_t)_# Π` re-binned onto the cell centers together with its
/// density against the reference measure.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Interpolated {
    pub measure: DiscreteMeasure,
    pub density: Vec<f64>,
}

/// Pushforward of the plan at time `t`, splitting each atom linearly between the two
/// nearest cell centers.
pub fn interpolate(space: &OneDimMmSpace, plan: &DynamicalPlan1D, t: f64) -> Result<Interpolated> {
    if !(0.0..=1.0).contains(&t) {
        return Err(Error::domain("t", t, "must lie in [0, 1]"));
    }
    let cells = space.cells();
    let h = space.h();
    let mut masses = vec![0.0; cells];
    for g in &plan.geodesics {
        let u = g.at(t) / h - 0.5;
        if u <= 0.0 {
            masses[0] += g.weight;
        } else if u >= (cells - 1) as f64 {
            masses[cells - 1] += g.weight;
        } else {
            let k = u.floor() as usize;
            let frac = u - k as f64;
            masses[k] += g.weight * (1.0 - frac);
            if frac > 0.0 {
                masses[k + 1] += g.weight * frac;
            }
        }
    }
    let weights = space.cell_masses();
    let density = masses.iter().zip(&weights).map(|(m, w)| m / w).collect();
    let measure = DiscreteMeasure::from_dense(&masses)?;
    Ok(Interpolated { measure, density })
}

/// `S_N(μ | m) = -Σ ρ_i^{1-1/N} w_i` with `ρ_i = μ_i / w_i`; atoms of zero reference
/// weight form the singular part and contribute nothing.
pub fn renyi_entropy(masses: &[f64], weights: &[f64], n: f64) -> Result<f64> {
    if !(n > 1.0) {
        return Err(Error::domain("N", n, "Rényi entropy needs N > 1"));
    }
    if masses.len() != weights.len() {
        return Err(Error::InvalidMeasure(
            "masses and weights differ in length".into(),
        ));
    }
    let e = 1.0 - 1.0 / n;
    Ok(-masses
        .iter()
        .zip(weights)
        .filter(|(_, w)| **w > 0.0)
        .map(|(m, w)| (m / w).powf(e) * w)
        .sum::<f64>())
}

/// [`renyi_entropy`] of a measure on a finite space.
pub fn renyi_entropy_of(mu: &DiscreteMeasure, space: &FiniteMmSpace, n: f64) -> Result<f64> {
    renyi_entropy(&mu.to_dense(space.len())?, space.weights(), n)
}

/// Moves `μ ≪ m̄_1` to the second space through the disintegration of `q` over its
/// second marginal: `ρ_2(j) = Σ_i q_ij ρ(i) / m̄_2(j)`.
pub fn coupling_transfer(
    q: &Coupling,
    m1: &[f64],
    m2: &[f64],
    mu: &DiscreteMeasure,
) -> Result<DiscreteMeasure> {
    if q.rows.len() != m1.len() || q.cols.len() != m2.len() {
        return Err(Error::Marginals(
            "coupling shape does not match the spaces".into(),
        ));
    }
    let res = q.marginal_residual(m1, m2);
    if res > MARGINAL_TOL {
        return Err(Error::Marginals(format!(
            "coupling marginals off by {res:e}"
        )));
    }
    let dense = mu.to_dense(m1.len())?;
    if let Some(i) = (0..m1.len()).find(|&i| m1[i] <= 0.0 && dense[i] > 0.0) {
        return Err(Error::InvalidMeasure(format!(
            "measure has an atom at point {i} of zero reference weight"
        )));
    }
    let rho: Vec<f64> = dense
        .iter()
        .zip(m1)
        .map(|(m, w)| if *w > 0.0 { m / w } else { 0.0 })
        .collect();
    let out: Vec<f64> = (0..m2.len())
        .map(|j| (0..m1.len()).map(|i| q.plan[[i, j]] * rho[i]).sum())
        .collect();
    DiscreteMeasure::from_dense(&out)
}

fn require_normalized(x: &FiniteMmSpace, name: &str) -> Result<()> {
    let m = x.total_mass();
    if (m - 1.0).abs() > 1e-9 {
        return Err(Error::InvalidSpace(format!(
            "{name} must be normalized (mass {m})"
        )));
    }
    Ok(())
}

/// Cross distances `|x_i - y_j|` of two point sets on the real line.
pub fn line_cross_distances(xs: &[f64], ys: &[f64]) -> Array2<f64> {
    Array2::from_shape_fn((xs.len(), ys.len()), |(i, j)| (xs[i] - ys[j]).abs())
}

/// `W_2` of the two measures inside the glued space `X ⊔ Y` whose metric is `d_X`,
/// `d_Y` and the given cross distances: an upper bound for Sturm's `𝔻`.
pub fn sturm_d_upper(x: &FiniteMmSpace, y: &FiniteMmSpace, cross: &Array2<f64>) -> Result<f64> {
    require_normalized(x, "X")?;
    require_normalized(y, "Y")?;
    let (nx, ny) = (x.len(), y.len());
    if cross.dim() != (nx, ny) {
        return Err(Error::InvalidSpace(format!(
            "cross distances have shape {:?}, expected ({nx}, {ny})",
            cross.dim()
        )));
    }
    let glued = Array2::from_shape_fn((nx + ny, nx + ny), |(i, j)| match (i < nx, j < nx) {
        (true, true) => x.dist()[[i, j]],
        (false, false) => y.dist()[[i - nx, j - nx]],
        (true, false) => cross[[i, j - nx]],
        (false, true) => cross[[j, i - nx]],
    });
    let weights: Vec<f64> = x.weights().iter().chain(y.weights()).copied().collect();
    FiniteMmSpace::new(glued, weights, vec![0.0; nx + ny], None).map_err(|e| {
        Error::InvalidSpace(format!("cross distances do not glue to a metric: {e}"))
    })?;
    let cost = cross.mapv(|d| d * d);
    let plan = solve_transport(x.weights(), y.weights(), &cost)?;
    Ok((&plan * &cost).sum().max(0.0).sqrt())
}

/// Result of the Gromov–Wasserstein alternation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GwResult {
    pub value: f64,
    pub coupling: Coupling,
    pub iterations: usize,
}

fn gw_energy(
    dx2: &Array2<f64>,
    dy2: &Array2<f64>,
    dx: &Array2<f64>,
    dy: &Array2<f64>,
    p: &[f64],
    q: &[f64],
    pi: &Array2<f64>,
) -> (f64, Array2<f64>) {
    // (L ⊗ π)_{ij} = Σ_{i'j'} (dX_{ii'} - dY_{jj'})² π_{i'j'}
    //             = (dX² p)_i + (dY² q)_j - 2 (dX π dY)_{ij}
    let a = dx2.dot(&ndarray::ArrayView1::from(p));
    let b = dy2.dot(&ndarray::ArrayView1::from(q));
    let cross = dx.dot(pi).dot(dy);
    let grad = Array2::from_shape_fn(pi.dim(), |(i, j)| a[i] + b[j] - 2.0 * cross[[i, j]]);
    let e = (&grad * pi).sum();
    (e, grad)
}

/// Gromov–Wasserstein discrepancy `(ΣΣ |d_X(i,i') - d_Y(j,j')|² π_ij π_i'j')^{1/2}`
/// minimized by conditional-gradient steps (each an exact transport problem) from
/// `init`. The result is a local minimum, not a certified optimum.
pub fn gw_from(x: &FiniteMmSpace, y: &FiniteMmSpace, init: Coupling) -> Result<GwResult> {
    let (p, q) = (x.weights(), y.weights());
    let res = init.marginal_residual(p, q);
    if init.plan.dim() != (x.len(), y.len()) || res > 1e-8 {
        return Err(Error::Marginals(
            "initial coupling does not couple the two spaces".into(),
        ));
    }
    let (dx, dy) = (x.dist(), y.dist());
    let (dx2, dy2) = (dx.mapv(|d| d * d), dy.mapv(|d| d * d));
    let mut pi = init.plan;
    let (mut energy, mut grad) = gw_energy(&dx2, &dy2, dx, dy, p, q, &pi);
    let mut iterations = 0;
    for _ in 0..200 {
        iterations += 1;
        let target = solve_transport(p, q, &grad)?;
        // Full alternation step first; a line search along the same direction otherwise.
        let (e_full, g_full) = gw_energy(&dx2, &dy2, dx, dy, p, q, &target);
        let floor = 1e-15 * (1.0 + energy.abs());
        if e_full < energy - floor {
            pi = target;
            energy = e_full;
            grad = g_full;
            continue;
        }
        let dir = &target - &pi;
        let slope = 2.0 * (&grad * &dir).sum();
        let zero = vec![0.0; p.len()];
        let zero_q = vec![0.0; q.len()];
        let (_, gdir) = gw_energy(&dx2, &dy2, dx, dy, &zero, &zero_q, &dir);
        let curv = (&gdir * &dir).sum();
        if slope >= -floor || curv <= 0.0 {
            break;
        }
        let alpha = (-slope / (2.0 * curv)).min(1.0);
        let cand = (&pi + &(alpha * &dir)).mapv(|v| v.max(0.0));
        let (e, g) = gw_energy(&dx2, &dy2, dx, dy, p, q, &cand);
        if e >= energy - floor {
            break;
        }
        pi = cand;
        energy = e;
        grad = g;
    }
    let coupling = Coupling {
        rows: (0..x.len()).collect(),
        cols: (0..y.len()).collect(),
        plan: pi,
    };
    Ok(GwResult {
        value: energy.max(0.0).sqrt(),
        coupling,
        iterations,
    })
}

/// Monotone coupling of the distance-to-base profiles of two pointed spaces.
fn radial_coupling(x: &FiniteMmSpace, y: &FiniteMmSpace) -> Option<Coupling> {
    let (ox, oy) = (x.base()?, y.base()?);
    let order = |s: &FiniteMmSpace, o: usize| {
        let mut idx: Vec<usize> = (0..s.len()).collect();
        idx.sort_by(|&a, &b| {
            s.dist()[[o, a]]
                .total_cmp(&s.dist()[[o, b]])
                .then(a.cmp(&b))
        });
        idx
    };
    let (ix, iy) = (order(x, ox), order(y, oy));
    let mut plan = Array2::zeros((x.len(), y.len()));
    let (mut ra, mut rb): (Vec<f64>, Vec<f64>) = (
        ix.iter().map(|&i| x.weights()[i]).collect(),
        iy.iter().map(|&j| y.weights()[j]).collect(),
    );
    let (mut a, mut b) = (0, 0);
    while a < ra.len() && b < rb.len() {
        let m = ra[a].min(rb[b]);
        plan[[ix[a], iy[b]]] += m;
        ra[a] -= m;
        rb[b] -= m;
        if ra[a] <= rb[b] {
            a += 1;
        } else {
            b += 1;
        }
    }
    Some(Coupling {
        rows: (0..x.len()).collect(),
        cols: (0..y.len()).collect(),
        plan,
    })
}

/// [`gw_from`] started from the product coupling and, for pointed spaces, also from
/// the radial monotone coupling; the smaller local minimum is returned.
pub fn gw_surrogate(x: &FiniteMmSpace, y: &FiniteMmSpace) -> Result<GwResult> {
    require_normalized(x, "X")?;
    require_normalized(y, "Y")?;
    let mx = DiscreteMeasure::new((0..x.len()).collect(), x.weights().to_vec())?;
    let my = DiscreteMeasure::new((0..y.len()).collect(), y.weights().to_vec())?;
    let mut best = gw_from(x, y, Coupling::product(&mx, &my))?;
    if let Some(init) = radial_coupling(x, y) {
        let other = gw_from(x, y, init)?;
        if other.value < best.value {
            best = other;
        }
    }
    Ok(best)
}

/// The continuous monotone rearrangement between two measures on an interval space
/// whose densities against the reference measure are constant on each cell.
///
/// Both measures are parameterized by their quantile level `s ∈ [0, 1]`.
#[derive(Debug, Clone)]
pub struct MonotonePlan<'a> {
    space: &'a OneDimMmSpace,
    masses: [Vec<f64>; 2],
    cumulative: [Vec<f64>; 2],
    reference: Vec<f64>,
    weights: Vec<f64>,
}

/// Point and density `ρ = dμ/dm` at a quantile level.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuantilePoint {
    pub x: f64,
    pub rho: f64,
}

impl<'a> MonotonePlan<'a> {
    pub fn new(
        space: &'a OneDimMmSpace,
        mu0: &DiscreteMeasure,
        mu1: &DiscreteMeasure,
    ) -> Result<Self> {
        let m0 = mu0.to_dense(space.cells())?;
        let m1 = mu1.to_dense(space.cells())?;
        let cum = |m: &[f64]| {
            let mut c = vec![0.0];
            for v in m {
                c.push(c.last().unwrap() + v);
            }
            let total = *c.last().unwrap();
            c.iter_mut().for_each(|x| *x /= total);
            c
        };
        let weights = space.cell_masses();
        let mut reference = vec![0.0];
        for w in &weights {
            reference.push(reference.last().unwrap() + w);
        }
        Ok(MonotonePlan {
            space,
            cumulative: [cum(&m0), cum(&m1)],
            masses: [m0, m1],
            reference,
            weights,
        })
    }

    pub fn space(&self) -> &OneDimMmSpace {
        self.space
    }

    /// Quantile levels where either quantile function changes cell.
    pub fn breakpoints(&self) -> Vec<f64> {
        let mut s: Vec<f64> = self.cumulative[0]
            .iter()
            .chain(&self.cumulative[1])
            .map(|v| v.clamp(0.0, 1.0))
            .collect();
        s.push(0.0);
        s.push(1.0);
        s.sort_by(f64::total_cmp);
        s.dedup_by(|a, b| (*a - *b).abs() <= 1e-15);
        s
    }

    fn quantile(&self, side: usize, s: f64) -> QuantilePoint {
        let cum = &self.cumulative[side];
        let cells = self.masses[side].len();
        let mut k = cum
            .partition_point(|&c| c <= s)
            .saturating_sub(1)
            .min(cells - 1);
        while self.masses[side][k] <= 0.0 && k + 1 < cells {
            k += 1;
        }
        let total: f64 = self.masses[side].iter().sum();
        let rho = self.masses[side][k] / total / self.weights[k];
        let target = self.reference[k] + ((s - cum[k]) / rho).max(0.0);
        QuantilePoint {
            x: self
                .space
                .position_of_mass(target.min(self.reference[k + 1])),
            rho,
        }
    }

    pub fn start(&self, s: f64) -> QuantilePoint {
        self.quantile(0, s)
    }

    pub fn end(&self, s: f64) -> QuantilePoint {
        self.quantile(1, s)
    }

    /// Gauss nodes and weights on every piece between breakpoints.
    pub fn nodes(&self, rule: &GaussLegendre) -> Vec<(f64, f64)> {
        self.breakpoints()
            .windows(2)
            .flat_map(|w| rule.mapped(w[0], w[1]).collect::<Vec<_>>())
            .collect()
    }

    /// `W_2` of the two absolutely continuous measures.
    pub fn w2(&self) -> f64 {
        self.nodes(GaussLegendre::ten())
            .iter()
            .map(|&(s, w)| w * (self.end(s).x - self.start(s).x).powi(2))
            .sum::<f64>()
            .sqrt()
    }

    /// `S_N(μ_t)` for the displacement interpolant, using that `μ_t` has Lebesgue
    /// density `1 / ∂_s y_t` at `y_t(s) = (1-t) x_0(s) + t x_1(s)`.
    pub fn entropy_at(&self, t: f64, n: f64, nodes: &[(f64, f64)]) -> f64 {
        -nodes
            .iter()
            .map(|&(s, w)| w * self.interpolant_term(s, t).powf(1.0 / n))
            .sum::<f64>()
    }

    /// `m(y_t) · ∂_s y_t`, which equals `1 / ρ_t(y_t)`.
    pub fn interpolant_term(&self, s: f64, t: f64) -> f64 {
        let (a, b) = (self.start(s), self.end(s));
        let y = (1.0 - t) * a.x + t * b.x;
        let my = self.space.density_at(y);
        let da = self.space.density_at(a.x);
        let db = self.space.density_at(b.x);
        let mut term = 0.0;
        if t < 1.0 {
            term += (1.0 - t) * my / (a.rho * da);
        }
        if t > 0.0 {
            term += t * my / (b.rho * db);
        }
        term
    }
}
