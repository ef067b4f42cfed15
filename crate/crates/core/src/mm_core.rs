//! Finite and one-dimensional metric measure spaces, integral curvature excess and
//! fixture generators.

use crate::comparison_ode::{pi_k, sin_k};
use crate::integrate::{integrate, StepControl};
use crate::quadrature::GaussLegendre;
use crate::{CurvatureProfile, Error, Result};
use ndarray::Array2;
use petgraph::graph::{NodeIndex, UnGraph};
use rand::{Rng, SeedableRng};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

/// Largest size for which the triangle inequality is checked on every triple.
const EXHAUSTIVE_TRIANGLE: usize = 300;
const SAMPLED_TRIPLES: usize = 200_000;

/// Relative slack used for closed-ball membership `d ≤ r`.
const BALL_SLACK: f64 = 1e-12;

fn in_ball(d: f64, r: f64) -> bool {
    d <= r + BALL_SLACK * (1.0 + r)
}

/// A finite metric measure space with curvature samples and an optional base point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "FiniteJson", into = "FiniteJson")]
pub struct FiniteMmSpace {
    dist: Array2<f64>,
    weights: Vec<f64>,
    kappa: Vec<f64>,
    base: Option<usize>,
}

#[derive(Serialize, Deserialize)]
struct FiniteJson {
    dist: Vec<Vec<f64>>,
    weights: Vec<f64>,
    kappa: Vec<f64>,
    #[serde(default)]
    base: Option<usize>,
}

impl TryFrom<FiniteJson> for FiniteMmSpace {
    type Error = Error;
    fn try_from(j: FiniteJson) -> Result<Self> {
        let n = j.dist.len();
        if j.dist.iter().any(|row| row.len() != n) {
            return Err(Error::InvalidSpace("dist must be a square matrix".into()));
        }
        let flat: Vec<f64> = j.dist.into_iter().flatten().collect();
        let dist = Array2::from_shape_vec((n, n), flat)
            .map_err(|e| Error::InvalidSpace(format!("dist: {e}")))?;
        FiniteMmSpace::new(dist, j.weights, j.kappa, j.base)
    }
}

impl From<FiniteMmSpace> for FiniteJson {
    fn from(x: FiniteMmSpace) -> Self {
        FiniteJson {
            dist: x.dist.outer_iter().map(|r| r.to_vec()).collect(),
            weights: x.weights,
            kappa: x.kappa,
            base: x.base,
        }
    }
}

impl FiniteMmSpace {
    pub fn new(
        dist: Array2<f64>,
        weights: Vec<f64>,
        kappa: Vec<f64>,
        base: Option<usize>,
    ) -> Result<Self> {
        let n = weights.len();
        if n < 2 {
            return Err(Error::InvalidSpace(
                "a space needs at least two points".into(),
            ));
        }
        if dist.dim() != (n, n) {
            return Err(Error::InvalidSpace(format!(
                "dist has shape {:?}, expected ({n}, {n})",
                dist.dim()
            )));
        }
        if kappa.len() != n {
            return Err(Error::InvalidSpace(format!(
                "kappa has {} entries, expected {n}",
                kappa.len()
            )));
        }
        if let Some(i) = weights.iter().position(|w| !(w.is_finite() && *w > 0.0)) {
            return Err(Error::InvalidSpace(format!(
                "weights[{i}] = {} must be positive",
                weights[i]
            )));
        }
        if let Some(i) = kappa.iter().position(|k| !k.is_finite()) {
            return Err(Error::InvalidSpace(format!("kappa[{i}] is not finite")));
        }
        if let Some(b) = base {
            if b >= n {
                return Err(Error::InvalidSpace(format!(
                    "base {b} out of range for {n} points"
                )));
            }
        }
        let diam = dist.iter().copied().fold(0.0, f64::max);
        for ((i, j), &d) in dist.indexed_iter() {
            if !(d.is_finite() && d >= 0.0) {
                return Err(Error::InvalidSpace(format!(
                    "dist[{i}][{j}] = {d} is not a distance"
                )));
            }
            if i == j && d != 0.0 {
                return Err(Error::InvalidSpace(format!(
                    "dist[{i}][{i}] = {d} must be zero"
                )));
            }
            if (d - dist[[j, i]]).abs() > 1e-12 * (1.0 + diam) {
                return Err(Error::InvalidSpace(format!(
                    "dist is not symmetric at ({i}, {j})"
                )));
            }
        }
        let space = FiniteMmSpace {
            dist,
            weights,
            kappa,
            base,
        };
        space.check_triangle(1e-9 * diam)?;
        Ok(space)
    }

    fn check_triangle(&self, tol: f64) -> Result<()> {
        let n = self.len();
        let d = &self.dist;
        let bad = |i: usize, j: usize, k: usize| d[[i, j]] > d[[i, k]] + d[[k, j]] + tol;
        let report = |i, j, k| {
            Err(Error::InvalidSpace(format!(
                "triangle inequality fails: d({i},{j}) > d({i},{k}) + d({k},{j})"
            )))
        };
        if n <= EXHAUSTIVE_TRIANGLE {
            for i in 0..n {
                for j in (i + 1)..n {
                    for k in 0..n {
                        if bad(i, j, k) {
                            return report(i, j, k);
                        }
                    }
                }
            }
        } else {
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(0x5eed);
            for _ in 0..SAMPLED_TRIPLES {
                let (i, j, k) = (
                    rng.gen_range(0..n),
                    rng.gen_range(0..n),
                    rng.gen_range(0..n),
                );
                if bad(i, j, k) {
                    return report(i, j, k);
                }
            }
        }
        Ok(())
    }

    /// Points on the real line at the given positions.
    pub fn on_line(
        xs: &[f64],
        weights: Vec<f64>,
        kappa: Vec<f64>,
        base: Option<usize>,
    ) -> Result<Self> {
        let n = xs.len();
        let dist = Array2::from_shape_fn((n, n), |(i, j)| (xs[i] - xs[j]).abs());
        FiniteMmSpace::new(dist, weights, kappa, base)
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn dist(&self) -> &Array2<f64> {
        &self.dist
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn kappa(&self) -> &[f64] {
        &self.kappa
    }

    pub fn base(&self) -> Option<usize> {
        self.base
    }

    pub fn with_base(mut self, base: usize) -> Result<Self> {
        if base >= self.len() {
            return Err(Error::InvalidSpace(format!("base {base} out of range")));
        }
        self.base = Some(base);
        Ok(self)
    }

    pub fn with_kappa(mut self, kappa: Vec<f64>) -> Result<Self> {
        if kappa.len() != self.len() || kappa.iter().any(|k| !k.is_finite()) {
            return Err(Error::InvalidSpace(
                "kappa must have one finite entry per point".into(),
            ));
        }
        self.kappa = kappa;
        Ok(self)
    }

    pub fn total_mass(&self) -> f64 {
        self.weights.iter().sum()
    }

    pub fn diameter(&self) -> f64 {
        self.dist.iter().copied().fold(0.0, f64::max)
    }

    /// Mass of the closed ball `B̄_r(center)`.
    pub fn ball_mass(&self, center: usize, r: f64) -> f64 {
        self.dist
            .row(center)
            .iter()
            .zip(&self.weights)
            .filter(|(d, _)| in_ball(**d, r))
            .map(|(_, w)| w)
            .sum()
    }

    fn scale_weights(&self, factor: f64) -> Self {
        let mut out = self.clone();
        out.weights.iter_mut().for_each(|w| *w *= factor);
        out
    }

    /// Weights scaled to total mass one.
    pub fn normalize(&self) -> Result<Self> {
        let m = self.total_mass();
        if !(m > 0.0 && m.is_finite()) {
            return Err(Error::InvalidSpace(format!(
                "total mass {m} cannot be normalized"
            )));
        }
        if m == 1.0 {
            return Ok(self.clone());
        }
        Ok(self.scale_weights(1.0 / m))
    }

    /// Weights scaled so that `m(B̄_1(o)) = 1`.
    pub fn normalize_pointed(&self) -> Result<Self> {
        let o = self.require_base()?;
        let m = self.ball_mass(o, 1.0);
        if !(m > 0.0) {
            return Err(Error::InvalidSpace(
                "the unit ball around the base point is empty".into(),
            ));
        }
        if m == 1.0 {
            return Ok(self.clone());
        }
        Ok(self.scale_weights(1.0 / m))
    }

    fn require_base(&self) -> Result<usize> {
        self.base
            .ok_or_else(|| Error::InvalidSpace("operation needs a base point".into()))
    }

    /// `k_[X](κ,p,K) = diam² · (Σ (κ_i - K)_-^p w̄_i)^{1/p}` with normalized weights `w̄`.
    pub fn excess_k(&self, p: f64, k: f64) -> Result<f64> {
        check_p(p)?;
        let total = self.total_mass();
        let sum: f64 = self
            .kappa
            .iter()
            .zip(&self.weights)
            .map(|(kap, w)| neg_part(kap - k).powf(p) * w / total)
            .sum();
        Ok(self.diameter().powi(2) * sum.powf(1.0 / p))
    }

    /// `k_[X,o](κ,p,K,R) = R² · (Σ_{d(o,i) ≤ R} (κ_i - K)_-^p w_i)^{1/p}` on a
    /// pointed space normalized by `m(B̄_1(o)) = 1`.
    pub fn excess_k_pointed(&self, p: f64, k: f64, radius: f64) -> Result<f64> {
        check_p(p)?;
        if !(radius > 0.0) {
            return Err(Error::domain("R", radius, "must be positive"));
        }
        let o = self.require_base()?;
        let unit = self.ball_mass(o, 1.0);
        if (unit - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidSpace(format!(
                "space is not pointed-normalized: m(B_1(o)) = {unit}; call normalize_pointed first"
            )));
        }
        let sum: f64 = (0..self.len())
            .filter(|&i| in_ball(self.dist[[o, i]], radius))
            .map(|i| neg_part(self.kappa[i] - k).powf(p) * self.weights[i])
            .sum();
        Ok(radius * radius * sum.powf(1.0 / p))
    }

    /// Distances multiplied by `r`, curvature by `r^{-2}`, weights unchanged.
    pub fn rescale(&self, r: f64) -> Result<Self> {
        if !(r > 0.0 && r.is_finite()) {
            return Err(Error::domain("r", r, "scale factor must be positive"));
        }
        let mut out = self.clone();
        out.dist.mapv_inplace(|d| d * r);
        out.kappa.iter_mut().for_each(|k| *k /= r * r);
        Ok(out)
    }

    /// Points reordered so that new point `i` is old point `perm[i]`.
    pub fn relabel(&self, perm: &[usize]) -> Result<Self> {
        let n = self.len();
        let mut seen = vec![false; n];
        if perm.len() != n
            || perm
                .iter()
                .any(|&p| p >= n || std::mem::replace(&mut seen[p], true))
        {
            return Err(Error::InvalidSpace(
                "relabeling must be a permutation".into(),
            ));
        }
        let dist = Array2::from_shape_fn((n, n), |(i, j)| self.dist[[perm[i], perm[j]]]);
        let base = self
            .base
            .map(|b| perm.iter().position(|&p| p == b).unwrap());
        Ok(FiniteMmSpace {
            dist,
            weights: perm.iter().map(|&p| self.weights[p]).collect(),
            kappa: perm.iter().map(|&p| self.kappa[p]).collect(),
            base,
        })
    }
}

fn check_p(p: f64) -> Result<()> {
    if p >= 1.0 && p.is_finite() {
        Ok(())
    } else {
        Err(Error::domain("p", p, "must satisfy p >= 1"))
    }
}

fn neg_part(x: f64) -> f64 {
    (-x).max(0.0)
}

/// The interval `[0, L]` with reference density sampled on a uniform grid
/// (piecewise-linear between nodes), a curvature profile and a dimension bound.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "OneDimJson", into = "OneDimJson")]
pub struct OneDimMmSpace {
    length: f64,
    density: Vec<f64>,
    kappa: CurvatureProfile,
    n: f64,
    base: Option<f64>,
    cumulative: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
struct OneDimJson {
    #[serde(rename = "L")]
    length: f64,
    #[serde(default)]
    h: Option<f64>,
    density: Vec<f64>,
    kappa: CurvatureProfile,
    #[serde(rename = "N")]
    n: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    base: Option<f64>,
}

impl TryFrom<OneDimJson> for OneDimMmSpace {
    type Error = Error;
    fn try_from(j: OneDimJson) -> Result<Self> {
        let space = OneDimMmSpace::new(j.length, j.density, j.kappa, j.n, j.base)?;
        if let Some(h) = j.h {
            if (h - space.h()).abs() > 1e-9 * space.h() {
                return Err(Error::InvalidSpace(format!(
                    "h = {h} does not match L / (len(density) - 1) = {}",
                    space.h()
                )));
            }
        }
        Ok(space)
    }
}

impl From<OneDimMmSpace> for OneDimJson {
    fn from(s: OneDimMmSpace) -> Self {
        OneDimJson {
            length: s.length,
            h: Some(s.h()),
            density: s.density,
            kappa: s.kappa,
            n: s.n,
            base: s.base,
        }
    }
}

impl OneDimMmSpace {
    pub fn new(
        length: f64,
        density: Vec<f64>,
        kappa: CurvatureProfile,
        n: f64,
        base: Option<f64>,
    ) -> Result<Self> {
        if !(length > 0.0 && length.is_finite()) {
            return Err(Error::InvalidSpace(format!(
                "L = {length} must be positive"
            )));
        }
        if density.len() < 3 {
            return Err(Error::InvalidSpace(
                "density needs at least 3 samples".into(),
            ));
        }
        if let Some(i) = density.iter().position(|d| !(d.is_finite() && *d >= 0.0)) {
            return Err(Error::InvalidSpace(format!(
                "density[{i}] = {} is invalid",
                density[i]
            )));
        }
        let last = density.len() - 1;
        if let Some(i) = (1..last).find(|&i| density[i] <= 0.0) {
            return Err(Error::InvalidSpace(format!(
                "density must be positive inside the interval (density[{i}] = {})",
                density[i]
            )));
        }
        if (kappa.length() - length).abs() > 1e-9 * length {
            return Err(Error::InvalidSpace(format!(
                "kappa profile length {} differs from L = {length}",
                kappa.length()
            )));
        }
        if !(n >= 2.0 && n.is_finite()) {
            return Err(Error::domain("N", n, "must satisfy 2 <= N < inf"));
        }
        if let Some(b) = base {
            if !(0.0..=length).contains(&b) {
                return Err(Error::InvalidSpace(format!(
                    "base {b} outside [0, {length}]"
                )));
            }
        }
        let h = length / last as f64;
        let mut cumulative = Vec::with_capacity(density.len());
        cumulative.push(0.0);
        for k in 0..last {
            let prev = cumulative[k];
            cumulative.push(prev + 0.5 * h * (density[k] + density[k + 1]));
        }
        Ok(OneDimMmSpace {
            length,
            density,
            kappa,
            n,
            base,
            cumulative,
        })
    }

    pub fn length(&self) -> f64 {
        self.length
    }

    pub fn cells(&self) -> usize {
        self.density.len() - 1
    }

    pub fn h(&self) -> f64 {
        self.length / self.cells() as f64
    }

    pub fn node(&self, j: usize) -> f64 {
        if j == self.cells() {
            self.length
        } else {
            j as f64 * self.h()
        }
    }

    pub fn cell_center(&self, j: usize) -> f64 {
        (j as f64 + 0.5) * self.h()
    }

    /// Index of the cell containing `x` (the last cell for `x = L`).
    pub fn cell_of(&self, x: f64) -> usize {
        ((x / self.h()).floor().max(0.0) as usize).min(self.cells() - 1)
    }

    pub fn density(&self) -> &[f64] {
        &self.density
    }

    pub fn density_at(&self, x: f64) -> f64 {
        let j = self.cell_of(x.clamp(0.0, self.length));
        let w = ((x - self.node(j)) / self.h()).clamp(0.0, 1.0);
        self.density[j] * (1.0 - w) + self.density[j + 1] * w
    }

    pub fn kappa(&self) -> &CurvatureProfile {
        &self.kappa
    }

    pub fn n(&self) -> f64 {
        self.n
    }

    pub fn base(&self) -> Option<f64> {
        self.base
    }

    pub fn with_base(mut self, base: f64) -> Result<Self> {
        if !(0.0..=self.length).contains(&base) {
            return Err(Error::InvalidSpace(format!(
                "base {base} outside [0, {}]",
                self.length
            )));
        }
        self.base = Some(base);
        Ok(self)
    }

    /// Reference mass of each grid cell.
    pub fn cell_masses(&self) -> Vec<f64> {
        self.cumulative.windows(2).map(|w| w[1] - w[0]).collect()
    }

    pub fn total_mass(&self) -> f64 {
        *self.cumulative.last().unwrap()
    }

    /// `m([0, x])`, exact for the piecewise-linear density.
    pub fn mass_below(&self, x: f64) -> f64 {
        if x <= 0.0 {
            return 0.0;
        }
        if x >= self.length {
            return self.total_mass();
        }
        let j = self.cell_of(x);
        let d = x - self.node(j);
        let slope = (self.density[j + 1] - self.density[j]) / self.h();
        self.cumulative[j] + self.density[j] * d + 0.5 * slope * d * d
    }

    /// `m([a, b])`.
    pub fn interval_mass(&self, a: f64, b: f64) -> f64 {
        if b <= a {
            return 0.0;
        }
        self.mass_below(b) - self.mass_below(a)
    }

    /// Mass of the closed ball `B̄_r(x) = [x - r, x + r] ∩ [0, L]`.
    pub fn ball_mass(&self, x: f64, r: f64) -> f64 {
        self.interval_mass((x - r).max(0.0), (x + r).min(self.length))
    }

    /// Smallest `x` with `m([0, x]) = target` (inverse of [`mass_below`](Self::mass_below)).
    pub fn position_of_mass(&self, target: f64) -> f64 {
        if target <= 0.0 {
            return 0.0;
        }
        if target >= self.total_mass() {
            return self.length;
        }
        let j = self
            .cumulative
            .partition_point(|&c| c <= target)
            .saturating_sub(1)
            .min(self.cells() - 1);
        let rem = target - self.cumulative[j];
        let (d0, d1) = (self.density[j], self.density[j + 1]);
        let h = self.h();
        let a = 0.5 * (d1 - d0) / h;
        // Solve a δ² + d0 δ = rem for δ in [0, h] (stable form of the quadratic root).
        let delta = if a.abs() < 1e-300 {
            rem / d0
        } else {
            2.0 * rem / (d0 + (d0 * d0 + 4.0 * a * rem).max(0.0).sqrt())
        };
        (self.node(j) + delta.clamp(0.0, h)).min(self.length)
    }

    fn scaled_density(&self, factor: f64) -> Result<Self> {
        OneDimMmSpace::new(
            self.length,
            self.density.iter().map(|d| d * factor).collect(),
            self.kappa.clone(),
            self.n,
            self.base,
        )
    }

    pub fn normalize(&self) -> Result<Self> {
        let m = self.total_mass();
        if !(m > 0.0 && m.is_finite()) {
            return Err(Error::InvalidSpace(format!(
                "total mass {m} cannot be normalized"
            )));
        }
        self.scaled_density(1.0 / m)
    }

    /// Density scaled so that `m(B̄_1(o)) = 1`.
    pub fn normalize_pointed(&self) -> Result<Self> {
        let o = self
            .base
            .ok_or_else(|| Error::InvalidSpace("operation needs a base point".into()))?;
        let m = self.ball_mass(o, 1.0);
        if !(m > 0.0) {
            return Err(Error::InvalidSpace(
                "the unit ball around the base point is empty".into(),
            ));
        }
        self.scaled_density(1.0 / m)
    }

    /// `∫_a^b (κ - K)_-^p dm`, integrating exactly between breakpoints of κ, the
    /// density and the crossings `κ = K`.
    pub fn excess_integral(&self, p: f64, k: f64, a: f64, b: f64) -> f64 {
        if b <= a {
            return 0.0;
        }
        let mut pts = vec![a, b];
        for j in 1..self.cells() {
            pts.push(self.node(j));
        }
        for j in 1..self.kappa.cells() {
            pts.push(self.kappa.node(j));
        }
        pts.retain(|&x| x >= a && x <= b);
        pts.sort_by(f64::total_cmp);
        pts.dedup();
        let mut full = Vec::with_capacity(pts.len() * 2);
        for w in pts.windows(2) {
            full.push(w[0]);
            let (k0, k1) = (self.kappa.eval(w[0]) - k, self.kappa.eval(w[1]) - k);
            if k0 * k1 < 0.0 {
                full.push(w[0] + (w[1] - w[0]) * k0 / (k0 - k1));
            }
        }
        full.push(b);
        let rule = GaussLegendre::ten();
        full.windows(2)
            .map(|w| {
                rule.integrate(
                    |x| neg_part(self.kappa.eval(x) - k).powf(p) * self.density_at(x),
                    w[0],
                    w[1],
                )
            })
            .sum()
    }

    /// `k_[X](κ,p,K) = L² (∫(κ-K)_-^p dm̄)^{1/p}`.
    pub fn excess_k(&self, p: f64, k: f64) -> Result<f64> {
        check_p(p)?;
        let integral = self.excess_integral(p, k, 0.0, self.length) / self.total_mass();
        Ok(self.length.powi(2) * integral.powf(1.0 / p))
    }

    /// `k_[X,o](κ,p,K,R) = R² (∫_{B̄_R(o)} (κ-K)_-^p dm)^{1/p}`; requires `m(B̄_1(o)) = 1`.
    pub fn excess_k_pointed(&self, p: f64, k: f64, radius: f64) -> Result<f64> {
        check_p(p)?;
        if !(radius > 0.0) {
            return Err(Error::domain("R", radius, "must be positive"));
        }
        let o = self
            .base
            .ok_or_else(|| Error::InvalidSpace("operation needs a base point".into()))?;
        let unit = self.ball_mass(o, 1.0);
        if (unit - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidSpace(format!(
                "space is not pointed-normalized: m(B_1(o)) = {unit}; call normalize_pointed first"
            )));
        }
        let integral =
            self.excess_integral(p, k, (o - radius).max(0.0), (o + radius).min(self.length));
        Ok(radius * radius * integral.powf(1.0 / p))
    }

    /// Lengths multiplied by `r`, curvature by `r^{-2}`; the measure is carried along.
    pub fn rescale(&self, r: f64) -> Result<Self> {
        if !(r > 0.0 && r.is_finite()) {
            return Err(Error::domain("r", r, "scale factor must be positive"));
        }
        let kappa = CurvatureProfile::new(
            self.length * r,
            self.kappa.samples().iter().map(|k| k / (r * r)).collect(),
        )?;
        OneDimMmSpace::new(
            self.length * r,
            self.density.iter().map(|d| d / r).collect(),
            kappa,
            self.n,
            self.base.map(|b| b * r),
        )
    }

    /// Atoms at the cell centers carrying the cell masses.
    pub fn to_finite(&self) -> Result<FiniteMmSpace> {
        let xs: Vec<f64> = (0..self.cells()).map(|j| self.cell_center(j)).collect();
        let kappa = xs.iter().map(|&x| self.kappa.eval(x)).collect();
        let base = self.base.map(|b| self.cell_of(b));
        FiniteMmSpace::on_line(&xs, self.cell_masses(), kappa, base)
    }
}

/// A curvature function that can be integrated through its kinks.
pub trait CurvatureField {
    fn value(&self, r: f64) -> f64;
    /// Points in `(a, b)` where the field is not smooth.
    fn kinks(&self, a: f64, b: f64) -> Vec<f64>;
}

impl CurvatureField for CurvatureProfile {
    fn value(&self, r: f64) -> f64 {
        self.eval(r)
    }

    fn kinks(&self, a: f64, b: f64) -> Vec<f64> {
        (1..self.cells())
            .filter(|&j| self.bends_at(j))
            .map(|j| self.node(j))
            .filter(|&x| x > a && x < b)
            .collect()
    }
}

/// `K` everywhere except a triangular dip to `K - depth` supported on
/// `[center - width/2, center + width/2]`. Widths far below any grid step are fine.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpikedCurvature {
    #[serde(rename = "K")]
    pub k: f64,
    pub depth: f64,
    pub width: f64,
    pub center: f64,
}

impl SpikedCurvature {
    pub fn support(&self) -> (f64, f64) {
        (
            self.center - 0.5 * self.width,
            self.center + 0.5 * self.width,
        )
    }

    /// `∫ (κ - K)_-^p dr = depth^p · width / (p + 1)`.
    pub fn excess_integral(&self, p: f64) -> f64 {
        self.depth.powf(p) * self.width / (p + 1.0)
    }
}

impl CurvatureField for SpikedCurvature {
    fn value(&self, r: f64) -> f64 {
        if self.width <= 0.0 {
            return self.k;
        }
        let t = 1.0 - (r - self.center).abs() / (0.5 * self.width);
        self.k - self.depth * t.max(0.0)
    }

    fn kinks(&self, a: f64, b: f64) -> Vec<f64> {
        if self.width <= 0.0 {
            return Vec::new();
        }
        let (lo, hi) = self.support();
        [lo, self.center, hi]
            .into_iter()
            .filter(|&x| x > a && x < b)
            .collect()
    }
}

/// Solves `u'' + (field/(N-1)) u = 0` from `u(0), u'(0)` and returns `(u, u')` at the
/// increasing `points`, splitting every step at the field's kinks.
pub fn solve_through<C: CurvatureField + ?Sized>(
    field: &C,
    n: f64,
    y0: [f64; 2],
    points: &[f64],
) -> Result<Vec<[f64; 2]>> {
    let scale = 1.0 / (n - 1.0);
    let q = |x: f64| scale * field.value(x);
    let ctl = StepControl::default();
    let mut out = Vec::with_capacity(points.len());
    let mut at = 0.0;
    let mut y = y0;
    for &x in points {
        for kink in field.kinks(at, x) {
            y = integrate(&q, at, kink, y, ctl)?;
            at = kink;
        }
        y = integrate(&q, at, x, y, ctl)?;
        at = x;
        out.push(y);
    }
    Ok(out)
}

/// Solution `u` of `u'' + (κ/(N-1)) u = 0` on `[0, length]`, truncated at its first zero.
/// Returns the grid `(length', u at cells+1 nodes)`.
fn positive_solution<C: CurvatureField + ?Sized>(
    field: &C,
    n: f64,
    u0: f64,
    du0: f64,
    length: f64,
    h: f64,
) -> Result<(f64, Vec<f64>)> {
    if !(u0 >= 0.0) || (u0 == 0.0 && !(du0 > 0.0)) {
        return Err(Error::domain(
            "u0",
            u0,
            "initial data must make u positive right after 0 (u0 > 0, or u0 = 0 with u0' > 0)",
        ));
    }
    if !(h > 0.0) {
        return Err(Error::domain("h", h, "grid step must be positive"));
    }
    let grid = |len: f64| {
        let cells = ((len / h).ceil() as usize).max(2);
        (0..=cells)
            .map(|j| len * j as f64 / cells as f64)
            .collect::<Vec<f64>>()
    };
    let xs = grid(length);
    let ys = solve_through(field, n, [u0, du0], &xs)?;
    let Some(first) = (1..xs.len()).find(|&j| ys[j][0] <= 0.0) else {
        return Ok((length, ys.iter().map(|y| y[0]).collect()));
    };
    // Bisect for the first zero in (xs[first-1], xs[first]].
    let (mut lo, mut hi) = (xs[first - 1], xs[first]);
    while hi - lo > 1e-13 * hi {
        let mid = 0.5 * (lo + hi);
        if solve_through(field, n, [u0, du0], &[mid])?[0][0] > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let zero = 0.5 * (lo + hi);
    let xs = grid(zero);
    let mut us: Vec<f64> = solve_through(field, n, [u0, du0], &xs)?
        .iter()
        .map(|y| y[0])
        .collect();
    *us.last_mut().unwrap() = 0.0;
    Ok((zero, us))
}

/// The interval `(I, |·|, u^{N-1} dx)` where `u'' + (κ/(N-1)) u = 0`, `u(0) = u0`,
/// `u'(0) = du0`. If `u` vanishes inside, the interval is cut at its first zero
/// (so `length()` is then smaller than the profile's).
pub fn make_cd_fixture(
    kappa: &CurvatureProfile,
    n: f64,
    u0: f64,
    du0: f64,
    h: f64,
) -> Result<OneDimMmSpace> {
    if !(n >= 2.0 && n.is_finite()) {
        return Err(Error::domain("N", n, "must satisfy 2 <= N < inf"));
    }
    let (len, us) = positive_solution(kappa, n, u0, du0, kappa.length(), h)?;
    let density = us.iter().map(|u| u.max(0.0).powf(n - 1.0)).collect();
    let profile = if len < kappa.length() {
        let cells = ((len / kappa.step()).ceil() as usize)
            .max(us.len() - 1)
            .max(2);
        CurvatureProfile::from_fn(len, cells, |r| kappa.eval(r))?
    } else {
        kappa.clone()
    };
    OneDimMmSpace::new(len, density, profile, n, None)
}

/// The model space `I_{K,N} = ([0, π_{K/(N-1)}], sin_{K/(N-1)}^{N-1} dx)` for `K > 0`.
pub fn make_model_space(k: f64, n: f64, h: f64) -> Result<OneDimMmSpace> {
    if !(k > 0.0 && k.is_finite()) {
        return Err(Error::domain("K", k, "the model interval needs K > 0"));
    }
    if !(n >= 2.0 && n.is_finite()) {
        return Err(Error::domain("N", n, "must satisfy 2 <= N < inf"));
    }
    if !(h > 0.0) {
        return Err(Error::domain("h", h, "grid step must be positive"));
    }
    let ks = k / (n - 1.0);
    let len = pi_k(ks);
    let cells = ((len / h).ceil() as usize).max(2);
    let mut density: Vec<f64> = (0..=cells)
        .map(|j| {
            sin_k(ks, len * j as f64 / cells as f64)
                .max(0.0)
                .powf(n - 1.0)
        })
        .collect();
    density[0] = 0.0;
    density[cells] = 0.0;
    OneDimMmSpace::new(
        len,
        density,
        CurvatureProfile::constant(len, k, cells)?,
        n,
        None,
    )
}

/// Uniform-grid profile of a [`SpikedCurvature`] on `[0, length]`. With `cells = None`
/// the grid resolves the dip with at least eight cells across its support.
pub fn make_spiked_profile(
    k: f64,
    depth: f64,
    width: f64,
    center: f64,
    length: f64,
    cells: Option<usize>,
) -> Result<CurvatureProfile> {
    if !(depth >= 0.0 && width >= 0.0) {
        return Err(Error::InvalidProfile(
            "spike depth and width must be nonnegative".into(),
        ));
    }
    let default_cells = 64usize;
    if width == 0.0 || depth == 0.0 {
        return CurvatureProfile::constant(length, k, cells.unwrap_or(default_cells));
    }
    let cells = match cells {
        Some(c) => c,
        None => {
            let c = (8.0 * length / width).ceil();
            if c > 4.0e6 {
                return Err(Error::InvalidProfile(format!(
                    "spike width {width} is too narrow for a uniform grid; use SpikedCurvature"
                )));
            }
            (c as usize).max(default_cells)
        }
    };
    let spike = SpikedCurvature {
        k,
        depth,
        width,
        center,
    };
    CurvatureProfile::from_fn(length, cells, |r| spike.value(r))
}

/// A point set on the line built from the fixture `u'' + (κ/(N-1)) u = 0`: one atom
/// per grid cell, except that the support of `layout` is cut out and covered by
/// `sub_atoms` equal pieces. The density and curvature come from `field`.
///
/// Reusing the same `layout` for different fields gives spaces with identical atom
/// positions, which makes distances between them reflect only the measures.
#[allow(clippy::too_many_arguments)]
pub fn make_line_space<C: CurvatureField + ?Sized>(
    field: &C,
    layout: &SpikedCurvature,
    n: f64,
    u0: f64,
    du0: f64,
    length: f64,
    h: f64,
    sub_atoms: usize,
) -> Result<FiniteMmSpace> {
    Ok(make_line_atoms(field, layout, n, u0, du0, length, h, sub_atoms)?.space)
}

/// A [`make_line_space`] space together with its atom positions.
#[derive(Debug, Clone, PartialEq)]
pub struct LineAtoms {
    pub positions: Vec<f64>,
    pub space: FiniteMmSpace,
}

/// As [`make_line_space`], keeping the atom positions.
#[allow(clippy::too_many_arguments)]
pub fn make_line_atoms<C: CurvatureField + ?Sized>(
    field: &C,
    layout: &SpikedCurvature,
    n: f64,
    u0: f64,
    du0: f64,
    length: f64,
    h: f64,
    sub_atoms: usize,
) -> Result<LineAtoms> {
    let (len, _) = positive_solution(field, n, u0, du0, length, h)?;
    let cells = ((len / h).ceil() as usize).max(2);
    let step = len / cells as f64;
    let (slo, shi) = layout.support();
    let inside = |x: f64| layout.width > 0.0 && x > slo && x < shi;
    let mut cuts: Vec<f64> = (0..=cells)
        .map(|j| (j as f64 * step).min(len))
        .filter(|&x| !inside(x))
        .collect();
    if layout.width > 0.0 && slo < len && shi > 0.0 {
        let m = sub_atoms.max(1);
        cuts.extend((0..=m).map(|s| (slo + (shi - slo) * s as f64 / m as f64).clamp(0.0, len)));
    }
    cuts.sort_by(f64::total_cmp);
    cuts.dedup();
    let pieces: Vec<(f64, f64)> = cuts
        .windows(2)
        .map(|w| (w[0], w[1]))
        .filter(|(a, b)| b > a)
        .collect();
    // Gauss nodes of every piece, solved in one increasing sweep.
    let rule = GaussLegendre::ten();
    let mut xs = Vec::with_capacity(pieces.len() * 11);
    for &(a, b) in &pieces {
        xs.extend(rule.mapped(a, b).map(|(x, _)| x));
        xs.push(0.5 * (a + b));
    }
    let mut order: Vec<usize> = (0..xs.len()).collect();
    order.sort_by(|&i, &j| xs[i].total_cmp(&xs[j]));
    let sorted: Vec<f64> = order.iter().map(|&i| xs[i]).collect();
    let sol = solve_through(field, n, [u0, du0], &sorted)?;
    let mut u = vec![0.0; xs.len()];
    for (pos, &i) in order.iter().enumerate() {
        u[i] = sol[pos][0];
    }
    let mut centers = Vec::with_capacity(pieces.len());
    let mut weights = Vec::with_capacity(pieces.len());
    let mut kappa = Vec::with_capacity(pieces.len());
    for (p, &(a, b)) in pieces.iter().enumerate() {
        let base = p * 11;
        let mass: f64 = rule
            .mapped(a, b)
            .enumerate()
            .map(|(q, (_, w))| w * u[base + q].max(0.0).powf(n - 1.0))
            .sum();
        if mass <= 0.0 {
            continue;
        }
        let mid = 0.5 * (a + b);
        centers.push(mid);
        weights.push(mass);
        kappa.push(field.value(mid));
    }
    let space = FiniteMmSpace::on_line(&centers, weights, kappa, None)?;
    Ok(LineAtoms {
        positions: centers,
        space,
    })
}

/// Discretized circle of the given circumference with `m` equally spaced unit atoms.
pub fn circle_space(m: usize, circumference: f64) -> Result<FiniteMmSpace> {
    let step = circumference / m as f64;
    let dist = Array2::from_shape_fn((m, m), |(i, j)| {
        let k = i.abs_diff(j);
        k.min(m - k) as f64 * step
    });
    FiniteMmSpace::new(dist, vec![1.0; m], vec![0.0; m], None)
}

/// Discretized warped product `[0, L] ×_f^{N-1} M`.
///
/// Points are `(t_a, j)` with `t_a` the cell centers of the `f` grid; the metric is
/// the shortest-path metric of axial edges of length `dt` and in-level edges of
/// length `f(t_a) d_M(j, j')`; weights are `f(t_a)^{N-1} dt m_j`. Every point gets
/// curvature `k`.
pub fn make_warped_product(
    k: f64,
    n: f64,
    length: f64,
    f: &[f64],
    cross: &FiniteMmSpace,
) -> Result<FiniteMmSpace> {
    if f.len() < 3 {
        return Err(Error::InvalidSpace(
            "warping function needs at least 3 samples".into(),
        ));
    }
    if f.iter().any(|v| !(v.is_finite() && *v >= 0.0)) {
        return Err(Error::InvalidSpace(
            "warping function must be nonnegative".into(),
        ));
    }
    let levels = f.len() - 1;
    let dt = length / levels as f64;
    let fc: Vec<f64> = (0..levels).map(|a| 0.5 * (f[a] + f[a + 1])).collect();
    let m = cross.len();
    let idx = |a: usize, j: usize| a * m + j;
    let total = levels * m;
    let mut g = UnGraph::<(), f64>::with_capacity(total, total * (m + 1));
    for _ in 0..total {
        g.add_node(());
    }
    #[allow(clippy::needless_range_loop)]
    for a in 0..levels {
        for j in 0..m {
            if a + 1 < levels {
                g.add_edge(NodeIndex::new(idx(a, j)), NodeIndex::new(idx(a + 1, j)), dt);
            }
            for jj in (j + 1)..m {
                let w = fc[a] * cross.dist()[[j, jj]];
                g.add_edge(NodeIndex::new(idx(a, j)), NodeIndex::new(idx(a, jj)), w);
            }
        }
    }
    let rows: Vec<Vec<f64>> = (0..total)
        .into_par_iter()
        .map(|s| {
            let res = petgraph::algo::dijkstra(&g, NodeIndex::new(s), None, |e| *e.weight());
            let mut row = vec![f64::INFINITY; total];
            for (node, d) in res {
                row[node.index()] = d;
            }
            row
        })
        .collect();
    let mut dist = Array2::from_shape_fn((total, total), |(i, j)| rows[i][j]);
    // Symmetrize away rounding differences between the two Dijkstra runs.
    for i in 0..total {
        for j in (i + 1)..total {
            let d = dist[[i, j]].min(dist[[j, i]]);
            dist[[i, j]] = d;
            dist[[j, i]] = d;
        }
    }
    let weights = (0..total)
        .map(|p| fc[p / m].powf(n - 1.0) * dt * cross.weights()[p % m])
        .collect();
    FiniteMmSpace::new(dist, weights, vec![k; total], None)
}
