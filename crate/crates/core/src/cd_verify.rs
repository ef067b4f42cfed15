//! End-to-end checks of the curvature inequalities on one-dimensional spaces and the
//! cusp-sequence convergence experiment.
//!
//! Every checker returns a [`VerificationReport`] whose rows record `lhs ≤ rhs` on
//! the parameter grid. Plans are the monotone rearrangement of cellwise-constant
//! densities, so the only discretization left is the piecewise-linear reference
//! density; the default tolerance is `5h` relative to the larger side.

use crate::comparison_ode::{model_volume, pi_k, tau_const};
use crate::error::{Error, Result};
use crate::ext::ExtReal;
use crate::mm_core::{make_line_atoms, CurvatureField, OneDimMmSpace, SpikedCurvature};
use crate::one_dim_bounds::{const_c_for, const_c_prime, const_lambda};
use crate::quadrature::GaussLegendre;
use crate::report::{ReportBuilder, Tolerance, VerificationReport};
use crate::transport::{
    gw_surrogate, line_cross_distances, sturm_d_upper, DiscreteMeasure, MonotonePlan,
};
use crate::CurvatureProfile;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

/// Gauss points per monotone-plan piece.
const PIECE_RULE: usize = 3;

/// Default tolerance for a space: `5h` relative to the larger side.
pub fn default_tolerance(space: &OneDimMmSpace) -> Tolerance {
    Tolerance::max_side(5.0 * space.h())
}

/// The normalized restriction `m̄_A` of the reference measure to a set of cells.
pub fn restricted_measure(space: &OneDimMmSpace, cells: &[usize]) -> Result<DiscreteMeasure> {
    let masses = space.cell_masses();
    let mut support = cells.to_vec();
    support.sort_unstable();
    support.dedup();
    if let Some(&j) = support.iter().find(|&&j| j >= masses.len()) {
        return Err(Error::InvalidMeasure(format!(
            "cell {j} out of range {}",
            masses.len()
        )));
    }
    let weights = support.iter().map(|&j| masses[j]).collect();
    DiscreteMeasure::normalized(support, weights)
}

/// `κ` read along `r ↦ start + dir·r`.
struct Oriented<'a> {
    profile: &'a CurvatureProfile,
    start: f64,
    dir: f64,
}

impl CurvatureField for Oriented<'_> {
    fn value(&self, r: f64) -> f64 {
        self.profile.eval(self.start + self.dir * r)
    }

    fn kinks(&self, a: f64, b: f64) -> Vec<f64> {
        let h = self.profile.step();
        let (x, y) = (self.start + self.dir * a, self.start + self.dir * b);
        let (lo, hi) = (x.min(y), x.max(y));
        let first = ((lo / h).floor() as usize).max(1);
        let last = ((hi / h).ceil() as usize).min(self.profile.cells().saturating_sub(1));
        let mut out: Vec<f64> = (first..=last)
            .filter(|&j| self.profile.bends_at(j))
            .map(|j| (self.profile.node(j) - self.start) * self.dir)
            .filter(|&r| r > a && r < b)
            .collect();
        out.sort_by(f64::total_cmp);
        out
    }
}

/// `τ_{κ_γ,N}^{(t)}(θ)` for every `t` in `ts`, where `κ_γ(r) = κ(start + dir·r)`.
///
/// One sweep of `v'' + (κ_γ/(N-1)) v = 0` serves all `t`. The value is `∞` once the
/// solution has vanished on `(0, θ]`.
pub fn tau_along(
    profile: &CurvatureProfile,
    start: f64,
    dir: f64,
    theta: f64,
    n: f64,
    ts: &[f64],
) -> Result<Vec<ExtReal>> {
    if theta <= 1e-14 {
        return Ok(ts.iter().map(|&t| ExtReal::Finite(t)).collect());
    }
    let mut points: Vec<f64> = ts.iter().map(|&t| t * theta).filter(|&r| r > 0.0).collect();
    points.push(theta);
    points.sort_by(f64::total_cmp);
    points.dedup();
    let field = Oriented {
        profile,
        start,
        dir,
    };
    let sol = crate::mm_core::solve_through(&field, n, [0.0, 1.0], &points)?;
    let s_theta = sol.last().unwrap()[0];
    if sol.iter().any(|y| y[0] <= 0.0) {
        return Ok(ts
            .iter()
            .map(|&t| {
                if t == 0.0 {
                    ExtReal::Finite(0.0)
                } else {
                    ExtReal::INFINITY
                }
            })
            .collect());
    }
    Ok(ts
        .iter()
        .map(|&t| {
            if t == 0.0 {
                return ExtReal::Finite(0.0);
            }
            let k = points.partition_point(|&r| r < t * theta);
            let sigma = sol[k.min(sol.len() - 1)][0] / s_theta;
            ExtReal::Finite(t.powf(1.0 / n) * sigma.powf(1.0 - 1.0 / n))
        })
        .collect())
}

fn check_grid(name: &'static str, grid: &[f64], lo: f64, hi: f64) -> Result<()> {
    if grid.is_empty() {
        return Err(Error::domain(name, f64::NAN, "grid must not be empty"));
    }
    match grid.iter().find(|v| !(**v >= lo && **v <= hi)) {
        Some(&v) if hi == f64::MAX => Err(Error::domain(
            name,
            v,
            format!("must be finite and at least {lo}"),
        )),
        Some(&v) => Err(Error::domain(name, v, format!("must lie in [{lo}, {hi}]"))),
        None => Ok(()),
    }
}

fn check_bounded(space: &OneDimMmSpace, mu: &DiscreteMeasure, which: &str) -> Result<()> {
    let weights = space.cell_masses();
    for (&j, &m) in mu.support().iter().zip(mu.masses()) {
        if j >= weights.len() {
            return Err(Error::InvalidMeasure(format!(
                "{which}: cell {j} out of range"
            )));
        }
        if m > 0.0 && weights[j] <= 0.0 {
            return Err(Error::InvalidMeasure(format!(
                "{which}: density unbounded (mass on cell {j} of zero reference measure)"
            )));
        }
    }
    Ok(())
}

/// Adds `-Σ w f` into `acc`, treating `f = ∞` as making the bound vacuous.
fn accumulate(acc: &mut [f64], terms: &[ExtReal], w: f64) {
    for (a, term) in acc.iter_mut().zip(terms) {
        match term {
            ExtReal::Finite(v) => *a -= w * v,
            ExtReal::Infinite(_) => *a = f64::INFINITY,
        }
    }
}

/// Displacement convexity of the Rényi entropy along the monotone plan:
/// `S_{N'}(μ_t) ≤ -∫ [τ^{(1-t)}_{κ⁻_γ,N'}(|γ̇|) ρ_0^{-1/N'} + τ^{(t)}_{κ⁺_γ,N'}(|γ̇|) ρ_1^{-1/N'}] dΠ`
/// for every `t` in `t_grid` and `N'` in `n_grid`.
///
/// `κ⁺_γ` is `κ` read from `γ_0` towards `γ_1` and `κ⁻_γ` the reverse. A geodesic on
/// which a coefficient is infinite makes the bound vacuous.
pub fn check_cd_inequality(
    space: &OneDimMmSpace,
    mu0: &DiscreteMeasure,
    mu1: &DiscreteMeasure,
    t_grid: &[f64],
    n_grid: &[f64],
    tol: Option<Tolerance>,
) -> Result<VerificationReport> {
    check_grid("t", t_grid, 0.0, 1.0)?;
    check_grid("N'", n_grid, space.n(), f64::MAX)?;
    check_bounded(space, mu0, "mu0")?;
    check_bounded(space, mu1, "mu1")?;
    let plan = MonotonePlan::new(space, mu0, mu1)?;
    let nodes = plan.nodes(&GaussLegendre::new(PIECE_RULE));
    let rev: Vec<f64> = t_grid.iter().map(|t| 1.0 - t).collect();
    let profile = space.kappa();
    // Per node: the integrand for every (N', t), flattened N'-major.
    let per_node: Vec<Vec<ExtReal>> = nodes
        .par_iter()
        .map(|&(s, _)| {
            let (a, b) = (plan.start(s), plan.end(s));
            let theta = (b.x - a.x).abs();
            let dir = if b.x >= a.x { 1.0 } else { -1.0 };
            let mut out = Vec::with_capacity(n_grid.len() * t_grid.len());
            for &np in n_grid {
                let minus = tau_along(profile, b.x, -dir, theta, np, &rev)?;
                let plus = tau_along(profile, a.x, dir, theta, np, t_grid)?;
                let (r0, r1) = (a.rho.powf(-1.0 / np), b.rho.powf(-1.0 / np));
                out.extend(
                    minus
                        .iter()
                        .zip(&plus)
                        .map(|(m, p)| m.scale(r0) + p.scale(r1)),
                );
            }
            Ok(out)
        })
        .collect::<Result<_>>()?;
    let mut rhs = vec![0.0; n_grid.len() * t_grid.len()];
    for (terms, &(_, w)) in per_node.iter().zip(&nodes) {
        accumulate(&mut rhs, terms, w);
    }
    let mut report = ReportBuilder::new("cd_inequality", &["t", "N"])
        .tolerance(tol.unwrap_or_else(|| default_tolerance(space)))
        .param("N", space.n())
        .param("h", space.h())
        .param("W2", plan.w2());
    for (a, &np) in n_grid.iter().enumerate() {
        for (b, &t) in t_grid.iter().enumerate() {
            let lhs = plan.entropy_at(t, np, &nodes);
            report.push(vec![t, np], lhs, rhs[a * t_grid.len() + b]);
        }
    }
    Ok(report.finish())
}

/// The error term `2 m(B_{2R}(o))^{1/N} Λ^{1/N} C^{1/(N(2p-1))} k^{p/(N(2p-1))}` of the
/// entropy inequality with an integral curvature excess `k`.
pub fn resulta_error_term(
    k_curv: f64,
    n: f64,
    p: f64,
    epsilon: f64,
    ball_mass: f64,
    excess: f64,
) -> Result<f64> {
    Ok(2.0 * mcp_error_term(k_curv, n, p, epsilon, ball_mass, excess)?)
}

/// `m(B_{2R}(o))^{1/N} Λ^{1/N} C^{1/(N(2p-1))} k^{p/(N(2p-1))}`.
pub fn mcp_error_term(
    k_curv: f64,
    n: f64,
    p: f64,
    epsilon: f64,
    ball_mass: f64,
    excess: f64,
) -> Result<f64> {
    if !(excess >= 0.0) {
        return Err(Error::domain("excess", excess, "must be nonnegative"));
    }
    if !(ball_mass >= 0.0) {
        return Err(Error::domain("ball mass", ball_mass, "must be nonnegative"));
    }
    let c = const_c_for(k_curv, n, p, epsilon)?;
    let lambda = const_lambda(k_curv, n, epsilon)?;
    let e = n * (2.0 * p - 1.0);
    Ok(ball_mass.powf(1.0 / n) * lambda.powf(1.0 / n) * c.powf(1.0 / e) * excess.powf(p / e))
}

/// Parameters of the excess-perturbed entropy inequality.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExcessBudget {
    /// Constant lower bound `K` the coefficients are built from.
    pub k: f64,
    pub p: f64,
    /// Radius `R ≥ 1` around the base point.
    pub radius: f64,
    pub epsilon: f64,
}

impl ExcessBudget {
    fn validate(&self, n: f64) -> Result<()> {
        if !self.k.is_finite() {
            return Err(Error::domain("K", self.k, "must be finite"));
        }
        if !(self.radius >= 1.0 && self.radius.is_finite()) {
            return Err(Error::domain("R", self.radius, "must satisfy R >= 1"));
        }
        // Validates p and ε against N as well.
        const_c_for(self.k, n, self.p, self.epsilon)?;
        const_lambda(self.k, n, self.epsilon)?;
        Ok(())
    }

    /// `π_{K/(N-1)}`.
    fn model_pi(&self, n: f64) -> f64 {
        pi_k(self.k / (n - 1.0))
    }
}

/// Pointed normalization and the base point, or an error naming what is missing.
fn pointed(space: &OneDimMmSpace) -> Result<(OneDimMmSpace, f64)> {
    let o = space
        .base()
        .ok_or_else(|| Error::Hypothesis("space must be pointed (set a base point)".into()))?;
    Ok((space.normalize_pointed()?, o))
}

fn check_support_in(
    space: &OneDimMmSpace,
    mu: &DiscreteMeasure,
    center: f64,
    r: f64,
    which: &str,
) -> Result<()> {
    let slack = 1e-12 * (1.0 + r);
    for (&j, &m) in mu.support().iter().zip(mu.masses()) {
        if m > 0.0
            && ((space.node(j) - center).abs() > r + slack
                || (space.node(j + 1) - center).abs() > r + slack)
        {
            return Err(Error::Hypothesis(format!(
                "{which} charges cell {j} = [{}, {}], outside B_{r}({center})",
                space.node(j),
                space.node(j + 1)
            )));
        }
    }
    Ok(())
}

/// The entropy inequality with constant-`K` coefficients and the excess error term:
/// `S_N(μ_t) ≤ -∫ [τ^{(1-t)}_{K,N} ρ_0^{-1/N} + τ^{(t)}_{K,N} ρ_1^{-1/N}] dΠ + E`.
///
/// The space is normalized so that `m(B_1(o)) = 1`. The measures must live in
/// `B_{R/2}(o)` and every plan geodesic must be shorter than `π_{K/(N-1)} - ε`.
pub fn check_resulta(
    space: &OneDimMmSpace,
    budget: &ExcessBudget,
    mu0: &DiscreteMeasure,
    mu1: &DiscreteMeasure,
    t_grid: &[f64],
    tol: Option<Tolerance>,
) -> Result<VerificationReport> {
    let n = space.n();
    budget.validate(n)?;
    check_grid("t", t_grid, 0.0, 1.0)?;
    let (space, o) = pointed(space)?;
    check_bounded(&space, mu0, "mu0")?;
    check_bounded(&space, mu1, "mu1")?;
    let half = 0.5 * budget.radius;
    check_support_in(&space, mu0, o, half, "mu0")?;
    check_support_in(&space, mu1, o, half, "mu1")?;
    let plan = MonotonePlan::new(&space, mu0, mu1)?;
    let nodes = plan.nodes(&GaussLegendre::new(PIECE_RULE));
    let max_len = budget.model_pi(n) - budget.epsilon;
    let probes = plan
        .breakpoints()
        .into_iter()
        .chain(nodes.iter().map(|&(s, _)| s));
    for s in probes {
        let (a, b) = (plan.start(s), plan.end(s));
        let theta = (b.x - a.x).abs();
        if theta > max_len {
            return Err(Error::Hypothesis(format!(
                "geodesic from {} to {} (quantile {s}) has length {theta} > π_{{K/(N-1)}} - ε = {max_len}",
                a.x, b.x
            )));
        }
    }
    let excess = space.excess_k_pointed(budget.p, budget.k, 2.0 * budget.radius)?;
    let ball = space.ball_mass(o, 2.0 * budget.radius);
    let error = resulta_error_term(budget.k, n, budget.p, budget.epsilon, ball, excess)?;
    let mut rhs = vec![error; t_grid.len()];
    for &(s, w) in &nodes {
        let (a, b) = (plan.start(s), plan.end(s));
        let theta = (b.x - a.x).abs();
        let (r0, r1) = (a.rho.powf(-1.0 / n), b.rho.powf(-1.0 / n));
        let terms: Vec<ExtReal> = t_grid
            .iter()
            .map(|&t| {
                tau_const(budget.k, n, 1.0 - t, theta).scale(r0)
                    + tau_const(budget.k, n, t, theta).scale(r1)
            })
            .collect();
        accumulate(&mut rhs, &terms, w);
    }
    let mut report = ReportBuilder::new("resulta", &["t"])
        .tolerance(tol.unwrap_or_else(|| default_tolerance(&space)))
        .param("K", budget.k)
        .param("N", n)
        .param("p", budget.p)
        .param("R", budget.radius)
        .param("epsilon", budget.epsilon)
        .param("excess", excess)
        .param("error_term", error)
        .param("mass_B2R", ball)
        .param("h", space.h());
    for (&t, &r) in t_grid.iter().zip(&rhs) {
        report.push(vec![t], plan.entropy_at(t, n, &nodes), r);
    }
    Ok(report.finish())
}

/// Cells merged into disjoint closed intervals.
pub fn cell_intervals(space: &OneDimMmSpace, cells: &[usize]) -> Result<Vec<(f64, f64)>> {
    let mut c = cells.to_vec();
    c.sort_unstable();
    c.dedup();
    if let Some(&j) = c.iter().find(|&&j| j >= space.cells()) {
        return Err(Error::domain(
            "cell",
            j as f64,
            format!("out of range {}", space.cells()),
        ));
    }
    Ok(merge(
        c.iter()
            .map(|&j| (space.node(j), space.node(j + 1)))
            .collect(),
    ))
}

fn merge(mut v: Vec<(f64, f64)>) -> Vec<(f64, f64)> {
    v.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut out: Vec<(f64, f64)> = Vec::with_capacity(v.len());
    for (a, b) in v {
        match out.last_mut() {
            Some(last) if a <= last.1 => last.1 = last.1.max(b),
            _ => out.push((a, b)),
        }
    }
    out
}

/// `A_t = {(1-t)x + t y : x ∈ A_0, y ∈ A_1}` for unions of intervals.
pub fn minkowski_combination(a0: &[(f64, f64)], a1: &[(f64, f64)], t: f64) -> Vec<(f64, f64)> {
    let mut v = Vec::with_capacity(a0.len() * a1.len());
    for &(a, b) in a0 {
        for &(c, d) in a1 {
            v.push(((1.0 - t) * a + t * c, (1.0 - t) * b + t * d));
        }
    }
    merge(v)
}

fn union_mass(space: &OneDimMmSpace, set: &[(f64, f64)]) -> f64 {
    set.iter().map(|&(a, b)| space.interval_mass(a, b)).sum()
}

/// Brunn–Minkowski with the `K = 0` excess defect on the space normalized to mass one:
/// `m(A_t)^{1/N} ≥ (1-t) m(A_0)^{1/N} + t m(A_1)^{1/N} - 2 C'^{1/(N(2p-1))} k^{p/(N(2p-1))}`
/// with `k = k_[M](κ, p, 0)`.
pub fn check_brunn_minkowski(
    space: &OneDimMmSpace,
    a0: &[usize],
    a1: &[usize],
    t_grid: &[f64],
    p: f64,
    tol: Option<Tolerance>,
) -> Result<VerificationReport> {
    if a0.is_empty() || a1.is_empty() {
        return Err(Error::domain("A", 0.0, "sets must be nonempty"));
    }
    check_grid("t", t_grid, 0.0, 1.0)?;
    let n = space.n();
    let c1 = const_c_prime(p, n)?;
    let space = space.normalize()?;
    let (i0, i1) = (cell_intervals(&space, a0)?, cell_intervals(&space, a1)?);
    let excess = space.excess_k(p, 0.0)?;
    let e = n * (2.0 * p - 1.0);
    let defect = 2.0 * c1.powf(1.0 / e) * excess.powf(p / e);
    let (m0, m1) = (
        union_mass(&space, &i0).powf(1.0 / n),
        union_mass(&space, &i1).powf(1.0 / n),
    );
    let mut report = ReportBuilder::new("brunn_minkowski", &["t"])
        .tolerance(tol.unwrap_or_else(|| default_tolerance(&space)))
        .param("N", n)
        .param("p", p)
        .param("excess", excess)
        .param("defect", defect)
        .param("h", space.h());
    for &t in t_grid {
        let at = minkowski_combination(&i0, &i1, t);
        let bound = (1.0 - t) * m0 + t * m1 - defect;
        report.push(vec![t], bound, union_mass(&space, &at).powf(1.0 / n));
    }
    Ok(report.finish())
}

/// `C(K,N,p,D) = Ξ(K,N,D) C'(p,N)^{1/(2p-1)}` with
/// `Ξ = max_{0 < R ≤ D} R ω(R) / ∫_0^R ω` and `ω = sin_{K/(N-1)}^{N-1}`.
pub fn bishop_gromov_constant(k_curv: f64, n: f64, p: f64, d: f64) -> Result<f64> {
    if k_curv > 0.0 {
        return Err(Error::domain(
            "K",
            k_curv,
            "volume growth bound needs K <= 0",
        ));
    }
    if !(d > 0.0 && d.is_finite()) {
        return Err(Error::domain("D", d, "must be positive"));
    }
    let c1 = const_c_prime(p, n)?;
    let ks = k_curv / (n - 1.0);
    // R ω/∫ω → N as R → 0.
    let mut xi = n;
    for i in 1..=512 {
        let r = d * i as f64 / 512.0;
        let omega = crate::comparison_ode::sin_k(ks, r).powf(n - 1.0);
        xi = xi.max(r * omega / model_volume(k_curv, n, r)?);
    }
    Ok(xi * c1.powf(1.0 / (2.0 * p - 1.0)))
}

/// `(m(B_R(x)) / v_{K,N}(R)) / (m(B_r(x)) / v_{K,N}(r))`.
pub fn ball_ratio(space: &OneDimMmSpace, k_curv: f64, x: f64, r: f64, big_r: f64) -> Result<f64> {
    let n = space.n();
    let small = space.ball_mass(x, r) / model_volume(k_curv, n, r)?;
    let large = space.ball_mass(x, big_r) / model_volume(k_curv, n, big_r)?;
    Ok(large / small)
}

/// Relative volume comparison on the pointed-normalized space:
/// `m(B_R(x))/v_{K,N}(R) ≤ m(B_r(x))/v_{K,N}(r) · exp(C k_{[X,o]}(p,K,D)^{p/(2p-1)})`
/// for centers `x ∈ B_{R/2}(o)` and radii in the window `0 < r < 1 ≤ R/2 ≤ 2R ≤ D`.
#[allow(clippy::too_many_arguments)]
pub fn check_bishop_gromov(
    space: &OneDimMmSpace,
    k_curv: f64,
    p: f64,
    d: f64,
    r_grid: &[f64],
    big_r_grid: &[f64],
    tol: Option<Tolerance>,
) -> Result<VerificationReport> {
    if k_curv > 0.0 {
        return Err(Error::domain(
            "K",
            k_curv,
            "Bishop-Gromov check needs K <= 0",
        ));
    }
    check_grid("r", r_grid, 0.0, 1.0)?;
    if let Some(&r) = r_grid.iter().find(|&&r| !(r > 0.0 && r < 1.0)) {
        return Err(Error::domain("r", r, "window requires 0 < r < 1"));
    }
    check_grid("R", big_r_grid, 2.0, 0.5 * d)?;
    let n = space.n();
    let c = bishop_gromov_constant(k_curv, n, p, d)?;
    let (space, o) = pointed(space)?;
    let excess = space.excess_k_pointed(p, k_curv, d)?;
    let factor = (c * excess.powf(p / (2.0 * p - 1.0))).exp();
    let mut report = ReportBuilder::new("bishop_gromov", &["x", "r", "R"])
        .tolerance(tol.unwrap_or_else(|| default_tolerance(&space)))
        .param("K", k_curv)
        .param("N", n)
        .param("p", p)
        .param("D", d)
        .param("C", c)
        .param("excess", excess)
        .param("factor", factor)
        .param("h", space.h());
    for &big_r in big_r_grid {
        let (lo, hi) = (
            (o - 0.5 * big_r).max(0.0),
            (o + 0.5 * big_r).min(space.length()),
        );
        let vr = model_volume(k_curv, n, big_r)?;
        for i in 0..=32 {
            let x = lo + (hi - lo) * i as f64 / 32.0;
            let lhs = space.ball_mass(x, big_r) / vr;
            for &r in r_grid {
                let rhs = space.ball_mass(x, r) / model_volume(k_curv, n, r)? * factor;
                report.push(vec![x, r, big_r], lhs, rhs);
            }
        }
    }
    Ok(report.finish())
}

/// Gauss-10 over `[a, b]` split at the given points.
fn integrate_split<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, splits: &mut Vec<f64>) -> f64 {
    splits.retain(|&x| x > a && x < b);
    splits.push(a);
    splits.push(b);
    splits.sort_by(f64::total_cmp);
    splits.dedup();
    let rule = GaussLegendre::ten();
    splits
        .windows(2)
        .map(|w| rule.integrate(f, w[0], w[1]))
        .sum()
}

fn density_nodes(space: &OneDimMmSpace, a: f64, b: f64) -> Vec<f64> {
    (0..=space.cells())
        .map(|j| space.node(j))
        .filter(|&x| x > a && x < b)
        .collect()
}

fn check_mcp_set(
    space: &OneDimMmSpace,
    x0: f64,
    a: &[(f64, f64)],
    k_curv: f64,
    n: f64,
) -> Result<()> {
    if !(x0 >= 0.0 && x0 <= space.length()) {
        return Err(Error::domain(
            "x0",
            x0,
            format!("outside [0, {}]", space.length()),
        ));
    }
    if k_curv > 0.0 {
        let pi = pi_k(k_curv / (n - 1.0));
        let far = a
            .iter()
            .map(|&(l, r)| (l - x0).abs().max((r - x0).abs()))
            .fold(0.0, f64::max);
        if far >= pi {
            return Err(Error::Hypothesis(format!(
                "A reaches distance {far} from x0 = {x0}, outside the admissible ball of radius π_{{K/(N-1)}} = {pi}"
            )));
        }
    }
    Ok(())
}

/// Measure contraction towards `x0`: every cell `c` satisfies
/// `m(c) ≥ ∫_{y ∈ A, γ_t(y) ∈ c} τ^{(t)}_{K,N}(|y - x0|)^N dm(y)`,
/// the cellwise form of `m ≥ (e_t)_#(τ^N m(A) Π)` for the plan from `δ_{x0}` to `m̄_A`.
///
/// One row per `t`, at the tightest cell.
pub fn check_mcp(
    space: &OneDimMmSpace,
    x0: f64,
    a_cells: &[usize],
    k_curv: f64,
    n: f64,
    t_grid: &[f64],
    tol: Option<Tolerance>,
) -> Result<VerificationReport> {
    if !(n >= 2.0 && n.is_finite()) {
        return Err(Error::domain("N", n, "must satisfy 2 <= N < inf"));
    }
    if a_cells.is_empty() {
        return Err(Error::domain("A", 0.0, "set must be nonempty"));
    }
    check_grid("t", t_grid, 0.0, 1.0)?;
    let set = cell_intervals(space, a_cells)?;
    check_mcp_set(space, x0, &set, k_curv, n)?;
    let tol = tol.unwrap_or_else(|| default_tolerance(space));
    let masses = space.cell_masses();
    let mut report = ReportBuilder::new("mcp", &["t", "cell"])
        .tolerance(tol)
        .param("K", k_curv)
        .param("N", n)
        .param("x0", x0)
        .param("h", space.h());
    let rows: Vec<(f64, usize, f64, f64)> = t_grid
        .par_iter()
        .map(|&t| {
            let weight = |y: f64| {
                tau_const(k_curv, n, t, (y - x0).abs()).powf(n).to_f64() * space.density_at(y)
            };
            let mut worst = (t, 0usize, 0.0, masses[0]);
            let mut worst_scaled = f64::INFINITY;
            if t == 0.0 {
                return worst;
            }
            #[allow(clippy::needless_range_loop)]
            for c in 0..space.cells() {
                let ends = [
                    x0 + (space.node(c) - x0) / t,
                    x0 + (space.node(c + 1) - x0) / t,
                ];
                let (lo, hi) = (ends[0].min(ends[1]), ends[0].max(ends[1]));
                let mut pushed = 0.0;
                for &(l, r) in &set {
                    let (a, b) = (l.max(lo), r.min(hi));
                    if b > a {
                        pushed += integrate_split(&weight, a, b, &mut density_nodes(space, a, b));
                    }
                }
                let scaled = (masses[c] - pushed) / (1.0 + masses[c].abs().max(pushed.abs()));
                if pushed > 0.0 && scaled < worst_scaled {
                    worst_scaled = scaled;
                    worst = (t, c, pushed, masses[c]);
                }
            }
            worst
        })
        .collect();
    for (t, c, pushed, mass) in rows {
        report.push(vec![t, c as f64], pushed, mass);
    }
    Ok(report.finish())
}

/// The entropy form of measure contraction with the excess error term:
/// `S_N(μ_t) ≤ -∫ τ^{(t)}_{K,N}(|γ̇|) ρ_1^{-1/N} dΠ + E` for the plan from `δ_{x0}` to
/// `m̄_A`, with `E = m(B_{2R}(o))^{1/N} Λ^{1/N} C^{1/(N(2p-1))} k_{[M,o]}(p,K,2R)^{p/(N(2p-1))}`.
///
/// Requires `x0 ∈ B_R(o)` and `A ⊂ B_r(x0)` with `r < min(R, π_{K/(N-1)} - ε)`.
pub fn check_mcp_entropy(
    space: &OneDimMmSpace,
    x0: f64,
    a_cells: &[usize],
    budget: &ExcessBudget,
    r: f64,
    t_grid: &[f64],
    tol: Option<Tolerance>,
) -> Result<VerificationReport> {
    let n = space.n();
    budget.validate(n)?;
    check_grid("t", t_grid, 0.0, 1.0)?;
    if a_cells.is_empty() {
        return Err(Error::domain("A", 0.0, "set must be nonempty"));
    }
    let limit = budget.radius.min(budget.model_pi(n) - budget.epsilon);
    if !(r > 0.0 && r < limit) {
        return Err(Error::domain("r", r, format!("must lie in (0, {limit})")));
    }
    let (space, o) = pointed(space)?;
    if (x0 - o).abs() > budget.radius {
        return Err(Error::Hypothesis(format!(
            "x0 = {x0} outside B_R(o) = B_{}({o})",
            budget.radius
        )));
    }
    let set = cell_intervals(&space, a_cells)?;
    check_mcp_set(&space, x0, &set, budget.k, n)?;
    if let Some(&(l, rr)) = set
        .iter()
        .find(|&&(l, rr)| (l - x0).abs() > r || (rr - x0).abs() > r)
    {
        return Err(Error::Hypothesis(format!(
            "A contains [{l}, {rr}] outside B_{r}({x0})"
        )));
    }
    let m_a = union_mass(&space, &set);
    let excess = space.excess_k_pointed(budget.p, budget.k, 2.0 * budget.radius)?;
    let ball = space.ball_mass(o, 2.0 * budget.radius);
    let error = mcp_error_term(budget.k, n, budget.p, budget.epsilon, ball, excess)?;
    let mut report = ReportBuilder::new("mcp_entropy", &["t"])
        .tolerance(tol.unwrap_or_else(|| default_tolerance(&space)))
        .param("K", budget.k)
        .param("N", n)
        .param("p", budget.p)
        .param("R", budget.radius)
        .param("epsilon", budget.epsilon)
        .param("x0", x0)
        .param("excess", excess)
        .param("error_term", error)
        .param("h", space.h());
    for &t in t_grid {
        let z = |y: f64| x0 + t * (y - x0);
        let lhs_f = |y: f64| {
            (t * space.density_at(z(y))).powf(1.0 / n) * space.density_at(y).powf(1.0 - 1.0 / n)
        };
        let rhs_f =
            |y: f64| tau_const(budget.k, n, t, (y - x0).abs()).to_f64() * space.density_at(y);
        let (mut lhs, mut rhs) = (0.0, 0.0);
        for &(l, rr) in &set {
            let mut splits = density_nodes(&space, l, rr);
            if t > 0.0 {
                let (zl, zr) = (z(l).min(z(rr)), z(l).max(z(rr)));
                splits.extend(
                    density_nodes(&space, zl, zr)
                        .into_iter()
                        .map(|w| x0 + (w - x0) / t),
                );
            }
            lhs += integrate_split(&lhs_f, l, rr, &mut splits.clone());
            rhs += integrate_split(&rhs_f, l, rr, &mut splits);
        }
        let lhs = -m_a.powf(-(1.0 - 1.0 / n)) * lhs;
        let rhs = -m_a.powf(1.0 / n - 1.0) * rhs + error;
        report.push(vec![t], lhs, rhs);
    }
    Ok(report.finish())
}

/// Spike depth `i^a` and width `i^{-b}` at step `i`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpikeSchedule {
    pub depth_exponent: f64,
    pub width_exponent: f64,
}

impl SpikeSchedule {
    /// Depth `i²`, width `i^{-4p}`: the excess decays like `i^{-2}`.
    pub fn standard(p: f64) -> Self {
        SpikeSchedule {
            depth_exponent: 2.0,
            width_exponent: 4.0 * p,
        }
    }

    pub fn depth(&self, i: usize) -> f64 {
        (i as f64).powf(self.depth_exponent)
    }

    pub fn width(&self, i: usize) -> f64 {
        (i as f64).powf(-self.width_exponent)
    }

    /// Exponent `a - b/p` of the excess decay `k ∝ i^{a - b/p}`.
    pub fn excess_rate(&self, p: f64) -> f64 {
        self.depth_exponent - self.width_exponent / p
    }
}

/// Setup of the cusp-sequence experiment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceConfig {
    #[serde(rename = "K")]
    pub k: f64,
    #[serde(rename = "N")]
    pub n: f64,
    pub p: f64,
    pub schedule: SpikeSchedule,
    pub i_max: usize,
    /// Radius of the pointed excess.
    #[serde(rename = "R")]
    pub radius: f64,
    /// Grid step away from the spike.
    pub h: f64,
    /// Atoms covering the spike support.
    pub sub_atoms: usize,
    /// Interval length for `K ≤ 0`; for `K > 0` the fixture ends at its first zero.
    pub length: f64,
    /// Target for the final distance.
    pub epsilon: f64,
}

impl ConvergenceConfig {
    pub fn new(k: f64, n: f64, p: f64, i_max: usize) -> Self {
        ConvergenceConfig {
            k,
            n,
            p,
            schedule: SpikeSchedule::standard(p),
            i_max,
            radius: 2.0,
            h: 0.02,
            sub_atoms: 64,
            length: 2.5,
            epsilon: 0.05,
        }
    }

    fn validate(&self) -> Result<()> {
        if !self.k.is_finite() {
            return Err(Error::domain("K", self.k, "must be finite"));
        }
        const_c_prime(self.p, self.n)?;
        if self.i_max == 0 {
            return Err(Error::domain("i_max", 0.0, "must be at least 1"));
        }
        if !(self.radius >= 1.0) {
            return Err(Error::domain("R", self.radius, "must satisfy R >= 1"));
        }
        if !(self.h > 0.0 && self.h < 0.5) {
            return Err(Error::domain("h", self.h, "must lie in (0, 0.5)"));
        }
        if self.sub_atoms == 0 {
            return Err(Error::domain("sub_atoms", 0.0, "must be positive"));
        }
        if !(self.length > 1.0) {
            return Err(Error::domain("length", self.length, "must exceed 1"));
        }
        if !(self.epsilon > 0.0) {
            return Err(Error::domain("epsilon", self.epsilon, "must be positive"));
        }
        Ok(())
    }

    /// Initial data, length and spike center of the fixture. The spike sits at
    /// distance at most 1 from the base point, inside every ball the excess reads.
    fn geometry(&self) -> (f64, f64, f64, f64) {
        if self.k > 0.0 {
            let pi = pi_k(self.k / (self.n - 1.0));
            (0.0, 1.0, 1.5 * pi, (0.5 * pi).min(1.0))
        } else {
            (1.0, 0.0, self.length, 1.0)
        }
    }
}

/// One step of the experiment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceRow {
    pub i: usize,
    pub depth: f64,
    pub width: f64,
    pub min_kappa: f64,
    /// `k_{[M_i,o]}(p, K, R)`.
    pub excess: f64,
    /// Gromov–Wasserstein surrogate to the `κ ≡ K` space.
    pub gw: f64,
    /// Upper bound on Sturm's distance under the line embedding.
    pub sturm: f64,
    pub diameter: f64,
}

/// The experiment table and its verdicts.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceTable {
    pub config: ConvergenceConfig,
    pub rows: Vec<ConvergenceRow>,
    pub warnings: Vec<String>,
    /// First `i` from which the `sturm` column never increases.
    pub monotone_from: usize,
    pub final_distance: f64,
    /// `diam ≤ π_{K/(N-1)} + 1/i` on every row (always true for `K ≤ 0`).
    pub diameter_ok: bool,
    /// Monotone over the second half of the run, final distance below `ε` and the
    /// diameter bound holds.
    pub pass: bool,
}

impl ConvergenceTable {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("table serializes")
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("i,depth,width,min_kappa,excess,gw,sturm,diameter\n");
        for r in &self.rows {
            out.push_str(&format!(
                "{},{:e},{:e},{:e},{:e},{:e},{:e},{:e}\n",
                r.i, r.depth, r.width, r.min_kappa, r.excess, r.gw, r.sturm, r.diameter
            ));
        }
        out
    }
}

fn convergence_row(cfg: &ConvergenceConfig, i: usize) -> Result<ConvergenceRow> {
    let (u0, du0, length, center) = cfg.geometry();
    let spike = SpikedCurvature {
        k: cfg.k,
        depth: cfg.schedule.depth(i),
        width: cfg.schedule.width(i),
        center,
    };
    let flat = SpikedCurvature {
        depth: 0.0,
        ..spike
    };
    let build = |field: &SpikedCurvature| {
        make_line_atoms(field, &spike, cfg.n, u0, du0, length, cfg.h, cfg.sub_atoms)
    };
    let (mi, inf) = (build(&spike)?, build(&flat)?);
    let excess = mi
        .space
        .clone()
        .with_base(0)?
        .normalize_pointed()?
        .excess_k_pointed(cfg.p, cfg.k, cfg.radius)?;
    let (x, y) = (mi.space.normalize()?, inf.space.normalize()?);
    let gw = gw_surrogate(&x.clone().with_base(0)?, &y.clone().with_base(0)?)?.value;
    let sturm = sturm_d_upper(&x, &y, &line_cross_distances(&mi.positions, &inf.positions))?;
    Ok(ConvergenceRow {
        i,
        depth: spike.depth,
        width: spike.width,
        min_kappa: cfg.k - spike.depth,
        excess,
        gw,
        sturm,
        diameter: mi.space.diameter(),
    })
}

/// Builds the spiked spaces `M_i` for `i = 1..=i_max` and tabulates their excess,
/// their distance surrogates to the `κ ≡ K` space and their diameters.
///
/// Each `M_i` and its comparison space share one atom layout, so the distances
/// only see the change of the measure caused by the spike.
pub fn convergence_experiment(cfg: &ConvergenceConfig) -> Result<ConvergenceTable> {
    cfg.validate()?;
    let mut warnings = Vec::new();
    let rate = cfg.schedule.excess_rate(cfg.p);
    if rate >= 0.0 {
        warnings.push(format!(
            "schedule does not drive the excess to zero: excess grows like i^{rate}"
        ));
    }
    let rows: Vec<ConvergenceRow> = (1..=cfg.i_max)
        .into_par_iter()
        .map(|i| convergence_row(cfg, i))
        .collect::<Result<_>>()?;
    let mut monotone_from = cfg.i_max;
    while monotone_from > 1 && rows[monotone_from - 1].sturm <= rows[monotone_from - 2].sturm {
        monotone_from -= 1;
    }
    let final_distance = rows.last().unwrap().sturm;
    let diameter_ok = cfg.k <= 0.0 || {
        let pi = pi_k(cfg.k / (cfg.n - 1.0));
        rows.iter().all(|r| r.diameter <= pi + 1.0 / r.i as f64)
    };
    let pass =
        monotone_from <= (cfg.i_max / 2).max(1) && final_distance < cfg.epsilon && diameter_ok;
    Ok(ConvergenceTable {
        config: cfg.clone(),
        rows,
        warnings,
        monotone_from,
        final_distance,
        diameter_ok,
        pass,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::comparison_ode::tau;
    use crate::mm_core::{make_cd_fixture, make_model_space};

    fn ts() -> Vec<f64> {
        (0..=8).map(|i| i as f64 / 8.0).collect()
    }

    #[test]
    fn tau_along_matches_distortion() {
        let k = CurvatureProfile::from_fn(2.0, 40, |r| 1.0 + (3.0 * r).sin()).unwrap();
        let t = [0.0, 0.3, 0.5, 1.0];
        let got = tau_along(&k, 0.4, 1.0, 1.2, 3.0, &t).unwrap();
        let seg = k.along(0.4, 1.0, 1.2).unwrap();
        for (&ti, g) in t.iter().zip(&got) {
            let want = tau(&seg, 3.0, ti, 1.2).unwrap().unwrap();
            assert!((g.unwrap() - want).abs() < 1e-8, "t={ti}");
        }
        let back = tau_along(&k, 1.6, -1.0, 1.2, 3.0, &t).unwrap();
        let seg = k.along(1.6, -1.0, 1.2).unwrap();
        let want = tau(&seg, 3.0, 0.3, 1.2).unwrap().unwrap();
        assert!((back[1].unwrap() - want).abs() < 1e-8);
    }

    #[test]
    fn tau_along_is_infinite_past_first_zero() {
        let k = CurvatureProfile::constant(5.0, 2.0, 10).unwrap();
        // κ/(N-1) = 1, so π = π
        let v = tau_along(&k, 0.0, 1.0, 3.5, 3.0, &[0.0, 0.5]).unwrap();
        assert_eq!(v[0], ExtReal::Finite(0.0));
        assert!(v[1].is_infinite());
    }

    #[test]
    fn identical_measures_have_equal_sides() {
        let s = make_model_space(1.0, 3.0, 1e-2).unwrap();
        let mu = restricted_measure(&s, &(40..120).collect::<Vec<_>>()).unwrap();
        let r = check_cd_inequality(&s, &mu, &mu, &ts(), &[3.0], None).unwrap();
        for row in &r.details {
            assert!((row.lhs - row.rhs).abs() < 1e-12, "{row:?}");
        }
        assert!(r.pass);
    }

    #[test]
    fn model_space_passes_cd() {
        let s = make_model_space(1.0, 3.0, 1e-2).unwrap();
        let mu0 = restricted_measure(&s, &(10..60).collect::<Vec<_>>()).unwrap();
        let mu1 = restricted_measure(&s, &(150..300).collect::<Vec<_>>()).unwrap();
        let r = check_cd_inequality(&s, &mu0, &mu1, &ts(), &[3.0, 4.0, 8.0], None).unwrap();
        assert!(r.pass, "worst {}", r.worst_slack);
    }

    #[test]
    fn dimension_below_space_is_rejected() {
        let s = make_model_space(1.0, 3.0, 1e-2).unwrap();
        let mu = restricted_measure(&s, &[5]).unwrap();
        assert!(check_cd_inequality(&s, &mu, &mu, &[0.5], &[2.5], None).is_err());
    }

    #[test]
    fn zero_excess_gives_zero_error_term() {
        let k = CurvatureProfile::constant(3.0, 0.5, 30).unwrap();
        let s = make_cd_fixture(&k, 3.0, 1.0, 0.0, 1e-2)
            .unwrap()
            .with_base(0.0)
            .unwrap();
        let budget = ExcessBudget {
            k: 0.0,
            p: 2.0,
            radius: 1.0,
            epsilon: 0.1,
        };
        let mu0 = restricted_measure(&s, &(0..20).collect::<Vec<_>>()).unwrap();
        let mu1 = restricted_measure(&s, &(30..45).collect::<Vec<_>>()).unwrap();
        let r = check_resulta(&s, &budget, &mu0, &mu1, &ts(), None).unwrap();
        assert_eq!(r.params["error_term"], 0.0);
        assert!(r.pass, "worst {}", r.worst_slack);
    }

    #[test]
    fn resulta_rejects_long_geodesics() {
        let s = make_model_space(3.0, 3.0, 1e-2)
            .unwrap()
            .with_base(0.0)
            .unwrap();
        // π_{K/(N-1)} = π/√1.5 ≈ 2.57
        let budget = ExcessBudget {
            k: 3.0,
            p: 2.0,
            radius: 6.0,
            epsilon: 1.0,
        };
        let cells = s.cells();
        let mu0 = restricted_measure(&s, &[0]).unwrap();
        let mu1 = restricted_measure(&s, &[cells - 1]).unwrap();
        let err = check_resulta(&s, &budget, &mu0, &mu1, &[0.5], None).unwrap_err();
        assert!(err.to_string().contains("geodesic"), "{err}");
    }

    fn flat(len: f64, cells: usize, n: f64) -> OneDimMmSpace {
        let k = CurvatureProfile::constant(len, 0.0, cells).unwrap();
        OneDimMmSpace::new(len, vec![1.0; cells + 1], k, n, None).unwrap()
    }

    #[test]
    fn brunn_minkowski_flat_cases() {
        let s = flat(4.0, 400, 3.0);
        let a: Vec<usize> = (0..100).collect();
        let r = check_brunn_minkowski(&s, &a, &a, &ts(), 2.0, None).unwrap();
        assert_eq!(r.params["defect"], 0.0);
        assert!(r
            .details
            .iter()
            .all(|row| (row.lhs - row.rhs).abs() < 1e-15));
        // [0,1] and [3,4]: A_t has length 1, so the mass stays 1/4
        let b: Vec<usize> = (300..400).collect();
        let r = check_brunn_minkowski(&s, &a, &b, &ts(), 2.0, None).unwrap();
        for row in &r.details {
            assert!((row.rhs - 0.25f64.powf(1.0 / 3.0)).abs() < 1e-14);
        }
        assert!(r.pass);
    }

    #[test]
    fn minkowski_combination_merges() {
        let a = [(0.0, 1.0), (2.0, 3.0)];
        let b = [(0.0, 1.0)];
        // [0,1] and [1,2] touch, so they merge
        assert_eq!(minkowski_combination(&a, &b, 0.5), vec![(0.0, 2.0)]);
        assert_eq!(minkowski_combination(&a, &b, 0.0), a.to_vec());
    }

    #[test]
    fn bishop_gromov_flat_and_limits() {
        let s = flat(10.0, 1000, 3.0).with_base(5.0).unwrap();
        let r = check_bishop_gromov(&s, 0.0, 2.0, 8.0, &[0.25, 0.5, 0.9], &[2.0, 3.0, 4.0], None)
            .unwrap();
        assert_eq!(r.params["factor"], 1.0);
        assert!(r.pass, "worst {}", r.worst_slack);
        assert!((ball_ratio(&s, 0.0, 5.0, 0.7, 0.7).unwrap() - 1.0).abs() < 1e-15);
        assert!(check_bishop_gromov(&s, 0.0, 2.0, 8.0, &[1.0], &[2.0], None).is_err());
        assert!(check_bishop_gromov(&s, 0.0, 2.0, 8.0, &[0.5], &[5.0], None).is_err());
        // Ξ(0, N, D) = N
        let c = bishop_gromov_constant(0.0, 3.0, 2.0, 4.0).unwrap();
        assert!((c - 3.0 * 18f64.powf(1.0 / 3.0)).abs() < 1e-12);
    }

    #[test]
    fn mcp_on_model_space_from_apex() {
        let s = make_model_space(1.0, 3.0, 1e-2).unwrap();
        let a: Vec<usize> = (50..200).collect();
        let r = check_mcp(&s, 0.0, &a, 1.0, 3.0, &ts(), None).unwrap();
        assert!(r.pass, "worst {}", r.worst_slack);
        let last = r.details.last().unwrap();
        assert!((last.lhs - last.rhs).abs() < 1e-12);
        let far: Vec<usize> = (0..s.cells()).collect();
        // the whole interval reaches π
        assert!(check_mcp(&s, 0.0, &far, 1.0, 3.0, &[0.5], None).is_err());
    }

    #[test]
    fn mcp_entropy_on_model_space() {
        let s = make_model_space(1.0, 3.0, 1e-2)
            .unwrap()
            .with_base(0.0)
            .unwrap();
        let budget = ExcessBudget {
            k: 1.0,
            p: 2.0,
            radius: 2.0,
            epsilon: 0.2,
        };
        let a: Vec<usize> = (40..150).collect();
        let r = check_mcp_entropy(&s, 0.0, &a, &budget, 1.6, &ts(), None).unwrap();
        assert_eq!(r.params["error_term"], 0.0);
        for row in &r.details {
            // equality up to interpolating r^2 near the apex
            assert!(
                (row.lhs - row.rhs).abs() < 1e-3 * (1.0 + row.lhs.abs()),
                "{row:?}"
            );
        }
        assert!(r.pass);
    }

    #[test]
    fn convergence_single_step_is_well_formed() {
        let t = convergence_experiment(&ConvergenceConfig::new(0.0, 3.0, 2.0, 1)).unwrap();
        assert_eq!(t.rows.len(), 1);
        assert_eq!(t.monotone_from, 1);
        assert!(t.warnings.is_empty());
        let back: ConvergenceTable = serde_json::from_str(&t.to_json()).unwrap();
        assert_eq!(back, t);
        assert_eq!(t.to_csv().lines().count(), 2);
    }

    #[test]
    fn growing_schedule_warns() {
        let mut cfg = ConvergenceConfig::new(0.0, 3.0, 2.0, 1);
        cfg.schedule = SpikeSchedule {
            depth_exponent: 2.0,
            width_exponent: 1.0,
        };
        assert_eq!(convergence_experiment(&cfg).unwrap().warnings.len(), 1);
    }
}
