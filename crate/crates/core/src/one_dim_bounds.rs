//! One-dimensional estimates between a variable curvature bound `κ` and a
//! constant `K`: the Riccati comparison function `ψ`, the explicit constants and
//! checkers for each inequality.
//!
//! With `ω = s_{κ/(N-1)}^{N-1}` and `g = log ω`, `g' = (N-1) c/s`, and
//! `ψ = max(0, g' - g'_K)` where `g_K` is the same quantity for constant `K`.

use crate::comparison_ode::{cos_k, pi_k, sin_k, tau_const, SinSolution};
use crate::integrate::{integrate, StepControl};
use crate::quadrature::GaussLegendre;
use crate::report::{ReportBuilder, Tolerance};
use crate::{CurvatureProfile, Error, Result, VerificationReport};
use serde::{Deserialize, Serialize};

/// Longest sub-piece handed to a single Gauss rule.
const MAX_PIECE: f64 = 0.05;

/// Relative size below which `g' - g'_K` is indistinguishable from zero.
const GAP_FLOOR: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonContext {
    pub profile: CurvatureProfile,
    #[serde(rename = "K")]
    pub k: f64,
    #[serde(rename = "N")]
    pub n: f64,
    pub p: f64,
    pub epsilon: f64,
}

impl ComparisonContext {
    pub fn new(profile: CurvatureProfile, k: f64, n: f64, p: f64, epsilon: f64) -> Result<Self> {
        let ctx = ComparisonContext {
            profile,
            k,
            n,
            p,
            epsilon,
        };
        ctx.validate()?;
        Ok(ctx)
    }

    pub fn validate(&self) -> Result<()> {
        if !self.k.is_finite() {
            return Err(Error::domain("K", self.k, "must be finite"));
        }
        if !(self.n >= 2.0 && self.n.is_finite()) {
            return Err(Error::domain("N", self.n, "must satisfy 2 <= N < inf"));
        }
        if !(self.p > self.n / 2.0 && self.p.is_finite()) {
            return Err(Error::domain(
                "p",
                self.p,
                format!("must exceed N/2 = {}", self.n / 2.0),
            ));
        }
        if !(self.epsilon > 0.0) {
            return Err(Error::domain("epsilon", self.epsilon, "must be positive"));
        }
        let pi = self.model_pi();
        if self.k > 0.0 && self.epsilon >= pi {
            return Err(Error::domain(
                "epsilon",
                self.epsilon,
                format!("must be below the model diameter {pi}"),
            ));
        }
        Ok(())
    }

    /// `K/(N-1)`.
    pub fn k_scaled(&self) -> f64 {
        self.k / (self.n - 1.0)
    }

    /// `π_{K/(N-1)}`.
    pub fn model_pi(&self) -> f64 {
        pi_k(self.k_scaled())
    }
}

/// A function sampled at explicit abscissae.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Sampled {
    pub r: Vec<f64>,
    pub values: Vec<f64>,
}

/// `C'(p,N) = (2p-1)^p ((N-1)/(2p-N))^{p-1}`.
pub fn const_c_prime(p: f64, n: f64) -> Result<f64> {
    if !(n >= 2.0 && n.is_finite()) {
        return Err(Error::domain("N", n, "must satisfy 2 <= N < inf"));
    }
    if !(p > n / 2.0 && p.is_finite()) {
        return Err(Error::domain(
            "p",
            p,
            format!("must exceed N/2 = {}", n / 2.0),
        ));
    }
    Ok((2.0 * p - 1.0).powf(p) * ((n - 1.0) / (2.0 * p - n)).powf(p - 1.0))
}

/// `C = C'(p,N)` for `K ≤ 0`, `max{C'(p,N), s_{K/(N-1)}(ε)^{-4p+N+1}}` for `K > 0`.
pub fn const_c(ctx: &ComparisonContext) -> Result<f64> {
    ctx.validate()?;
    let c1 = const_c_prime(ctx.p, ctx.n)?;
    if ctx.k <= 0.0 {
        return Ok(c1);
    }
    let s = sin_k(ctx.k_scaled(), ctx.epsilon);
    Ok(c1.max(s.powf(-4.0 * ctx.p + ctx.n + 1.0)))
}

/// `C` from the scalar parameters alone; the profile plays no part in it.
pub fn const_c_for(k: f64, n: f64, p: f64, epsilon: f64) -> Result<f64> {
    let ctx = ComparisonContext::new(CurvatureProfile::constant(1.0, k, 1)?, k, n, p, epsilon)?;
    const_c(&ctx)
}

/// `Λ(K,N,ε) = 1 + max_{r ∈ [π/2, π-ε]} s_{K/(N-1)}(r)^{-(N-1)}` with `π = π_{K/(N-1)}`;
/// `Λ = 1` for `K ≤ 0`.
pub fn const_lambda(k: f64, n: f64, epsilon: f64) -> Result<f64> {
    if !(n >= 2.0 && n.is_finite()) {
        return Err(Error::domain("N", n, "must satisfy 2 <= N < inf"));
    }
    if k <= 0.0 {
        return Ok(1.0);
    }
    let ks = k / (n - 1.0);
    let pi = pi_k(ks);
    if !(epsilon > 0.0 && epsilon < pi / 2.0) {
        return Err(Error::domain(
            "epsilon",
            epsilon,
            format!("must lie in (0, {}) for K > 0", pi / 2.0),
        ));
    }
    let f = |r: f64| sin_k(ks, r).powf(-(n - 1.0));
    let (a, b) = (pi / 2.0, pi - epsilon);
    let m = 256;
    let step = (b - a) / m as f64;
    let best = (0..=m)
        .map(|i| a + i as f64 * step)
        .max_by(|x, y| f(*x).total_cmp(&f(*y)))
        .unwrap_or(a);
    let lo = (best - step).max(a);
    let hi = (best + step).min(b);
    let refined = golden_max(&f, lo, hi);
    Ok(1.0 + f(refined).max(f(best)).max(f(a)).max(f(b)))
}

fn golden_max<F: Fn(f64) -> f64>(f: &F, mut a: f64, mut b: f64) -> f64 {
    let g = (5f64.sqrt() - 1.0) / 2.0;
    let mut x1 = b - g * (b - a);
    let mut x2 = a + g * (b - a);
    let (mut f1, mut f2) = (f(x1), f(x2));
    for _ in 0..100 {
        if (b - a).abs() <= 1e-14 * (1.0 + a.abs()) {
            break;
        }
        if f1 < f2 {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + g * (b - a);
            f2 = f(x2);
        } else {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - g * (b - a);
            f1 = f(x1);
        }
    }
    0.5 * (a + b)
}

/// Solved comparison problem: `s_{κ/(N-1)}` together with the constant model.
#[derive(Debug, Clone)]
pub struct Comparison {
    ctx: ComparisonContext,
    sol: SinSolution,
}

impl Comparison {
    pub fn new(ctx: &ComparisonContext) -> Result<Self> {
        ctx.validate()?;
        let scaled = ctx.profile.scaled(1.0 / (ctx.n - 1.0));
        let sol = SinSolution::new(scaled, StepControl::default())?;
        Ok(Comparison {
            ctx: ctx.clone(),
            sol,
        })
    }

    pub fn context(&self) -> &ComparisonContext {
        &self.ctx
    }

    /// Solution for `κ/(N-1)`.
    pub fn solution(&self) -> &SinSolution {
        &self.sol
    }

    /// `π_{κ/(N-1)}` (possibly `∞`).
    pub fn pi_kappa(&self) -> f64 {
        self.sol.pi_kappa().to_f64()
    }

    pub fn omega_at(&self, r: f64) -> Result<f64> {
        let (s, _) = self.sol.eval(r)?;
        Ok(s.max(0.0).powf(self.ctx.n - 1.0))
    }

    /// `g'(r) - g'_K(r)` for `0 < r < min(π_κ, π_K)`.
    fn gap_from(&self, r: f64, s: f64, c: f64) -> f64 {
        let nm1 = self.ctx.n - 1.0;
        let ks = self.ctx.k_scaled();
        nm1 * (c / s - cos_k(ks, r) / sin_k(ks, r))
    }

    fn check_psi_domain(&self, r: f64) -> Result<()> {
        let lim = self.pi_kappa().min(self.ctx.model_pi());
        if !(r >= 0.0 && r < lim && r <= self.ctx.profile.length()) {
            return Err(Error::domain(
                "r",
                r,
                format!("psi is defined on [0, min(L, pi_kappa, pi_K)) = [0, {lim})"),
            ));
        }
        Ok(())
    }

    /// `ψ_{K,N-1}(r)`.
    pub fn psi_at(&self, r: f64) -> Result<f64> {
        self.check_psi_domain(r)?;
        if r == 0.0 {
            return Ok(0.0);
        }
        let (s, c) = self.sol.eval(r)?;
        Ok(self.psi_from(r, s, c))
    }

    /// `(κ(r) - K)_-`, the negative part as a nonnegative number.
    pub fn excess_at(&self, r: f64) -> f64 {
        (self.ctx.k - self.ctx.profile.eval(r)).max(0.0)
    }

    /// Breakpoints of the integrands on `[a, b]`: profile nodes, crossings of `κ = K`
    /// and sign changes of `g' - g'_K`, refined to pieces no longer than `MAX_PIECE`.
    fn pieces(&self, a: f64, b: f64) -> Result<Vec<f64>> {
        let prof = &self.ctx.profile;
        let h = prof.step();
        let mut pts = vec![a];
        let first = (a / h).floor() as usize + 1;
        for k in first..prof.cells() {
            let x = prof.node(k);
            if x >= b {
                break;
            }
            pts.push(x);
        }
        pts.push(b);
        let mut out = vec![a];
        for w in pts.windows(2) {
            let (x0, x1) = (w[0], w[1]);
            if x1 <= x0 {
                continue;
            }
            let mut cell = vec![x0];
            // κ is linear on [x0, x1].
            let (k0, k1) = (prof.eval(x0) - self.ctx.k, prof.eval(x1) - self.ctx.k);
            if k0 * k1 < 0.0 {
                cell.push(x0 + (x1 - x0) * k0 / (k0 - k1));
            }
            let m = ((x1 - x0) / MAX_PIECE).ceil().max(1.0) as usize;
            for j in 1..m {
                cell.push(x0 + (x1 - x0) * j as f64 / m as f64);
            }
            cell.push(x1);
            cell.sort_by(f64::total_cmp);
            for seg in cell.windows(2) {
                if let Some(root) = self.gap_root(seg[0], seg[1])? {
                    out.push(root);
                }
                out.push(seg[1]);
            }
        }
        out.dedup_by(|x, y| (*x - *y).abs() <= 1e-15 * (1.0 + y.abs()));
        Ok(out)
    }

    fn gap_sign(&self, r: f64) -> Result<Option<bool>> {
        if r <= 0.0 || r >= self.ctx.model_pi() {
            return Ok(None);
        }
        let (s, c) = self.sol.eval(r)?;
        if s <= 0.0 {
            return Ok(None);
        }
        let g = self.gap_from(r, s, c);
        let scale = (self.ctx.n - 1.0) * (c / s).abs();
        if g.abs() <= GAP_FLOOR * (1.0 + scale) {
            return Ok(None);
        }
        Ok(Some(g > 0.0))
    }

    fn gap_root(&self, a: f64, b: f64) -> Result<Option<f64>> {
        let (Some(sa), Some(sb)) = (self.gap_sign(a)?, self.gap_sign(b)?) else {
            return Ok(None);
        };
        if sa == sb {
            return Ok(None);
        }
        let (mut lo, mut hi) = (a, b);
        for _ in 0..60 {
            let mid = 0.5 * (lo + hi);
            match self.gap_sign(mid)? {
                Some(s) if s == sa => lo = mid,
                Some(_) => hi = mid,
                None => return Ok(Some(mid)),
            }
            if hi - lo <= 1e-14 * (1.0 + hi) {
                break;
            }
        }
        Ok(Some(0.5 * (lo + hi)))
    }

    /// `∫_a^b f(r, s(r), c(r)) dr` with `(s, c)` the solution for `κ/(N-1)`.
    ///
    /// Each kink-free piece gets a 10-point Gauss rule; the solution is carried
    /// forward through the nodes of a piece.
    pub fn integrate<F: Fn(f64, f64, f64) -> f64>(&self, a: f64, b: f64, f: F) -> Result<f64> {
        if b <= a {
            return Ok(0.0);
        }
        let rule = GaussLegendre::ten();
        let scaled = self.sol.profile();
        let q = |x: f64| scaled.eval(x);
        let ctl = StepControl::default();
        let mut total = 0.0;
        for seg in self.pieces(a, b)?.windows(2) {
            let (x0, x1) = (seg[0], seg[1]);
            let (s0, c0) = self.sol.eval(x0)?;
            let mut y = [s0, c0];
            let mut at = x0;
            let mut acc = 0.0;
            for (x, w) in rule.mapped(x0, x1) {
                y = integrate(&q, at, x, y, ctl)?;
                at = x;
                acc += w * f(x, y[0], y[1]);
            }
            total += acc;
        }
        Ok(total)
    }

    /// `ψ` evaluated from an already-known solution state.
    ///
    /// Gaps below the rounding floor of `g'` are reported as zero: later fractional
    /// powers such as `(·)^{1/N}` would otherwise amplify pure noise.
    fn psi_from(&self, r: f64, s: f64, c: f64) -> f64 {
        if r <= 0.0 || s <= 0.0 {
            return 0.0;
        }
        let g = self.gap_from(r, s, c);
        if g <= GAP_FLOOR * (1.0 + (self.ctx.n - 1.0) * (c / s).abs()) {
            0.0
        } else {
            g
        }
    }

    fn omega_from(&self, s: f64) -> f64 {
        s.max(0.0).powf(self.ctx.n - 1.0)
    }
}

/// `ω = s_{κ/(N-1)}^{N-1}` on the profile grid (zero past `π_{κ/(N-1)}`).
pub fn omega(ctx: &ComparisonContext) -> Result<Sampled> {
    let cmp = Comparison::new(ctx)?;
    let pi = cmp.pi_kappa();
    let r: Vec<f64> = (0..=ctx.profile.cells())
        .map(|k| ctx.profile.node(k))
        .collect();
    let values = r
        .iter()
        .zip(cmp.sol.s_values())
        .map(|(&x, &s)| if x < pi { cmp.omega_from(s) } else { 0.0 })
        .collect();
    Ok(Sampled { r, values })
}

/// `ψ_{K,N-1}` on the profile nodes below `min(π_{κ/(N-1)}, π_{K/(N-1)})`.
pub fn psi(ctx: &ComparisonContext) -> Result<Sampled> {
    let cmp = Comparison::new(ctx)?;
    let lim = cmp.pi_kappa().min(ctx.model_pi());
    let mut r = Vec::new();
    let mut values = Vec::new();
    for k in 0..=ctx.profile.cells() {
        let x = ctx.profile.node(k);
        if x >= lim {
            break;
        }
        r.push(x);
        values.push(cmp.psi_from(x, cmp.sol.s_values()[k], cmp.sol.c_values()[k]));
    }
    Ok(Sampled { r, values })
}

/// Which of the two Petersen–Wei–Aubry ranges `r0` falls in.
fn pwa_range(cmp: &Comparison, r0: f64) -> Result<u8> {
    let ctx = cmp.context();
    let len = ctx.profile.length();
    let pik = ctx.model_pi();
    if !(r0 >= 0.0 && r0 <= len) {
        return Err(Error::domain(
            "r0",
            r0,
            format!("must lie in [0, L = {len}]"),
        ));
    }
    if r0 >= cmp.pi_kappa() {
        return Err(Error::domain(
            "r0",
            r0,
            format!("must be below pi_kappa = {}", cmp.pi_kappa()),
        ));
    }
    if r0 <= pik / 2.0 {
        Ok(1)
    } else if r0 < pik {
        Ok(2)
    } else {
        Err(Error::domain(
            "r0",
            r0,
            format!("must be below pi_K = {pik}"),
        ))
    }
}

/// Weight applied to the left side of the second Petersen–Wei–Aubry display.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PwaWeight {
    /// `sin(√k r0)^{4p-N-1}` with `k = K/(N-1)`: dimensionless, and equal to
    /// `s_k(r0)^{4p-N-1}` at `k = 1`.
    #[default]
    ScaleInvariant,
    /// `s_k(r0)^{4p-N-1}` literally. Not invariant under rescaling; fails for `k < 1`.
    Literal,
}

fn push_pwa(b: &mut ReportBuilder, cmp: &Comparison, r0: f64, weight: PwaWeight) -> Result<()> {
    let ctx = cmp.context();
    let range = pwa_range(cmp, r0)?;
    let c1 = const_c_prime(ctx.p, ctx.n)?;
    let p = ctx.p;
    let (lhs, rhs) = if r0 == 0.0 {
        (0.0, 0.0)
    } else {
        let (s, c) = cmp.sol.eval(r0)?;
        let mut lhs = cmp.psi_from(r0, s, c).powf(2.0 * p - 1.0) * cmp.omega_from(s);
        if range == 2 {
            let ks = ctx.k_scaled();
            let base = match weight {
                PwaWeight::ScaleInvariant => (ks.sqrt() * r0).sin(),
                PwaWeight::Literal => sin_k(ks, r0),
            };
            lhs *= base.powf(4.0 * p - ctx.n - 1.0);
        }
        let integral = cmp.integrate(0.0, r0, |r, s, _| {
            cmp.excess_at(r).powf(p) * cmp.omega_from(s)
        })?;
        (lhs, c1 * integral)
    };
    b.push(vec![r0, range as f64], lhs, rhs);
    Ok(())
}

fn builder(name: &str, grid: &[&str], ctx: &ComparisonContext, tol: Tolerance) -> ReportBuilder {
    ReportBuilder::new(name, grid)
        .tolerance(tol)
        .param("K", ctx.k)
        .param("N", ctx.n)
        .param("p", ctx.p)
        .param("epsilon", ctx.epsilon)
        .param("L", ctx.profile.length())
}

/// Pointwise Petersen–Wei–Aubry bound at `r0`; the second display applies for
/// `r0 ∈ (π_K/2, π_K)`.
pub fn check_pwa(ctx: &ComparisonContext, r0: f64) -> Result<VerificationReport> {
    check_pwa_at(ctx, &[r0], Tolerance::default())
}

/// [`check_pwa`] at several radii.
pub fn check_pwa_at(
    ctx: &ComparisonContext,
    radii: &[f64],
    tol: Tolerance,
) -> Result<VerificationReport> {
    check_pwa_weighted(ctx, radii, tol, PwaWeight::default())
}

pub fn check_pwa_weighted(
    ctx: &ComparisonContext,
    radii: &[f64],
    tol: Tolerance,
    weight: PwaWeight,
) -> Result<VerificationReport> {
    let cmp = Comparison::new(ctx)?;
    let mut b = builder("petersen_wei_aubry", &["r0", "range"], ctx, tol);
    for &r0 in radii {
        push_pwa(&mut b, &cmp, r0, weight)?;
    }
    Ok(b.finish())
}

/// Admissible radii for the Petersen–Wei–Aubry bound: `count` points in each
/// nonempty range, staying `margin` (relative) away from `π_κ` and `π_K`.
pub fn pwa_radii(ctx: &ComparisonContext, count: usize) -> Result<Vec<f64>> {
    let cmp = Comparison::new(ctx)?;
    let len = ctx.profile.length();
    let top = len
        .min(cmp.pi_kappa() * (1.0 - 1e-6))
        .min(ctx.model_pi() * (1.0 - 1e-6));
    let half = ctx.model_pi() / 2.0;
    let mut out = Vec::new();
    let end1 = top.min(half);
    for i in 1..=count {
        out.push((end1 * i as f64 / count as f64).min(end1));
    }
    if top > half {
        for i in 1..=count {
            out.push((half + (top - half) * i as f64 / count as f64).min(top));
        }
    }
    Ok(out)
}

fn check_theta_upper(cmp: &Comparison, theta: f64, need_below_pi_kappa: bool) -> Result<()> {
    let ctx = cmp.context();
    let len = ctx.profile.length();
    let cap = ctx.model_pi() - if ctx.k > 0.0 { ctx.epsilon } else { 0.0 };
    if !(theta > 0.0 && theta <= len && theta < cap) {
        return Err(Error::domain(
            "theta",
            theta,
            format!("must lie in (0, min(L = {len}, pi_K - epsilon = {cap}))"),
        ));
    }
    if need_below_pi_kappa && theta >= cmp.pi_kappa() {
        return Err(Error::domain(
            "theta",
            theta,
            format!("must be below pi_kappa = {}", cmp.pi_kappa()),
        ));
    }
    Ok(())
}

/// `∫_0^θ ψ^{2p-1} ω dr ≤ C θ ∫_0^θ (κ-K)_-^p ω dr`.
pub fn check_integrated_bound(ctx: &ComparisonContext, theta: f64) -> Result<VerificationReport> {
    check_integrated_bound_at(ctx, &[theta], Tolerance::default())
}

pub fn check_integrated_bound_at(
    ctx: &ComparisonContext,
    thetas: &[f64],
    tol: Tolerance,
) -> Result<VerificationReport> {
    let cmp = Comparison::new(ctx)?;
    let c = const_c(ctx)?;
    let p = ctx.p;
    let mut b = builder("integrated_bound", &["theta"], ctx, tol).param("C", c);
    for &theta in thetas {
        check_theta_upper(&cmp, theta, true)?;
        let lhs = cmp.integrate(0.0, theta, |r, s, c| {
            cmp.psi_from(r, s, c).powf(2.0 * p - 1.0) * cmp.omega_from(s)
        })?;
        let rhs = c
            * theta
            * cmp.integrate(0.0, theta, |r, s, _| {
                cmp.excess_at(r).powf(p) * cmp.omega_from(s)
            })?;
        b.push(vec![theta], lhs, rhs);
    }
    Ok(b.finish())
}

fn check_t(t: f64) -> Result<()> {
    if (0.0..=1.0).contains(&t) {
        Ok(())
    } else {
        Err(Error::domain("t", t, "must lie in [0, 1]"))
    }
}

/// Pieces shared by the two distortion-coefficient checks at `(t, θ)`.
struct CoeffTerms {
    tau_model: f64,
    tau_kappa: Option<f64>,
    s_theta: f64,
}

fn coeff_terms(cmp: &Comparison, t: f64, theta: f64) -> Result<CoeffTerms> {
    let ctx = cmp.context();
    check_t(t)?;
    check_theta_upper(cmp, theta, false)?;
    let tau_model = tau_const(ctx.k, ctx.n, t, theta).to_f64();
    let sigma = cmp.sol.sigma(t, theta)?;
    let tau_kappa = sigma
        .finite()
        .map(|sg| t.powf(1.0 / ctx.n) * sg.powf(1.0 - 1.0 / ctx.n));
    let s_theta = if tau_kappa.is_some() {
        cmp.sol.eval(theta)?.0
    } else {
        0.0
    };
    Ok(CoeffTerms {
        tau_model,
        tau_kappa,
        s_theta,
    })
}

/// `τ_K^(t)(θ) ≤ τ_κ^(t)(θ) + Λ^{1/N} [tθ ∫_t^1 ψ(sθ) σ_κ^(s)(θ)^{N-1} ds]^{1/N}`.
pub fn check_lemma_b(ctx: &ComparisonContext, t: f64, theta: f64) -> Result<VerificationReport> {
    check_lemma_b_at(ctx, &[(t, theta)], Tolerance::default())
}

pub fn check_lemma_b_at(
    ctx: &ComparisonContext,
    points: &[(f64, f64)],
    tol: Tolerance,
) -> Result<VerificationReport> {
    let cmp = Comparison::new(ctx)?;
    let lambda = const_lambda(ctx.k, ctx.n, ctx.epsilon)?;
    let n = ctx.n;
    let mut b = builder("lemma_b", &["t", "theta"], ctx, tol).param("Lambda", lambda);
    for &(t, theta) in points {
        let terms = coeff_terms(&cmp, t, theta)?;
        let rhs = match terms.tau_kappa {
            None => f64::INFINITY,
            Some(tk) => {
                let st = terms.s_theta;
                // tθ ∫_t^1 ψ(sθ) σ^(s)(θ)^{N-1} ds = t ∫_{tθ}^θ ψ(r) (s(r)/s(θ))^{N-1} dr
                let inner = t * cmp.integrate(t * theta, theta, |r, s, c| {
                    cmp.psi_from(r, s, c) * (s / st).max(0.0).powf(n - 1.0)
                })?;
                tk + lambda.powf(1.0 / n) * inner.max(0.0).powf(1.0 / n)
            }
        };
        b.push(vec![t, theta], terms.tau_model, rhs);
    }
    Ok(b.finish())
}

/// The distortion-coefficient perturbation bound
/// `τ_K - τ_κ ≤ Λ^{1/N} (C t θ^{2p} ∫_0^1 (κ(sθ)-K)_-^p σ_κ^(s)(θ)^{N-1} ds)^{1/(N(2p-1))}
///  · (∫_t^1 τ_κ^(s)(θ)^N ds)^{(2p-2)/(N(2p-1))}`.
pub fn check_dist_coeff_bound(
    ctx: &ComparisonContext,
    t: f64,
    theta: f64,
) -> Result<VerificationReport> {
    check_dist_coeff_bound_at(ctx, &[(t, theta)], Tolerance::default())
}

pub fn check_dist_coeff_bound_at(
    ctx: &ComparisonContext,
    points: &[(f64, f64)],
    tol: Tolerance,
) -> Result<VerificationReport> {
    let cmp = Comparison::new(ctx)?;
    let lambda = const_lambda(ctx.k, ctx.n, ctx.epsilon)?;
    let c = const_c(ctx)?;
    let (n, p) = (ctx.n, ctx.p);
    let mut b = builder("distortion_perturbation", &["t", "theta"], ctx, tol)
        .param("Lambda", lambda)
        .param("C", c);
    for &(t, theta) in points {
        let terms = coeff_terms(&cmp, t, theta)?;
        let Some(tk) = terms.tau_kappa else {
            b.push(vec![t, theta], f64::NEG_INFINITY, f64::INFINITY);
            continue;
        };
        let st = terms.s_theta;
        let ratio = |s: f64| (s / st).max(0.0).powf(n - 1.0);
        let excess =
            cmp.integrate(0.0, theta, |r, s, _| cmp.excess_at(r).powf(p) * ratio(s))? / theta;
        let tail = cmp.integrate(t * theta, theta, |r, s, _| (r / theta) * ratio(s))? / theta;
        let e = n * (2.0 * p - 1.0);
        let rhs = lambda.powf(1.0 / n)
            * (c * t * theta.powf(2.0 * p) * excess)
                .max(0.0)
                .powf(1.0 / e)
            * tail.max(0.0).powf((2.0 * p - 2.0) / e);
        b.push(vec![t, theta], terms.tau_model - tk, rhs);
    }
    Ok(b.finish())
}
