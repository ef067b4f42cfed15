//! Generalized sine functions for variable curvature and the distortion
//! coefficients built from them.
//!
//! For a curvature profile `κ` on `[0, L]` the generalized sine `s_κ` solves
//! `v'' + κ v = 0`, `v(0) = 0`, `v'(0) = 1`, and `π_κ` is its first positive zero
//! (`+∞` when `s_κ > 0` on all of `(0, L]`). The distortion coefficient is
//! `σ_κ^(t)(θ) = s_κ(tθ) / s_κ(θ)` for `θ < π_κ` and `+∞` otherwise; the modified
//! coefficient is `τ_{κ,N}^(t)(θ) = t^{1/N} σ_{κ/(N-1)}^(t)(θ)^{1-1/N}`.

use crate::integrate::{integrate, StepControl};
use crate::report::{ReportBuilder, Tolerance};
use crate::{Error, ExtReal, Result, VerificationReport};
use serde::{Deserialize, Serialize};

/// Relative resolution to which `π_κ` is resolved.
pub const PI_REL_TOL: f64 = 1e-10;

/// Piecewise-linear curvature samples on a uniform grid `0 = r_0 < … < r_M = L`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ProfileJson", into = "ProfileJson")]
pub struct CurvatureProfile {
    length: f64,
    samples: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
struct ProfileJson {
    #[serde(rename = "L")]
    length: f64,
    samples: Vec<f64>,
}

impl TryFrom<ProfileJson> for CurvatureProfile {
    type Error = Error;
    fn try_from(p: ProfileJson) -> Result<Self> {
        CurvatureProfile::new(p.length, p.samples)
    }
}

impl From<CurvatureProfile> for ProfileJson {
    fn from(p: CurvatureProfile) -> Self {
        ProfileJson {
            length: p.length,
            samples: p.samples,
        }
    }
}

impl CurvatureProfile {
    pub fn new(length: f64, samples: Vec<f64>) -> Result<Self> {
        if !(length.is_finite() && length > 0.0) {
            return Err(Error::InvalidProfile(format!(
                "length must be positive and finite, got {length}"
            )));
        }
        if samples.len() < 3 {
            return Err(Error::InvalidProfile(format!(
                "need at least 3 samples (M >= 2), got {}",
                samples.len()
            )));
        }
        if let Some(bad) = samples.iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidProfile(format!(
                "sample {bad} is not finite ({})",
                samples[bad]
            )));
        }
        Ok(CurvatureProfile { length, samples })
    }

    /// Constant profile `κ ≡ value` with `m` grid cells.
    pub fn constant(length: f64, value: f64, m: usize) -> Result<Self> {
        CurvatureProfile::new(length, vec![value; m.max(2) + 1])
    }

    /// Samples an arbitrary function on `m` uniform cells.
    pub fn from_fn<F: Fn(f64) -> f64>(length: f64, m: usize, f: F) -> Result<Self> {
        let m = m.max(2);
        let h = length / m as f64;
        CurvatureProfile::new(length, (0..=m).map(|k| f(k as f64 * h)).collect())
    }

    pub fn length(&self) -> f64 {
        self.length
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    /// Number of grid cells `M`.
    pub fn cells(&self) -> usize {
        self.samples.len() - 1
    }

    pub fn step(&self) -> f64 {
        self.length / self.cells() as f64
    }

    pub fn node(&self, k: usize) -> f64 {
        if k == self.cells() {
            self.length
        } else {
            k as f64 * self.step()
        }
    }

    /// Piecewise-linear interpolation, clamped to the end values outside `[0, L]`.
    pub fn eval(&self, r: f64) -> f64 {
        let m = self.cells();
        if r <= 0.0 {
            return self.samples[0];
        }
        if r >= self.length {
            return self.samples[m];
        }
        let x = r / self.step();
        let k = (x.floor() as usize).min(m - 1);
        let w = x - k as f64;
        self.samples[k] * (1.0 - w) + self.samples[k + 1] * w
    }

    /// The profile `r ↦ factor · κ(r)`.
    pub fn scaled(&self, factor: f64) -> CurvatureProfile {
        CurvatureProfile {
            length: self.length,
            samples: self.samples.iter().map(|v| v * factor).collect(),
        }
    }

    /// `κ` read along the unit-speed segment `r ↦ start + direction·r`, `r ∈ [0, θ]`,
    /// resampled at (at most) half the parent grid spacing.
    pub fn along(&self, start: f64, direction: f64, theta: f64) -> Result<CurvatureProfile> {
        let m = ((2.0 * theta / self.step()).ceil() as usize).max(2);
        CurvatureProfile::from_fn(theta, m, |r| self.eval(start + direction * r))
    }

    /// Whether the slope changes at interior node `j`; nodes where the profile is
    /// linear on both sides are not kinks.
    pub fn bends_at(&self, j: usize) -> bool {
        let s = &self.samples;
        let second = s[j - 1] - 2.0 * s[j] + s[j + 1];
        second.abs() > 1e-12 * (1.0 + s[j - 1].abs().max(s[j].abs()).max(s[j + 1].abs()))
    }

    pub fn min(&self) -> f64 {
        self.samples.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.samples
            .iter()
            .copied()
            .fold(f64::NEG_INFINITY, f64::max)
    }
}

/// Numerical generalized sine/cosine pair on the profile grid.
#[derive(Debug, Clone)]
pub struct SinSolution {
    profile: CurvatureProfile,
    s: Vec<f64>,
    c: Vec<f64>,
    pi_kappa: ExtReal,
    ctl: StepControl,
}

/// Integrates `v'' + κ v = 0`, `v(0)=0`, `v'(0)=1` on the profile grid and locates `π_κ`.
pub fn solve_generalized_sin(profile: &CurvatureProfile) -> Result<SinSolution> {
    SinSolution::new(profile.clone(), StepControl::default())
}

impl SinSolution {
    pub fn new(profile: CurvatureProfile, ctl: StepControl) -> Result<Self> {
        let (s, c) = solve_on_grid(&profile, [0.0, 1.0], ctl)?;
        let mut sol = SinSolution {
            profile,
            s,
            c,
            pi_kappa: ExtReal::INFINITY,
            ctl,
        };
        sol.pi_kappa = sol.locate_first_zero()?;
        Ok(sol)
    }

    pub fn profile(&self) -> &CurvatureProfile {
        &self.profile
    }

    pub fn s_values(&self) -> &[f64] {
        &self.s
    }

    pub fn c_values(&self) -> &[f64] {
        &self.c
    }

    /// First positive zero of `s_κ`, or `∞` when `s_κ > 0` on `(0, L]`.
    pub fn pi_kappa(&self) -> ExtReal {
        self.pi_kappa
    }

    /// `(s_κ(r), c_κ(r))` for `r ∈ [0, L]`, integrated from the nearest grid node below.
    pub fn eval(&self, r: f64) -> Result<(f64, f64)> {
        let len = self.profile.length();
        if !(r >= -1e-12 * len && r <= len * (1.0 + 1e-12)) {
            return Err(Error::domain("r", r, format!("outside [0, {len}]")));
        }
        let r = r.clamp(0.0, len);
        let h = self.profile.step();
        let m = self.profile.cells();
        let k = ((r / h).floor() as usize).min(m);
        let r0 = self.profile.node(k);
        if r == r0 {
            return Ok((self.s[k], self.c[k]));
        }
        let p = &self.profile;
        let y = integrate(&|x| p.eval(x), r0, r, [self.s[k], self.c[k]], self.ctl)?;
        Ok((y[0], y[1]))
    }

    fn locate_first_zero(&self) -> Result<ExtReal> {
        let Some(k) = (1..self.s.len()).find(|&k| self.s[k] <= 0.0) else {
            return Ok(ExtReal::INFINITY);
        };
        let mut lo = self.profile.node(k - 1);
        let mut hi = self.profile.node(k);
        if self.s[k] == 0.0 {
            return Ok(ExtReal::Finite(hi));
        }
        while hi - lo > 1e-3 * PI_REL_TOL * hi {
            let mid = 0.5 * (lo + hi);
            if self.eval(mid)?.0 > 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        Ok(ExtReal::Finite(0.5 * (lo + hi)))
    }

    /// `σ_κ^(t)(θ)`.
    pub fn sigma(&self, t: f64, theta: f64) -> Result<ExtReal> {
        check_t(t)?;
        let len = self.profile.length();
        if !(theta >= 0.0 && theta <= len * (1.0 + 1e-12)) {
            return Err(Error::domain("theta", theta, format!("outside [0, {len}]")));
        }
        if let ExtReal::Finite(pi) = self.pi_kappa {
            // θ within the bracketing resolution of π_κ counts as reaching it.
            if theta >= pi * (1.0 - PI_REL_TOL) {
                return Ok(ExtReal::INFINITY);
            }
        }
        if theta == 0.0 {
            // limit θ → 0
            return Ok(ExtReal::Finite(t));
        }
        if t == 1.0 {
            return Ok(ExtReal::Finite(1.0));
        }
        let num = self.eval(t * theta)?.0;
        let den = self.eval(theta)?.0;
        Ok(ExtReal::Finite(num / den))
    }
}

fn check_t(t: f64) -> Result<()> {
    if (0.0..=1.0).contains(&t) {
        Ok(())
    } else {
        Err(Error::domain("t", t, "must lie in [0, 1]"))
    }
}

fn check_n(n: f64) -> Result<()> {
    if n >= 2.0 && n.is_finite() {
        Ok(())
    } else {
        Err(Error::domain(
            "N",
            n,
            "dimension bound must satisfy 2 <= N < inf",
        ))
    }
}

/// Solution of `v'' + q v = 0` with the given initial values at every grid node.
pub(crate) fn solve_on_grid(
    profile: &CurvatureProfile,
    y0: [f64; 2],
    ctl: StepControl,
) -> Result<(Vec<f64>, Vec<f64>)> {
    let m = profile.cells();
    let mut s = Vec::with_capacity(m + 1);
    let mut c = Vec::with_capacity(m + 1);
    s.push(y0[0]);
    c.push(y0[1]);
    let mut y = y0;
    for k in 0..m {
        y = integrate(
            &|x| profile.eval(x),
            profile.node(k),
            profile.node(k + 1),
            y,
            ctl,
        )?;
        s.push(y[0]);
        c.push(y[1]);
    }
    Ok((s, c))
}

/// `σ_κ^(t)(θ)` for the profile `κ`.
pub fn sigma(profile: &CurvatureProfile, t: f64, theta: f64) -> Result<ExtReal> {
    check_t(t)?;
    if theta > profile.length() * (1.0 + 1e-12) {
        return Err(Error::domain("theta", theta, "exceeds profile length"));
    }
    solve_generalized_sin(profile)?.sigma(t, theta)
}

/// `τ_{κ,N}^(t)(θ)` for the profile `κ`.
pub fn tau(profile: &CurvatureProfile, n: f64, t: f64, theta: f64) -> Result<ExtReal> {
    Distortion::new(profile, n)?.tau(t, theta)
}

/// Distortion coefficients of one profile for repeated `(t, θ)` queries.
///
/// Holds the solution for `κ/(N-1)`, which is what `τ_{κ,N}` reads.
#[derive(Debug, Clone)]
pub struct Distortion {
    scaled: SinSolution,
    n: f64,
}

impl Distortion {
    pub fn new(profile: &CurvatureProfile, n: f64) -> Result<Self> {
        check_n(n)?;
        let scaled = solve_generalized_sin(&profile.scaled(1.0 / (n - 1.0)))?;
        Ok(Distortion { scaled, n })
    }

    pub fn n(&self) -> f64 {
        self.n
    }

    /// The solution for `κ/(N-1)`.
    pub fn scaled_solution(&self) -> &SinSolution {
        &self.scaled
    }

    /// `σ_{κ/(N-1)}^(t)(θ)`.
    pub fn sigma_scaled(&self, t: f64, theta: f64) -> Result<ExtReal> {
        self.scaled.sigma(t, theta)
    }

    pub fn tau(&self, t: f64, theta: f64) -> Result<ExtReal> {
        let n = self.n;
        let sigma = self.scaled.sigma(t, theta)?;
        Ok(sigma.powf(1.0 - 1.0 / n).scale(t.powf(1.0 / n)))
    }
}

/// `sin_k(r)`: the generalized sine for constant curvature `k`.
pub fn sin_k(k: f64, r: f64) -> f64 {
    if k > 0.0 {
        let a = k.sqrt();
        (a * r).sin() / a
    } else if k < 0.0 {
        let a = (-k).sqrt();
        (a * r).sinh() / a
    } else {
        r
    }
}

/// Derivative of [`sin_k`].
pub fn cos_k(k: f64, r: f64) -> f64 {
    if k > 0.0 {
        (k.sqrt() * r).cos()
    } else if k < 0.0 {
        ((-k).sqrt() * r).cosh()
    } else {
        1.0
    }
}

/// First zero `π/√k` of `sin_k`, `∞` for `k ≤ 0`.
pub fn pi_k(k: f64) -> f64 {
    if k > 0.0 {
        std::f64::consts::PI / k.sqrt()
    } else {
        f64::INFINITY
    }
}

/// `sin_{K/(N-1)}(r)`.
pub fn model_sin(k_curv: f64, n: f64, r: f64) -> f64 {
    sin_k(k_curv / (n - 1.0), r)
}

/// `π_{K/(N-1)}`, the diameter of the model space.
pub fn model_diameter(k_curv: f64, n: f64) -> f64 {
    pi_k(k_curv / (n - 1.0))
}

/// Closed-form `σ_k^(t)(θ)` for constant curvature `k`.
pub fn sigma_const(k: f64, t: f64, theta: f64) -> ExtReal {
    if theta >= pi_k(k) {
        return ExtReal::INFINITY;
    }
    if theta == 0.0 {
        return ExtReal::Finite(t);
    }
    ExtReal::Finite(sin_k(k, t * theta) / sin_k(k, theta))
}

/// Closed-form `τ_{K,N}^(t)(θ)` for constant `K`.
pub fn tau_const(k_curv: f64, n: f64, t: f64, theta: f64) -> ExtReal {
    sigma_const(k_curv / (n - 1.0), t, theta)
        .powf(1.0 - 1.0 / n)
        .scale(t.powf(1.0 / n))
}

/// Model volume `v_{K,N}(R) = ∫_0^R sin_{K/(N-1)}^{N-1}(r) dr`.
pub fn model_volume(k_curv: f64, n: f64, radius: f64) -> Result<f64> {
    check_n(n)?;
    if !(radius >= 0.0) {
        return Err(Error::domain("R", radius, "radius must be nonnegative"));
    }
    let diam = model_diameter(k_curv, n);
    if radius > diam * (1.0 + 1e-12) {
        return Err(Error::domain(
            "R",
            radius,
            format!("exceeds model diameter {diam}"),
        ));
    }
    let r_end = radius.min(diam);
    if r_end == 0.0 {
        return Ok(0.0);
    }
    let k = k_curv / (n - 1.0);
    Ok(crate::quadrature::adaptive(
        &|r| sin_k(k, r).max(0.0).powf(n - 1.0),
        0.0,
        r_end,
        1e-12,
    ))
}

/// Options for [`check_sigma_concavity`].
#[derive(Debug, Clone)]
pub struct ConcavityOptions {
    /// Geodesics longer than this are skipped.
    pub max_length: f64,
    pub t_grid: Vec<f64>,
    /// Explicit geodesics as pairs of grid indices; all pairs (strided) when `None`.
    pub pairs: Option<Vec<(usize, usize)>>,
    /// Upper bound on the number of generated pairs when `pairs` is `None`.
    pub max_pairs: usize,
    pub tol: Tolerance,
}

impl Default for ConcavityOptions {
    fn default() -> Self {
        ConcavityOptions {
            max_length: f64::INFINITY,
            t_grid: (1..10).map(|k| k as f64 / 10.0).collect(),
            pairs: None,
            max_pairs: 400,
            tol: Tolerance::rhs(1e-6),
        }
    }
}

/// Checks `u(γ(t)) ≥ σ_{κ⁻_γ}^(1-t)(θ) u(γ(0)) + σ_{κ⁺_γ}^(t)(θ) u(γ(1))` along
/// geodesics between grid nodes. `u` is sampled on the profile grid.
///
/// Each requested `t` is snapped to the nearest grid-aligned parameter on the
/// geodesic so that `u` is never interpolated.
pub fn check_sigma_concavity(
    u: &[f64],
    profile: &CurvatureProfile,
    opts: &ConcavityOptions,
) -> Result<VerificationReport> {
    let m = profile.cells();
    if u.len() != m + 1 {
        return Err(Error::InvalidProfile(format!(
            "u has {} samples but the profile grid has {}",
            u.len(),
            m + 1
        )));
    }
    if u.iter().any(|v| !(*v >= 0.0)) {
        return Err(Error::InvalidProfile("u must be nonnegative".into()));
    }
    let h = profile.step();
    let pairs: Vec<(usize, usize)> = match &opts.pairs {
        Some(p) => p.clone(),
        None => {
            let max_span = ((opts.max_length / h).floor() as usize).min(m);
            let total = (1..=max_span).map(|d| m + 1 - d).sum::<usize>().max(1);
            let stride = ((total as f64 / opts.max_pairs as f64).sqrt().ceil() as usize).max(1);
            let mut v = Vec::new();
            for i in (0..=m).step_by(stride) {
                for j in ((i + 1)..=m.min(i + max_span)).step_by(stride) {
                    v.push((i, j));
                }
            }
            v
        }
    };

    let mut b = ReportBuilder::new("sigma_concavity", &["i", "j", "t"])
        .tolerance(opts.tol)
        .param("max_length", opts.max_length);
    for &(i, j) in &pairs {
        if i == j || i > m || j > m {
            continue;
        }
        let (a, z) = (i.min(j), i.max(j));
        let span = z - a;
        let theta = span as f64 * h;
        if theta > opts.max_length {
            continue;
        }
        let forward = SinSolution::new(
            profile.along(profile.node(a), 1.0, theta)?,
            StepControl::default(),
        )?;
        let backward = SinSolution::new(
            profile.along(profile.node(z), -1.0, theta)?,
            StepControl::default(),
        )?;
        for &t in &opts.t_grid {
            let k = (t * span as f64).round() as usize;
            let ts = k as f64 / span as f64;
            let combo = backward.sigma(1.0 - ts, theta)?.scale(u[a])
                + forward.sigma(ts, theta)?.scale(u[z]);
            b.push(vec![a as f64, z as f64, ts], combo.to_f64(), u[a + k]);
        }
    }
    Ok(b.finish())
}
