use std::path::Path;

use anyhow::{bail, Context, Result};
use cdkit::cd_verify::*;
use cdkit::comparison_ode::{solve_generalized_sin, Distortion};
use cdkit::mm_core::{circle_space, make_cd_fixture, make_model_space, make_spiked_profile};
use cdkit::transport::gw_surrogate;
use cdkit::{CurvatureProfile, DiscreteMeasure, ExtReal, OneDimMmSpace, Tolerance};

use crate::io::{emit, load_finite, load_line, load_profile, load_space, write_atomic, AnySpace};
use crate::*;

/// Returns whether every check passed; `Err` means the input was rejected.
pub fn run(cli: &Cli) -> Result<bool> {
    if let Some(tol) = cli.tol {
        if !(tol > 0.0 && tol.is_finite()) {
            bail!("--tol / CDKIT_TOL = {tol} must be positive");
        }
    }
    let out = cli.out.as_deref();
    match &cli.command {
        Command::Distortion(a) => distortion(a),
        Command::Excess(a) => excess(a),
        Command::VerifyCd(a) => verify_cd(a, cli.tol, out),
        Command::VerifyResulta(a) => verify_resulta(a, cli.tol, out),
        Command::VerifyBm(a) => verify_bm(a, cli.tol, out),
        Command::VerifyBg(a) => verify_bg(a, cli.tol, out),
        Command::VerifyMcp(a) => verify_mcp(a, cli.tol, out),
        Command::Converge(a) => converge(a, out),
        Command::Dist(a) => dist(a),
        Command::Fixture(a) => fixture(a),
    }
}

fn show(v: ExtReal) -> String {
    match v.finite() {
        Some(x) => format!("{x:?}"),
        None => "inf".into(),
    }
}

fn require(name: &str, v: Option<f64>) -> Result<f64> {
    v.with_context(|| format!("--{name} is required"))
}

fn distortion(a: &DistortionArgs) -> Result<bool> {
    let profile = load_profile("kappa", &a.kappa)?;
    let value = match a.coefficient {
        Coefficient::Pi => solve_generalized_sin(&profile)?.pi_kappa(),
        Coefficient::Sigma => solve_generalized_sin(&profile)?
            .sigma(require("t", a.t)?, require("theta", a.theta)?)?,
        Coefficient::Tau => Distortion::new(&profile, require("N", a.n)?)?
            .tau(require("t", a.t)?, require("theta", a.theta)?)?,
    };
    println!("{}", show(value));
    Ok(true)
}

fn excess(a: &ExcessArgs) -> Result<bool> {
    let value = match (load_space("space", &a.space)?, a.radius) {
        (AnySpace::Line(s), None) => s.excess_k(a.p, a.k)?,
        (AnySpace::Line(s), Some(r)) => s.normalize_pointed()?.excess_k_pointed(a.p, a.k, r)?,
        (AnySpace::Finite(s), None) => s.excess_k(a.p, a.k)?,
        (AnySpace::Finite(s), Some(r)) => s.normalize_pointed()?.excess_k_pointed(a.p, a.k, r)?,
    };
    println!("{value:?}");
    Ok(true)
}

/// Keeps the checker's scaling convention and replaces only the threshold.
fn override_tol(default: Tolerance, tol: Option<f64>) -> Option<Tolerance> {
    tol.map(|t| Tolerance { tol: t, ..default })
}

fn t_grid(points: usize) -> Result<Vec<f64>> {
    if points < 2 {
        bail!("--t-points must be at least 2");
    }
    Ok((0..points)
        .map(|i| i as f64 / (points - 1) as f64)
        .collect())
}

fn cells_in(space: &OneDimMmSpace, flag: &str, iv: Interval) -> Result<Vec<usize>> {
    let cells: Vec<usize> = (0..space.cells())
        .filter(|&j| space.node(j) >= iv.0 - 1e-12 && space.node(j + 1) <= iv.1 + 1e-12)
        .collect();
    if cells.is_empty() {
        bail!(
            "--{flag}: [{}, {}] contains no grid cell of [0, {}]",
            iv.0,
            iv.1,
            space.length()
        );
    }
    Ok(cells)
}

fn measure_on(space: &OneDimMmSpace, flag: &str, iv: Interval) -> Result<DiscreteMeasure> {
    Ok(restricted_measure(space, &cells_in(space, flag, iv)?)?)
}

fn verify_cd(a: &VerifyCdArgs, tol: Option<f64>, out: Option<&Path>) -> Result<bool> {
    let s = load_line("space", &a.space)?;
    let l = s.length();
    let mu0 = measure_on(&s, "mu0", a.mu0.unwrap_or(Interval(0.05 * l, 0.35 * l)))?;
    let mu1 = measure_on(&s, "mu1", a.mu1.unwrap_or(Interval(0.55 * l, 0.95 * l)))?;
    let n_grid = if a.n_grid.is_empty() {
        vec![s.n()]
    } else {
        a.n_grid.clone()
    };
    let tol = override_tol(default_tolerance(&s), tol);
    emit(
        &check_cd_inequality(&s, &mu0, &mu1, &t_grid(a.t_points)?, &n_grid, tol)?,
        out,
    )
}

fn budget(b: &Budget) -> ExcessBudget {
    ExcessBudget {
        k: b.k,
        p: b.p,
        radius: b.radius,
        epsilon: b.epsilon,
    }
}

fn base_of(s: &OneDimMmSpace) -> Result<f64> {
    s.base()
        .context("--space: this check needs a pointed space (set \"base\")")
}

fn verify_resulta(a: &VerifyResultaArgs, tol: Option<f64>, out: Option<&Path>) -> Result<bool> {
    let s = load_line("space", &a.space)?;
    let o = base_of(&s)?;
    let half = 0.45 * a.budget.radius;
    let (lo, hi) = ((o - half).max(0.0), (o + half).min(s.length()));
    let w = hi - lo;
    let mu0 = measure_on(&s, "mu0", a.mu0.unwrap_or(Interval(lo, lo + 0.4 * w)))?;
    let mu1 = measure_on(&s, "mu1", a.mu1.unwrap_or(Interval(hi - 0.4 * w, hi)))?;
    let tol = override_tol(default_tolerance(&s), tol);
    emit(
        &check_resulta(
            &s,
            &budget(&a.budget),
            &mu0,
            &mu1,
            &t_grid(a.t_points)?,
            tol,
        )?,
        out,
    )
}

fn verify_bm(a: &VerifyBmArgs, tol: Option<f64>, out: Option<&Path>) -> Result<bool> {
    let s = load_line("space", &a.space)?;
    let l = s.length();
    let a0 = cells_in(&s, "a0", a.a0.unwrap_or(Interval(0.0, 0.3 * l)))?;
    let a1 = cells_in(&s, "a1", a.a1.unwrap_or(Interval(0.6 * l, l)))?;
    let tol = override_tol(default_tolerance(&s), tol);
    emit(
        &check_brunn_minkowski(&s, &a0, &a1, &t_grid(a.t_points)?, a.p, tol)?,
        out,
    )
}

fn verify_bg(a: &VerifyBgArgs, tol: Option<f64>, out: Option<&Path>) -> Result<bool> {
    let s = load_line("space", &a.space)?;
    base_of(&s)?;
    if !(a.d >= 4.0) {
        bail!("--D = {} leaves no outer radius in [2, D/2]", a.d);
    }
    if a.r_points == 0 || a.big_r_points == 0 {
        bail!("--r-points and --R-points must be positive");
    }
    let rs: Vec<f64> = (1..=a.r_points)
        .map(|i| i as f64 / (a.r_points + 1) as f64)
        .collect();
    let top = 0.5 * a.d;
    let big: Vec<f64> = if a.big_r_points == 1 {
        vec![2.0]
    } else {
        (0..a.big_r_points)
            .map(|i| 2.0 + (top - 2.0) * i as f64 / (a.big_r_points - 1) as f64)
            .collect()
    };
    let tol = override_tol(default_tolerance(&s), tol);
    emit(
        &check_bishop_gromov(&s, a.k, a.p, a.d, &rs, &big, tol)?,
        out,
    )
}

fn verify_mcp(a: &VerifyMcpArgs, tol: Option<f64>, out: Option<&Path>) -> Result<bool> {
    let s = load_line("space", &a.space)?;
    let cells = cells_in(&s, "a", a.a)?;
    let ts = t_grid(a.t_points)?;
    let tol = override_tol(default_tolerance(&s), tol);
    let mut pass = emit(&check_mcp(&s, a.x0, &cells, a.k, s.n(), &ts, tol)?, out)?;
    if a.entropy {
        let b = ExcessBudget {
            k: a.k,
            p: a.p,
            radius: a.radius,
            epsilon: a.epsilon,
        };
        let r = require("r", a.r)?;
        pass &= emit(&check_mcp_entropy(&s, a.x0, &cells, &b, r, &ts, tol)?, out)?;
    }
    Ok(pass)
}

fn converge(a: &ConvergeArgs, out: Option<&Path>) -> Result<bool> {
    let mut cfg = ConvergenceConfig::new(a.k, a.n, a.p, a.i_max);
    cfg.h = a.h.unwrap_or(cfg.h);
    cfg.sub_atoms = a.sub_atoms.unwrap_or(cfg.sub_atoms);
    cfg.length = a.length.unwrap_or(cfg.length);
    cfg.radius = a.radius.unwrap_or(cfg.radius);
    cfg.epsilon = a.epsilon.unwrap_or(cfg.epsilon);
    cfg.schedule.depth_exponent = a.depth_exponent.unwrap_or(cfg.schedule.depth_exponent);
    cfg.schedule.width_exponent = a.width_exponent.unwrap_or(cfg.schedule.width_exponent);
    let table = convergence_experiment(&cfg)?;
    for w in &table.warnings {
        eprintln!("warning: {w}");
    }
    println!(
        "convergence: {} (final distance {:e}, monotone from i = {}, diameter bound {})",
        if table.pass { "PASS" } else { "FAIL" },
        table.final_distance,
        table.monotone_from,
        if table.diameter_ok {
            "holds"
        } else {
            "violated"
        }
    );
    if let Some(dir) = out {
        write_atomic(&dir.join("convergence.json"), &table.to_json())?;
        write_atomic(&dir.join("convergence.csv"), &table.to_csv())?;
    }
    Ok(table.pass)
}

fn dist(a: &DistArgs) -> Result<bool> {
    let x = load_finite("x", &a.x)?.normalize().context("--x")?;
    let y = load_finite("y", &a.y)?.normalize().context("--y")?;
    let r = gw_surrogate(&x, &y)?;
    println!("{:?}", r.value);
    Ok(true)
}

fn fixture(a: &FixtureArgs) -> Result<bool> {
    let json = match &a.kind {
        FixtureKind::Profile { k, length, cells } => {
            serde_json::to_string_pretty(&CurvatureProfile::constant(*length, *k, *cells)?)?
        }
        FixtureKind::Spike {
            k,
            depth,
            width,
            center,
            length,
            cells,
        } => serde_json::to_string_pretty(&make_spiked_profile(
            *k, *depth, *width, *center, *length, *cells,
        )?)?,
        FixtureKind::Model { k, n, h } => {
            serde_json::to_string_pretty(&make_model_space(*k, *n, *h)?)?
        }
        FixtureKind::Cd {
            kappa,
            n,
            u0,
            du0,
            h,
            base,
        } => {
            let s = make_cd_fixture(&load_profile("kappa", kappa)?, *n, *u0, *du0, *h)?;
            serde_json::to_string_pretty(&with_base(s, *base)?)?
        }
        FixtureKind::Flat {
            length,
            k,
            n,
            cells,
            base,
        } => {
            let kappa = CurvatureProfile::constant(*length, *k, *cells)?;
            let s = OneDimMmSpace::new(*length, vec![1.0; cells + 1], kappa, *n, None)?;
            serde_json::to_string_pretty(&with_base(s, *base)?)?
        }
        FixtureKind::Circle {
            points,
            circumference,
        } => serde_json::to_string_pretty(&circle_space(*points, *circumference)?)?,
    };
    match &a.output {
        Some(path) => write_atomic(path, &json)?,
        None => println!("{json}"),
    }
    Ok(true)
}

fn with_base(s: OneDimMmSpace, base: Option<f64>) -> Result<OneDimMmSpace> {
    Ok(match base {
        Some(b) => s.with_base(b).context("--base")?,
        None => s,
    })
}
