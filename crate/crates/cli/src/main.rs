//! Command-line front end: loads spaces and profiles from JSON, runs the checkers
//! and experiments, and writes reports as JSON and CSV.

// `!(x > 0.0)` style checks are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod commands;
mod io;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Parser, Debug)]
#[command(
    name = "cdkit",
    version,
    about = "Curvature-dimension checks for metric measure spaces"
)]
struct Cli {
    /// Directory for report files; nothing is written when omitted.
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// Violation tolerance; each checker keeps its own scaling convention.
    #[arg(long, global = true, env = "CDKIT_TOL")]
    tol: Option<f64>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Evaluate a distortion coefficient or π_κ for a curvature profile.
    Distortion(DistortionArgs),
    /// Integral curvature excess of a space.
    Excess(ExcessArgs),
    /// Displacement convexity of the Rényi entropy.
    VerifyCd(VerifyCdArgs),
    /// Entropy inequality with the excess error term.
    VerifyResulta(VerifyResultaArgs),
    /// Brunn–Minkowski inequality with defect.
    VerifyBm(VerifyBmArgs),
    /// Bishop–Gromov ratio bound.
    VerifyBg(VerifyBgArgs),
    /// Measure contraction towards a point.
    VerifyMcp(VerifyMcpArgs),
    /// Cusp-sequence convergence experiment.
    Converge(ConvergeArgs),
    /// Gromov–Wasserstein surrogate distance between two finite spaces.
    Dist(DistArgs),
    /// Generate a fixture space or profile as JSON.
    Fixture(FixtureArgs),
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
enum Coefficient {
    Tau,
    Sigma,
    Pi,
}

#[derive(Args, Debug)]
#[command(allow_negative_numbers = true)]
struct DistortionArgs {
    /// Curvature profile JSON `{"L", "samples"}`.
    #[arg(long)]
    kappa: PathBuf,
    #[arg(long = "N")]
    n: Option<f64>,
    #[arg(long)]
    t: Option<f64>,
    #[arg(long)]
    theta: Option<f64>,
    #[arg(long, value_enum, default_value = "tau")]
    coefficient: Coefficient,
}

#[derive(Args, Debug)]
#[command(allow_negative_numbers = true)]
struct ExcessArgs {
    #[arg(long)]
    space: PathBuf,
    #[arg(long)]
    p: f64,
    #[arg(long = "K")]
    k: f64,
    /// Pointed excess over B_R(o) of the pointed-normalized space.
    #[arg(long = "R")]
    radius: Option<f64>,
}

/// A closed interval written `a,b`.
#[derive(Clone, Copy, Debug)]
struct Interval(f64, f64);

fn parse_interval(s: &str) -> Result<Interval, String> {
    let (a, b) = s.split_once(',').ok_or("expected a,b")?;
    let a: f64 = a.trim().parse().map_err(|e| format!("{e}"))?;
    let b: f64 = b.trim().parse().map_err(|e| format!("{e}"))?;
    if !(a < b) {
        return Err(format!("empty interval {a},{b}"));
    }
    Ok(Interval(a, b))
}

#[derive(Args, Debug)]
#[command(allow_negative_numbers = true)]
struct VerifyCdArgs {
    #[arg(long)]
    space: PathBuf,
    /// Support of μ0; defaults to [0.05 L, 0.35 L].
    #[arg(long, value_parser = parse_interval)]
    mu0: Option<Interval>,
    /// Support of μ1; defaults to [0.55 L, 0.95 L].
    #[arg(long, value_parser = parse_interval)]
    mu1: Option<Interval>,
    /// Number of equally spaced t values in [0, 1].
    #[arg(long, default_value_t = 9)]
    t_points: usize,
    /// Dimension parameters N' ≥ N; defaults to the space's N.
    #[arg(long = "N-grid", value_delimiter = ',')]
    n_grid: Vec<f64>,
}

#[derive(Args, Debug)]
#[command(allow_negative_numbers = true)]
struct Budget {
    #[arg(long = "K")]
    k: f64,
    #[arg(long)]
    p: f64,
    #[arg(long = "R", default_value_t = 2.0)]
    radius: f64,
    #[arg(long, default_value_t = 0.1)]
    epsilon: f64,
}

#[derive(Args, Debug)]
#[command(allow_negative_numbers = true)]
struct VerifyResultaArgs {
    /// Pointed one-dimensional space.
    #[arg(long)]
    space: PathBuf,
    #[command(flatten)]
    budget: Budget,
    /// Support of μ0; defaults to the left part of B_{R/2}(o).
    #[arg(long, value_parser = parse_interval)]
    mu0: Option<Interval>,
    /// Support of μ1; defaults to the right part of B_{R/2}(o).
    #[arg(long, value_parser = parse_interval)]
    mu1: Option<Interval>,
    #[arg(long, default_value_t = 9)]
    t_points: usize,
}

#[derive(Args, Debug)]
#[command(allow_negative_numbers = true)]
struct VerifyBmArgs {
    #[arg(long)]
    space: PathBuf,
    #[arg(long)]
    p: f64,
    /// Defaults to [0, 0.3 L].
    #[arg(long, value_parser = parse_interval)]
    a0: Option<Interval>,
    /// Defaults to [0.6 L, L].
    #[arg(long, value_parser = parse_interval)]
    a1: Option<Interval>,
    #[arg(long, default_value_t = 9)]
    t_points: usize,
}

#[derive(Args, Debug)]
#[command(allow_negative_numbers = true)]
struct VerifyBgArgs {
    /// Pointed one-dimensional space.
    #[arg(long)]
    space: PathBuf,
    #[arg(long = "K")]
    k: f64,
    #[arg(long)]
    p: f64,
    /// Diameter bound D; the outer radii range over [2, D/2].
    #[arg(long = "D")]
    d: f64,
    #[arg(long, default_value_t = 19)]
    r_points: usize,
    #[arg(long = "R-points", default_value_t = 5)]
    big_r_points: usize,
}

#[derive(Args, Debug)]
#[command(allow_negative_numbers = true)]
struct VerifyMcpArgs {
    #[arg(long)]
    space: PathBuf,
    /// Contraction point.
    #[arg(long)]
    x0: f64,
    /// The contracted set A.
    #[arg(long, value_parser = parse_interval)]
    a: Interval,
    #[arg(long = "K")]
    k: f64,
    #[arg(long, default_value_t = 9)]
    t_points: usize,
    /// Also run the entropy form with the excess error term (needs a pointed space).
    #[arg(long)]
    entropy: bool,
    /// Exponent p of the entropy form.
    #[arg(long, default_value_t = 2.0)]
    p: f64,
    #[arg(long = "R", default_value_t = 2.0)]
    radius: f64,
    #[arg(long, default_value_t = 0.1)]
    epsilon: f64,
    /// Radius r with A ⊂ B_r(x0) for the entropy form.
    #[arg(long)]
    r: Option<f64>,
}

#[derive(Args, Debug)]
#[command(allow_negative_numbers = true)]
struct ConvergeArgs {
    #[arg(long = "K", default_value_t = 0.0)]
    k: f64,
    #[arg(long = "N", default_value_t = 3.0)]
    n: f64,
    #[arg(long, default_value_t = 2.0)]
    p: f64,
    #[arg(long, default_value_t = 30)]
    i_max: usize,
    #[arg(long)]
    h: Option<f64>,
    #[arg(long)]
    sub_atoms: Option<usize>,
    #[arg(long)]
    length: Option<f64>,
    #[arg(long = "R")]
    radius: Option<f64>,
    #[arg(long)]
    epsilon: Option<f64>,
    /// Spike depth grows like i^a.
    #[arg(long)]
    depth_exponent: Option<f64>,
    /// Spike width shrinks like i^{-b}.
    #[arg(long)]
    width_exponent: Option<f64>,
}

#[derive(Args, Debug)]
#[command(allow_negative_numbers = true)]
struct DistArgs {
    #[arg(long)]
    x: PathBuf,
    #[arg(long)]
    y: PathBuf,
}

#[derive(Args, Debug)]
#[command(allow_negative_numbers = true)]
struct FixtureArgs {
    #[command(subcommand)]
    kind: FixtureKind,
    /// Output file; printed to stdout when omitted.
    #[arg(long, short = 'o', global = true)]
    output: Option<PathBuf>,
}

#[derive(Subcommand, Debug)]
enum FixtureKind {
    /// Constant curvature profile.
    #[command(allow_negative_numbers = true)]
    Profile {
        #[arg(long = "K")]
        k: f64,
        #[arg(long = "L")]
        length: f64,
        #[arg(long, default_value_t = 64)]
        cells: usize,
    },
    /// Profile with a triangular dip of the given depth and width.
    #[command(allow_negative_numbers = true)]
    Spike {
        #[arg(long = "K")]
        k: f64,
        #[arg(long)]
        depth: f64,
        #[arg(long)]
        width: f64,
        #[arg(long)]
        center: f64,
        #[arg(long = "L")]
        length: f64,
        #[arg(long)]
        cells: Option<usize>,
    },
    /// The model interval I_{K,N}, K > 0.
    #[command(allow_negative_numbers = true)]
    Model {
        #[arg(long = "K")]
        k: f64,
        #[arg(long = "N")]
        n: f64,
        #[arg(long, default_value_t = 0.01)]
        h: f64,
    },
    /// Interval whose density solves the Jacobi equation for a profile.
    #[command(allow_negative_numbers = true)]
    Cd {
        /// Curvature profile JSON.
        #[arg(long)]
        kappa: PathBuf,
        #[arg(long = "N")]
        n: f64,
        #[arg(long, default_value_t = 1.0)]
        u0: f64,
        #[arg(long, default_value_t = 0.0)]
        du0: f64,
        #[arg(long, default_value_t = 0.01)]
        h: f64,
        #[arg(long)]
        base: Option<f64>,
    },
    /// Uniform density with constant curvature.
    #[command(allow_negative_numbers = true)]
    Flat {
        #[arg(long = "L")]
        length: f64,
        #[arg(long = "K", default_value_t = 0.0)]
        k: f64,
        #[arg(long = "N")]
        n: f64,
        #[arg(long, default_value_t = 100)]
        cells: usize,
        #[arg(long)]
        base: Option<f64>,
    },
    /// Equally spaced points on a circle with the arc metric.
    #[command(allow_negative_numbers = true)]
    Circle {
        #[arg(long)]
        points: usize,
        #[arg(long, default_value_t = std::f64::consts::TAU)]
        circumference: f64,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match commands::run(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
