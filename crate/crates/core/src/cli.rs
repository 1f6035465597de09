//! The `fracnls` command line.
//!
//! Every subcommand reads one TOML configuration (see [`crate::config`]) and
//! writes its artifacts into the output directory. Exit codes: 0 success,
//! 1 validation, 2 solver failure (including failed invariants in `verify`),
//! 3 I/O.

use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use rayon::prelude::*;
use serde::Serialize;

use crate::checks::{self, Check};
use crate::config::RunConfig;
use crate::coupled::{
    default_epsilon, path_box, path_energy_surface, seed_fiber_maximum, solve_continuation, solve_min_rayleigh,
    CoupledSolution, PathBox,
};
use crate::error::{Error, Result};
use crate::io::{self, write_atomic, write_json, COUPLED_FILE, SCALAR_FILE, THRESHOLDS_FILE};
use crate::params::SystemParams;
use crate::scalar::{
    scalar_level, scaled_solution, solve_w0, unit_lambda_coupling, ScalarGroundState,
};
use crate::spectral::{hs_seminorm_sq, lp_integral, mass};
use crate::thresholds::{classify, regime_sweep_csv, Regime, ThresholdReport};

/// `println!` that ignores a closed stdout.
macro_rules! say {
    ($($arg:tt)*) => {{
        use std::io::Write;
        let _ = writeln!(std::io::stdout().lock(), $($arg)*);
    }};
}

#[derive(Debug, Parser)]
#[command(name = "fracnls", version, about = "Normalized solutions of coupled fractional Schrodinger systems")]
struct Cli {
    /// TOML run configuration.
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Output directory; overrides the environment and the configuration.
    #[arg(long, global = true, value_name = "DIR")]
    out: Option<PathBuf>,
    /// Seed of the random initial pair of the Rayleigh descent.
    #[arg(long, global = true, value_name = "N")]
    seed: Option<u64>,
    /// Run a solver outside the regime it is meant for.
    #[arg(long, global = true)]
    force: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Ground state w0, its constants and residuals.
    SolveScalar,
    /// Table of the scaled family over the configured (a, mu) lattice.
    Constants,
    /// Coupling thresholds, regime, and a regime sweep in beta.
    Thresholds,
    /// Coupled solution with the solver matching the regime.
    SolveSystem,
    /// Energy over the two-parameter dilation path and its fiber curves.
    Paths,
    /// Recheck every invariant of the artifacts in the output directory.
    Verify,
    /// Classify, and optionally solve, a range of couplings in parallel.
    Sweep,
}

/// Runs the CLI on the process arguments and returns the exit code.
pub fn main() -> i32 {
    run(std::env::args_os())
}

/// Runs the CLI on `args` (program name first) and returns the exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
        }
    };
    match dispatch(&cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error[{}]: {e}", e.variant());
            e.exit_code()
        }
    }
}

struct Ctx {
    cfg: RunConfig,
    out: PathBuf,
    force: bool,
}

fn dispatch(cli: &Cli) -> Result<i32> {
    let path = cli.config.as_deref().ok_or_else(|| Error::Config("no configuration given; pass --config PATH".into()))?;
    let mut cfg = RunConfig::load(path)?;
    if let Some(seed) = cli.seed {
        cfg.rayleigh.seed = seed;
    }
    if cli.force {
        cfg.rayleigh.force = true;
        cfg.continuation.force = true;
    }
    let out = cfg.output_dir(cli.out.as_deref());
    let ctx = Ctx { cfg, out, force: cli.force };
    match cli.command {
        Command::SolveScalar => solve_scalar(&ctx),
        Command::Constants => constants(&ctx),
        Command::Thresholds => thresholds(&ctx),
        Command::SolveSystem => solve_system(&ctx),
        Command::Paths => paths(&ctx),
        Command::Verify => verify(&ctx),
        Command::Sweep => sweep(&ctx),
    }
}

fn solve_scalar(ctx: &Ctx) -> Result<i32> {
    let gs = solve_w0(ctx.cfg.problem, ctx.cfg.grid()?, ctx.cfg.solver)?;
    let path = io::save_scalar(&ctx.out, &gs, ctx.cfg.output.format)?;
    say!("C0 = {:.17e}", gs.c0);
    say!("C1 = {:.17e}", gs.c1);
    say!("C_opt = {:.17e}", gs.copt);
    say!("residual_pde = {:.3e}", gs.residual_pde);
    say!("residual_pohozaev = {:.3e}", gs.residual_pohozaev);
    say!("iterations = {}", gs.iterations);
    say!("wrote {}", path.display());
    Ok(0)
}

/// The stored ground state when it was computed for the configured problem
/// and grid, otherwise a fresh solve that is stored.
fn ground_state(ctx: &Ctx) -> Result<ScalarGroundState> {
    let path = ctx.out.join(SCALAR_FILE);
    let grid = ctx.cfg.grid()?;
    if path.exists() {
        let gs = io::load_scalar(&path)?;
        if gs.params == ctx.cfg.problem && gs.grid().matches(&grid) {
            return Ok(gs);
        }
    }
    let gs = solve_w0(ctx.cfg.problem, grid, ctx.cfg.solver)?;
    io::save_scalar(&ctx.out, &gs, ctx.cfg.output.format)?;
    Ok(gs)
}

#[derive(Serialize)]
struct ConstantsRow {
    a: f64,
    mu: f64,
    lambda: f64,
    kinetic: f64,
    nonlinear: f64,
    energy: f64,
    mass_grid: f64,
    kinetic_grid: f64,
    nonlinear_grid: f64,
    energy_grid: f64,
}

#[derive(Serialize)]
struct ConstantsReport {
    c0: f64,
    c1: f64,
    copt: f64,
    unit_lambda_coupling: Vec<(f64, f64)>,
    table: Vec<ConstantsRow>,
}

fn constants(ctx: &Ctx) -> Result<i32> {
    let gs = ground_state(ctx)?;
    let e = gs.exponents();
    let p = e.p;
    let mut table = Vec::new();
    let mut csv = String::from("a,mu,lambda,kinetic,nonlinear,energy,mass_grid,kinetic_grid,nonlinear_grid,energy_grid\n");
    for &a in &ctx.cfg.constants.a {
        for &mu in &ctx.cfg.constants.mu {
            let w = scaled_solution(a, mu, &gs)?;
            let k = hs_seminorm_sq(&w.w, e.s);
            let b = lp_integral(&w.w, 2.0 * p)?;
            let row = ConstantsRow {
                a,
                mu,
                lambda: w.lambda,
                kinetic: w.closed_forms.kinetic,
                nonlinear: w.closed_forms.nonlinear,
                energy: w.closed_forms.energy,
                mass_grid: mass(&w.w),
                kinetic_grid: k,
                nonlinear_grid: b,
                energy_grid: 0.5 * k - mu / (2.0 * p) * b,
            };
            csv.push_str(&format!(
                "{},{},{},{},{},{},{},{},{},{}\n",
                row.a,
                row.mu,
                row.lambda,
                row.kinetic,
                row.nonlinear,
                row.energy,
                row.mass_grid,
                row.kinetic_grid,
                row.nonlinear_grid,
                row.energy_grid
            ));
            table.push(row);
        }
    }
    let report = ConstantsReport {
        c0: gs.c0,
        c1: gs.c1,
        copt: gs.copt,
        unit_lambda_coupling: ctx.cfg.constants.a.iter().map(|&a| (a, unit_lambda_coupling(&e, gs.c0, a))).collect(),
        table,
    };
    write_json(&ctx.out.join("constants.json"), &report)?;
    write_atomic(&ctx.out.join("constants.csv"), csv.as_bytes())?;
    say!("C0 = {:.17e}, C1 = {:.17e}, C_opt = {:.17e}", gs.c0, gs.c1, gs.copt);
    say!("{} rows in {}", report.table.len(), ctx.out.join("constants.csv").display());
    Ok(0)
}

fn thresholds(ctx: &Ctx) -> Result<i32> {
    let sys = ctx.cfg.system_params()?;
    let report = classify(&sys);
    write_json(&ctx.out.join(THRESHOLDS_FILE), &report)?;
    let sw = &ctx.cfg.sweep;
    let csv = regime_sweep_csv(&sys, sw.beta_min, sw.beta_max, sw.samples);
    write_atomic(&ctx.out.join("regime_sweep.csv"), csv.as_bytes())?;
    print_report(&report);
    Ok(0)
}

fn print_report(r: &ThresholdReport) {
    say!("beta1 = {:.17e} (residual {:.3e})", r.beta1, r.residual1);
    match (r.beta2, r.residual2) {
        (Some(b2), Some(r2)) => say!("beta2 = {b2:.17e} (residual {r2:.3e})"),
        _ => say!("beta2: no positive root"),
    }
    say!("beta = {} is in regime {}", r.beta, r.regime);
}

/// Continuation below `beta1`, Rayleigh minimization above `beta2`; outside
/// both only with `force`, by the side of `beta1` the coupling lies on.
fn solve_regime(sys: &SystemParams, cfg: &RunConfig, force: bool) -> Result<CoupledSolution> {
    let report = classify(sys);
    let grid = cfg.system_grid()?;
    match report.regime {
        Regime::BelowBeta1 => solve_continuation(sys, grid, cfg.continuation),
        Regime::AboveBeta2 => solve_min_rayleigh(sys, grid, cfg.rayleigh),
        _ if force && sys.beta < report.beta1 => solve_continuation(sys, grid, cfg.continuation),
        _ if force => solve_min_rayleigh(sys, grid, cfg.rayleigh),
        r => Err(Error::Precondition(format!(
            "no solver covers beta = {} in regime {r} (beta1 = {}, beta2 = {:?}); pass --force to try anyway",
            sys.beta, report.beta1, report.beta2
        ))),
    }
}

fn solve_system(ctx: &Ctx) -> Result<i32> {
    let sys = ctx.cfg.system_params()?;
    let sol = solve_regime(&sys, &ctx.cfg, ctx.force)?;
    let path = io::save_coupled(&ctx.out, &sol, ctx.cfg.output.format)?;
    say!("regime {}", sol.regime);
    say!("lambda1 = {:.17e}", sol.lambda1);
    say!("lambda2 = {:.17e}", sol.lambda2);
    say!("energy = {:.17e}", sol.energy);
    say!("g_defect = {:.3e}, el_residual = {:.3e}", sol.g_defect, sol.el_residual);
    match ground_state(ctx) {
        Ok(gs) => {
            let levels = [scalar_level(&gs, sys.a1, sys.mu1), scalar_level(&gs, sys.a2, sys.mu2)];
            say!("scalar levels = ({:.17e}, {:.17e})", levels[0], levels[1]);
            if sol.regime == Regime::AboveBeta2 {
                say!("seed fiber maximum = {:.17e}", seed_fiber_maximum(&sys, gs.c0, gs.c1));
            }
        }
        Err(e) => eprintln!("warning: scalar levels unavailable ({}: {e})", e.variant()),
    }
    say!("wrote {}", path.display());
    Ok(0)
}

#[derive(Serialize)]
struct PathsSummary {
    epsilon: f64,
    path_box: PathBox,
    scalar_levels: [f64; 2],
    max: f64,
    boundary_max: f64,
    phi_tilde_at_zero: [f64; 2],
    sign_pattern_holds: bool,
}

fn paths(ctx: &Ctx) -> Result<i32> {
    let sys = ctx.cfg.system_params()?;
    let gs = ground_state(ctx)?;
    let eps = match ctx.cfg.paths.epsilon {
        Some(e) => e,
        None => default_epsilon(&sys, &gs)?,
    };
    let pb = path_box(&sys, &gs, eps)?;
    let diag = path_energy_surface(&sys, &gs, pb, ctx.cfg.paths.resolution)?;
    let summary = PathsSummary {
        epsilon: eps,
        path_box: pb,
        scalar_levels: diag.scalar_levels,
        max: diag.max(),
        boundary_max: diag.boundary_max(),
        phi_tilde_at_zero: diag.phi_tilde_at_zero,
        sign_pattern_holds: diag.sign_pattern_holds(1e-12),
    };
    write_atomic(&ctx.out.join("paths_surface.csv"), diag.surface_csv().as_bytes())?;
    write_atomic(&ctx.out.join("paths_curves.csv"), diag.curves_csv().as_bytes())?;
    write_json(&ctx.out.join("paths.json"), &summary)?;
    say!("box rho = {:?}, R = {:?}, epsilon = {eps:.6e}", pb.rho, pb.big_r);
    say!("max E = {:.17e}, boundary max = {:.17e}", summary.max, summary.boundary_max);
    say!("scalar levels = {:?}", summary.scalar_levels);
    say!("sign pattern holds: {}", summary.sign_pattern_holds);
    Ok(0)
}

fn verify(ctx: &Ctx) -> Result<i32> {
    let scalar_path = ctx.out.join(SCALAR_FILE);
    let coupled_path = ctx.out.join(COUPLED_FILE);
    if !scalar_path.exists() && !coupled_path.exists() {
        return Err(Error::Io(std::io::Error::new(
            std::io::ErrorKind::NotFound,
            format!("no {SCALAR_FILE} or {COUPLED_FILE} in {}", ctx.out.display()),
        )));
    }
    let gs = if scalar_path.exists() { Some(io::load_scalar(&scalar_path)?) } else { None };
    let mut all: Vec<Check> = Vec::new();
    if let Some(gs) = &gs {
        all.extend(checks::scalar_checks(gs, &ctx.cfg.solver)?);
    }
    if coupled_path.exists() {
        let sol = io::load_coupled(&coupled_path)?;
        all.extend(checks::coupled_checks(&sol, gs.as_ref())?);
    }
    if let Ok(report) = read_thresholds(&ctx.out) {
        all.push(Check::at_most("beta1_residual", report.residual1.abs(), 1e-10));
        if let Some(r2) = report.residual2 {
            all.push(Check::at_most("beta2_residual", r2.abs(), 1e-10));
        }
    }
    write_atomic(&ctx.out.join("verify.csv"), checks::to_csv(&all).as_bytes())?;
    for c in &all {
        let limit = c.limit.map(|l| format!("{l:.1e}")).unwrap_or_else(|| "-".into());
        say!("{} {:<34} {:>12.4e}  limit {limit}", if c.pass { "PASS" } else { "FAIL" }, c.name, c.value);
    }
    let failed = all.iter().filter(|c| !c.pass).count();
    say!("{} checks, {failed} failed", all.len());
    Ok(if failed == 0 { 0 } else { 2 })
}

fn read_thresholds(dir: &Path) -> Result<ThresholdReport> {
    io::read_json(&dir.join(THRESHOLDS_FILE))
}

/// One row of the sweep.
#[derive(Clone, Debug, Serialize)]
struct SweepPoint {
    index: usize,
    beta: f64,
    regime: Regime,
    status: String,
    energy: Option<f64>,
    lambda1: Option<f64>,
    lambda2: Option<f64>,
    g_defect: Option<f64>,
    el_residual: Option<f64>,
}

fn sweep(ctx: &Ctx) -> Result<i32> {
    let sys = ctx.cfg.system_params()?;
    let sw = &ctx.cfg.sweep;
    let dir = ctx.out.join("sweep");
    let n = sw.samples;
    let points: Vec<Result<SweepPoint>> = (0..n)
        .into_par_iter()
        .map(|i| {
            let beta = sw.beta_min + (sw.beta_max - sw.beta_min) * i as f64 / (n - 1) as f64;
            let s = sys.with_beta(beta);
            let regime = classify(&s).regime;
            let mut pt = SweepPoint {
                index: i,
                beta,
                regime,
                status: "classified".into(),
                energy: None,
                lambda1: None,
                lambda2: None,
                g_defect: None,
                el_residual: None,
            };
            if sw.solve {
                match solve_regime(&s, &ctx.cfg, ctx.force) {
                    Ok(sol) => {
                        pt.status = "ok".into();
                        pt.energy = Some(sol.energy);
                        pt.lambda1 = Some(sol.lambda1);
                        pt.lambda2 = Some(sol.lambda2);
                        pt.g_defect = Some(sol.g_defect);
                        pt.el_residual = Some(sol.el_residual);
                    }
                    Err(e) => pt.status = e.variant().to_string(),
                }
            }
            write_json(&dir.join(format!("point_{i:04}.json")), &pt)?;
            Ok(pt)
        })
        .collect();
    let opt = |x: Option<f64>| x.map(|v| v.to_string()).unwrap_or_default();
    let mut csv = String::from("beta,regime,status,energy,lambda1,lambda2,g_defect,el_residual\n");
    let mut failures = 0;
    for pt in points {
        let pt = pt?;
        if sw.solve && pt.status != "ok" {
            failures += 1;
        }
        csv.push_str(&format!(
            "{},{},{},{},{},{},{},{}\n",
            pt.beta,
            pt.regime,
            pt.status,
            opt(pt.energy),
            opt(pt.lambda1),
            opt(pt.lambda2),
            opt(pt.g_defect),
            opt(pt.el_residual)
        ));
    }
    write_atomic(&ctx.out.join("sweep.csv"), csv.as_bytes())?;
    say!("{n} points in {}", ctx.out.join("sweep.csv").display());
    if failures > 0 {
        say!("{failures} points without a solution");
    }
    Ok(0)
}
