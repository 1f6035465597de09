//! With `mu1 = mu2` and `a1 = a2` the pair `(w_{a,mu+beta}, w_{a,mu+beta})`
//! solves the system exactly. Both coupled solvers are run against it.
//!
//! Usage: `symmetric_oracle [L] [M]`, where the solver box is `L` in units of
//! the profile width. The defaults run in a few seconds; the residual left is
//! the box truncation of the algebraic tails. `7000 524288` reaches 1e-6.

use std::time::Instant;

use fracnls::coupled::{
    solve_continuation, solve_min_rayleigh, symmetric_oracle, symmetric_system, ContinuationOpts, CoupledSolution,
    RayleighOpts,
};
use fracnls::scalar::{scalar_level, scaled_lambda, solve_w0, SolverOpts};
use fracnls::spectral::resample_localized;
use fracnls::thresholds::classify;
use fracnls::{Grid, ProblemParams};

fn main() -> fracnls::Result<()> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let width_box: f64 = args.first().and_then(|a| a.parse().ok()).unwrap_or(700.0);
    let m: usize = args.get(1).and_then(|a| a.parse().ok()).unwrap_or(65536);

    let params = ProblemParams::new(1, 0.45, 2.5)?;
    let e = params.exponents();
    let gs = solve_w0(params, Grid::new(1, m, width_box)?, SolverOpts::default())?;
    let beta2 = classify(&symmetric_system(params, 1.0, 1.0, 0.0)?).beta2.expect("symmetric beta2");

    for beta in [0.1, 1.5 * beta2] {
        let sys = symmetric_system(params, 1.0, 1.0, beta)?;
        let lambda = scaled_lambda(&e, gs.c0, 1.0, 1.0 + beta);
        let grid = Grid::new(1, m, width_box * lambda.powf(-1.0 / (2.0 * e.s)))?;
        let t = Instant::now();
        let sol = if beta < beta2 {
            solve_continuation(&sys, grid, ContinuationOpts::default())?
        } else {
            solve_min_rayleigh(&sys, grid, RayleighOpts::default())?
        };
        report(beta, &sol, &symmetric_oracle(1.0, 1.0, beta, &gs)?, 2.0 * scalar_level(&gs, 1.0, 1.0 + beta));
        println!("  time {:?}", t.elapsed());
    }
    Ok(())
}

fn report(beta: f64, sol: &CoupledSolution, oracle: &CoupledSolution, level: f64) {
    let w = resample_localized(&oracle.u, sol.u.grid()).expect("same dimension");
    let dist = w.linf_distance(&sol.u.peak_centered()).unwrap().max(w.linf_distance(&sol.v.peak_centered()).unwrap());
    println!("beta = {beta:.6} ({})", sol.regime);
    println!("  sup |u - w|          {:.3e}", dist / w.max());
    println!("  energy vs 2 I        {:.3e}", (sol.energy - level).abs() / level.abs());
    println!("  lambda1, lambda2     {:.10}, {:.10} (oracle {:.10})", sol.lambda1, sol.lambda2, oracle.lambda1);
    println!("  EL residual          {:.3e}", sol.el_residual);
    println!("  Pohozaev defect      {:.3e}", sol.g_defect);
}
