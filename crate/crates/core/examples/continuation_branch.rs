//! Below `beta1`: the solution branch followed from the decoupled pair at
//! `beta = 0`, with the energy recorded along the way.

use fracnls::coupled::{solve_continuation, ContinuationOpts};
use fracnls::scalar::{scalar_level, solve_w0, SolverOpts};
use fracnls::thresholds::beta1;
use fracnls::{Grid, ProblemParams, SystemParams};

fn main() -> fracnls::Result<()> {
    let params = ProblemParams::new(1, 0.45, 2.5)?;
    let gs = solve_w0(params, Grid::new(1, 4096, 120.0)?, SolverOpts::default())?;
    let base = SystemParams::new(params, 1.0, 2.0, 0.0, 1.0, 1.2)?;
    let b1 = beta1(&base);
    let grid = Grid::new(1, 65536, 700.0)?;
    let top = scalar_level(&gs, 1.0, 1.0).max(scalar_level(&gs, 1.2, 2.0));

    println!("beta1 = {b1:.10}, larger scalar level = {top:.10}");
    println!("{:>10} {:>14} {:>12} {:>12} {:>10}", "beta", "E", "lambda1", "lambda2", "Newton");
    for frac in [0.0, 0.25, 0.5, 0.75, 0.95] {
        let sys = base.with_beta(frac * b1);
        let sol = solve_continuation(&sys, grid, ContinuationOpts::default())?;
        println!(
            "{:>10.6} {:>14.10} {:>12.8} {:>12.8} {:>10}",
            sys.beta, sol.energy, sol.lambda1, sol.lambda2, sol.diagnostics.iterations
        );
    }
    Ok(())
}
