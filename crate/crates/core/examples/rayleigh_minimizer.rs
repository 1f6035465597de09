//! Above `beta2`: the ground state minimizes the Rayleigh quotient. An
//! asymmetric system solved from a random positive seed, then compared with
//! the two scalar levels and the fiber maximum over the scaled seed pair.

use fracnls::checks::{coupled_checks, to_csv};
use fracnls::coupled::{seed_fiber_maximum, solve_min_rayleigh, RayleighOpts};
use fracnls::fiber::rayleigh;
use fracnls::scalar::{scalar_level, solve_w0, SolverOpts};
use fracnls::thresholds::classify;
use fracnls::{Grid, ProblemParams, SystemParams};

fn main() -> fracnls::Result<()> {
    let params = ProblemParams::new(1, 0.45, 2.5)?;
    let gs = solve_w0(params, Grid::new(1, 4096, 120.0)?, SolverOpts::default())?;
    let base = SystemParams::new(params, 1.0, 2.0, 0.0, 1.0, 1.2)?;
    let beta2 = classify(&base).beta2.expect("beta2 exists");
    let sys = base.with_beta(1.5 * beta2);

    let seed = std::env::args().nth(1).and_then(|a| a.parse().ok()).unwrap_or(0);
    let opts = RayleighOpts { seed, ..RayleighOpts::default() };
    let sol = solve_min_rayleigh(&sys, Grid::new(1, 65536, 3000.0)?, opts)?;

    let levels = [scalar_level(&gs, 1.0, 1.0), scalar_level(&gs, 1.2, 2.0)];
    println!("beta = {:.6} ({})", sys.beta, sol.regime);
    println!("lambda = ({:.10}, {:.10})", sol.lambda1, sol.lambda2);
    println!("E = {:.12}, R = {:.12}", sol.energy, rayleigh(&sol.u, &sol.v, &sys)?);
    println!("scalar levels {:.12} {:.12}", levels[0], levels[1]);
    println!("seed fiber maximum {:.12}", seed_fiber_maximum(&sys, gs.c0, gs.c1));
    for note in &sol.diagnostics.notes {
        println!("note: {note}");
    }
    print!("{}", to_csv(&coupled_checks(&sol, Some(&gs))?));
    Ok(())
}
