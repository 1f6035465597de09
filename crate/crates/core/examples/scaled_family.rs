//! The family `w_{a,mu}` built from `w0` by scaling, against grid quadrature.

use fracnls::scalar::{scaled_lambda, scaled_solution, solve_w0, unit_lambda_coupling, SolverOpts};
use fracnls::spectral::{hs_seminorm_sq, lp_integral, mass};
use fracnls::{Grid, ProblemParams};

fn main() -> fracnls::Result<()> {
    let params = ProblemParams::new(1, 0.45, 2.5)?;
    let gs = solve_w0(params, Grid::new(1, 4096, 120.0)?, SolverOpts::default())?;
    let e = params.exponents();

    println!("{:>5} {:>5} {:>12} {:>10} {:>10} {:>10}", "a", "mu", "lambda", "dK", "dB", "dmass");
    for a in [0.7, 1.0, 1.3] {
        for mu in [0.5, 1.0, 2.0] {
            let w = scaled_solution(a, mu, &gs)?;
            let k = hs_seminorm_sq(&w.w, params.s);
            let b = lp_integral(&w.w, 2.0 * params.p)?;
            let cf = w.closed_forms;
            println!(
                "{a:>5} {mu:>5} {:>12.8} {:>10.2e} {:>10.2e} {:>10.2e}",
                w.lambda,
                (k - cf.kinetic).abs() / cf.kinetic,
                (b - cf.nonlinear).abs() / cf.nonlinear,
                (mass(&w.w) - a * a).abs() / (a * a),
            );
        }
    }
    for a in [0.7, 1.0, 1.3] {
        let mu0 = unit_lambda_coupling(&e, gs.c0, a);
        println!("a = {a}: mu0 = {mu0:.10}, lambda = {:.15}", scaled_lambda(&e, gs.c0, a, mu0));
    }
    Ok(())
}
