//! The two-parameter dilation path `(t1 * w1, t2 * w2)` below `beta1`: the
//! energy surface over the box `Q`, the fiber curves and their sign pattern.
//! Writes `paths_surface.csv` and `paths_curves.csv` into the directory given
//! as the first argument (default: the system temp directory).

use std::path::PathBuf;

use fracnls::coupled::{default_epsilon, path_box, path_energy_surface};
use fracnls::scalar::{solve_w0, SolverOpts};
use fracnls::thresholds::beta1;
use fracnls::{Grid, ProblemParams, SystemParams};

fn main() -> fracnls::Result<()> {
    let dir = std::env::args().nth(1).map(PathBuf::from).unwrap_or_else(std::env::temp_dir);
    let params = ProblemParams::new(1, 0.45, 2.5)?;
    let gs = solve_w0(params, Grid::new(1, 2048, 60.0)?, SolverOpts::default())?;
    let base = SystemParams::new(params, 1.0, 2.0, 0.0, 1.0, 1.2)?;
    let sys = base.with_beta(0.5 * beta1(&base));

    let eps = default_epsilon(&sys, &gs)?;
    let q = path_box(&sys, &gs, eps)?;
    let diag = path_energy_surface(&sys, &gs, q, 41)?;
    println!("epsilon = {eps:.6}, rho = {:?}, R = {:?}", q.rho, q.big_r);
    println!("scalar levels   {:?}", diag.scalar_levels);
    println!("max on boundary {:.10}", diag.boundary_max());
    println!("max on Q        {:.10}", diag.max());
    println!("phi~(0)         {:?}", diag.phi_tilde_at_zero);
    println!("sign pattern    {}", diag.sign_pattern_holds(1e-12));

    std::fs::write(dir.join("paths_surface.csv"), diag.surface_csv())?;
    std::fs::write(dir.join("paths_curves.csv"), diag.curves_csv())?;
    println!("wrote {}", dir.display());
    Ok(())
}
