//! Saving and reloading solutions, then rechecking their invariants from
//! the files alone.

use fracnls::checks::{all_pass, scalar_checks};
use fracnls::io::{load_scalar, save_scalar, FieldFormat};
use fracnls::scalar::{solve_w0, SolverOpts};
use fracnls::{Grid, ProblemParams};

fn main() -> fracnls::Result<()> {
    let dir = std::env::temp_dir().join(format!("fracnls-artifacts-{}", std::process::id()));
    let params = ProblemParams::new(1, 0.45, 2.5)?;
    let gs = solve_w0(params, Grid::new(1, 1024, 40.0)?, SolverOpts::default())?;

    for format in [FieldFormat::Csv, FieldFormat::Bin] {
        let path = save_scalar(&dir, &gs, format)?;
        let back = load_scalar(&path)?;
        let identical = back.w0.values().iter().zip(gs.w0.values()).all(|(a, b)| a.to_bits() == b.to_bits());
        println!("{format:?}: {} bit-identical samples: {identical}", back.w0.len());
        let checks = scalar_checks(&back, &SolverOpts::default())?;
        for c in &checks {
            println!("  {:<22} {:>12.4e} {}", c.name, c.value, if c.pass { "ok" } else { "FAIL" });
        }
        println!("  all pass: {}", all_pass(&checks));
    }
    std::fs::remove_dir_all(&dir)?;
    Ok(())
}
