//! The Gagliardo-Nirenberg quotient stays below `C_opt` on random fields and
//! reaches it at `w0`.

use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

use fracnls::scalar::{gns_ratio, solve_w0, SolverOpts};
use fracnls::spectral::{forward, inverse_real};
use fracnls::{Field, Grid, ProblemParams};

fn main() -> fracnls::Result<()> {
    let params = ProblemParams::new(1, 0.45, 2.5)?;
    let grid = Grid::new(1, 2048, 60.0)?;
    let gs = solve_w0(params, grid, SolverOpts::default())?;
    let mut rng = StdRng::seed_from_u64(11);

    let mut worst: f64 = 0.0;
    for _ in 0..100 {
        // Random Fourier coefficients on the lowest 32 modes.
        let noise: Vec<f64> = (0..grid.m).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let mut spec = forward(&grid, &noise);
        for (j, c) in spec.iter_mut().enumerate() {
            if grid.offset(j).abs() > 32 {
                *c = 0.0.into();
            }
        }
        let u = Field::new(grid, inverse_real(&grid, spec))?;
        worst = worst.max(gns_ratio(&u, &params, gs.copt)?);
    }
    println!("largest ratio over 100 random fields  {worst:.6}");
    println!("ratio at w0                           {:.10}", gns_ratio(&gs.w0, &params, gs.copt)?);
    Ok(())
}
