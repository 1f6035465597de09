//! The fractional Laplacian as a Fourier multiplier on a periodic box.
//!
//! Applies `(-Delta)^s` to a Gaussian, checks Plancherel and the semigroup
//! law `(-Delta)^a (-Delta)^b = (-Delta)^{a+b}`, and solves a shifted problem.

use fracnls::spectral::{frac_laplacian, hs_seminorm_sq, inner, mass, spectral_mass, FracOperator};
use fracnls::{Field, Grid};

fn main() -> fracnls::Result<()> {
    let grid = Grid::new(1, 512, 40.0)?;
    let u = Field::gaussian(grid, 1.0, 1.5);
    let s = 0.45;

    println!("mass (physical)  {:.15}", mass(&u));
    println!("mass (spectral)  {:.15}", spectral_mass(&u));

    let lu = frac_laplacian(&u, s)?;
    println!("<u, (-D)^s u>    {:.15}", inner(&u, &lu)?);
    println!("|u|^2_(H^s/2)    {:.15}", hs_seminorm_sq(&u, s));

    let a = frac_laplacian(&frac_laplacian(&u, 0.2)?, 0.25)?;
    let b = frac_laplacian(&u, 0.45)?;
    println!("semigroup error  {:.3e}", a.linf_distance(&b)? / b.max_abs());

    // (1 + (-D)^s) w = u, then check the residual.
    let op = FracOperator::new(&grid, s)?;
    let w = op.solve_shifted(u.values(), 1.0);
    let back = op.apply_multiplier(&w, |k| 1.0 + k);
    let err = back.iter().zip(u.values()).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
    println!("shifted solve    {err:.3e}");
    Ok(())
}
