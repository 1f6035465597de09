//! Energy along the dilation fiber `l -> I_mu(l * u)` of a Gaussian: the
//! closed-form maximizer against a scan, and the scaling laws of `l * u`.

use fracnls::fiber::{dilate, optimal_fiber_param, FiberCurve};
use fracnls::scalar::scalar_energy;
use fracnls::spectral::{hs_seminorm_sq, mass};
use fracnls::{Field, Grid, ProblemParams};

fn main() -> fracnls::Result<()> {
    let params = ProblemParams::new(1, 0.45, 2.5)?;
    let (s, p, mu) = (params.s, params.p, 1.0);
    let u = Field::gaussian(Grid::new(1, 1024, 40.0)?, 1.2, 1.0);

    let l0 = optimal_fiber_param(&u, mu, &params)?;
    let curve = FiberCurve::scalar(&u, mu, &params)?;
    let scan = (0..=8000)
        .map(|k| -4.0 + 8.0 * k as f64 / 8000.0)
        .max_by(|a, b| curve.energy(*a).total_cmp(&curve.energy(*b)))
        .unwrap();
    println!("closed-form l0 = {l0:.6}, scan argmax = {scan:.6}");

    for l in [-1.0, -0.3, l0, 0.5, 1.5] {
        let d = dilate(&u, l, s);
        println!(
            "l = {l:>8.4}  mass {:.12}  K ratio {:.12} (e^(2s^2 l) = {:.12})  I = {:.10} / {:.10}",
            mass(&d),
            hs_seminorm_sq(&d, s) / hs_seminorm_sq(&u, s),
            (2.0 * s * s * l).exp(),
            scalar_energy(&d, mu, s, p)?,
            curve.energy(l),
        );
    }
    Ok(())
}
