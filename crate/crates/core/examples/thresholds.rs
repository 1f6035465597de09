//! The coupling thresholds `beta1 <= beta2` and the regime map in `beta`.

use fracnls::thresholds::{classify, regime_sweep_csv};
use fracnls::{ProblemParams, SystemParams};

fn main() -> fracnls::Result<()> {
    let params = ProblemParams::new(1, 0.45, 2.5)?;
    let e = params.exponents();

    let sym = SystemParams::new(params, 1.0, 1.0, 0.0, 1.0, 1.0)?;
    let r = classify(&sym);
    println!("symmetric: beta1 = {:.15}, closed form {:.15}", r.beta1, 2f64.powf(1.0 / e.sigma) - 1.0);

    let sys = SystemParams::new(params, 1.0, 2.0, 0.0, 1.0, 1.2)?;
    let r = classify(&sys);
    println!("mu = (1, 2), a = (1, 1.2): beta1 = {:.12} (residual {:.1e})", r.beta1, r.residual1);
    if let (Some(b2), Some(r2)) = (r.beta2, r.residual2) {
        println!("                          beta2 = {b2:.12} (residual {r2:.1e})");
    }
    print!("{}", regime_sweep_csv(&sys, 0.0, 3.0, 7));
    Ok(())
}
