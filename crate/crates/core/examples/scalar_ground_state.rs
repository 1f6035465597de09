//! Ground state `w0` of `(-Delta)^s w + w = w^{2p-1}` and its constants.
//!
//! Usage: `scalar_ground_state [M] [L]` (defaults 2048, 60).
//!
//! The Pohozaev defect decays only algebraically in the box size because
//! `w0` has `|x|^{-(N+2s)}` tails; compare `2048 60` with `131072 2000`.

use std::time::Instant;

use fracnls::scalar::{gns_ratio, solve_w0, SolverOpts};
use fracnls::{Grid, ProblemParams};

fn main() -> fracnls::Result<()> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let m = args.first().and_then(|a| a.parse().ok()).unwrap_or(2048);
    let l = args.get(1).and_then(|a| a.parse().ok()).unwrap_or(60.0);

    let params = ProblemParams::new(1, 0.45, 2.5)?;
    let t = Instant::now();
    let gs = solve_w0(params, Grid::new(1, m, l)?, SolverOpts::default())?;
    println!("solved in {:?} ({} iterations)", t.elapsed(), gs.iterations);
    println!("C0      = {:.12}", gs.c0);
    println!("C1      = {:.12}", gs.c1);
    println!("C_opt   = {:.12}", gs.copt);
    println!("w0(0)   = {:.12}", gs.w0.max());
    println!("PDE residual       {:.3e}", gs.residual_pde);
    println!("Pohozaev defect    {:.3e}", gs.residual_pohozaev);
    println!("boundary / peak    {:.3e}", gs.tail_ratio);
    println!("GNS ratio at w0    {:.12}", gns_ratio(&gs.w0, &params, gs.copt)?);
    Ok(())
}
