#![allow(dead_code)]
pub mod bandlimited;

use fracnls::scalar::{solve_w0, ScalarGroundState, SolverOpts};
use fracnls::{Grid, ProblemParams, SystemParams};

pub fn params() -> ProblemParams {
    ProblemParams::new(1, 0.45, 2.5).unwrap()
}

pub fn ground_state(m: usize, l: f64) -> ScalarGroundState {
    solve_w0(params(), Grid::new(1, m, l).unwrap(), SolverOpts::default()).unwrap()
}

/// `mu = (1, 2)`, `a = (1, 1.2)` at the given coupling.
pub fn asymmetric(beta: f64) -> SystemParams {
    SystemParams::new(params(), 1.0, 2.0, beta, 1.0, 1.2).unwrap()
}

pub fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

/// Exponents recomputed from scratch: `(d, sigma, tau, (p-1)N)`.
pub fn exps(n: f64, s: f64, p: f64) -> (f64, f64, f64, f64) {
    let pn = (p - 1.0) * n;
    let d = pn - 2.0 * s;
    (d, 2.0 * s / d, (4.0 * p * s - 2.0 * pn) / d, pn)
}

/// Plain `O(M^2)` discrete Fourier transform of real 1-D samples.
pub fn naive_dft(u: &[f64]) -> Vec<(f64, f64)> {
    let m = u.len();
    let tau = 2.0 * std::f64::consts::PI / m as f64;
    (0..m)
        .map(|k| {
            let (mut re, mut im) = (0.0, 0.0);
            for (j, &x) in u.iter().enumerate() {
                let ang = tau * ((k * j) % m) as f64;
                re += x * ang.cos();
                im -= x * ang.sin();
            }
            (re, im)
        })
        .collect()
}

/// Signed wavenumber of DFT index `k` on a box of length `l`.
pub fn wavenumber(k: usize, m: usize, l: f64) -> f64 {
    let signed = if k < m / 2 { k as i64 } else { k as i64 - m as i64 };
    2.0 * std::f64::consts::PI * signed as f64 / l
}

/// `int |(-Delta)^{s/2} u|^2` of 1-D samples through [`naive_dft`].
pub fn kinetic_by_dft(u: &[f64], l: f64, s: f64) -> f64 {
    let m = u.len();
    let h = l / m as f64;
    naive_dft(u)
        .iter()
        .enumerate()
        .map(|(k, (re, im))| wavenumber(k, m, l).abs().powf(2.0 * s) * (re * re + im * im))
        .sum::<f64>()
        * h
        / m as f64
}
