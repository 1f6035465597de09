use crate::error::Result;
use crate::params::{ProblemParams, SystemParams};
use crate::scalar::{scaled_solution, ScalarGroundState};
use crate::thresholds::classify;

use super::{CoupledSolution, SolveDiagnostics};

/// `mu1 = mu2 = mu`, `a1 = a2 = a`.
pub fn symmetric_system(params: ProblemParams, a: f64, mu: f64, beta: f64) -> Result<SystemParams> {
    SystemParams::new(params, mu, mu, beta, a, a)
}

/// Exact symmetric solution `(w_{a,mu+beta}, w_{a,mu+beta})` with both
/// multipliers equal to `lambda_{a,mu+beta}`, built from `w0` by scaling.
pub fn symmetric_oracle(a: f64, mu: f64, beta: f64, gs: &ScalarGroundState) -> Result<CoupledSolution> {
    let sys = symmetric_system(gs.params, a, mu, beta)?;
    let w = scaled_solution(a, mu + beta, gs)?;
    let regime = classify(&sys).regime;
    let diagnostics = SolveDiagnostics { iterations: gs.iterations, ..Default::default() };
    CoupledSolution::assemble(w.w.clone(), w.w, sys, Some((w.lambda, w.lambda)), regime, diagnostics)
}

/// `sup_l E(l * (w_{a1,m1}, w_{a2,m2}))` with `m_i = (C0/a_i^2)^{p-1}`, the
/// pair of scaled profiles whose multipliers equal one:
/// `d/(4ps) C1 C0^{(2ps-(p-1)N)/d} (a1^2+a2^2)^{(p-1)N/d} / B^{2s/d}` with
/// `B = mu1 a1^{2p} + 2 beta a1^p a2^p + mu2 a2^{2p}` and `d = (p-1)N - 2s`.
pub fn seed_fiber_maximum(sys: &SystemParams, c0: f64, c1: f64) -> f64 {
    let e = sys.problem.exponents();
    let p = e.p;
    let (a1, a2) = (sys.a1, sys.a2);
    let b = sys.mu1 * a1.powf(2.0 * p) + 2.0 * sys.beta * (a1 * a2).powf(p) + sys.mu2 * a2.powf(2.0 * p);
    e.d / (4.0 * p * e.s)
        * c1
        * c0.powf((2.0 * p * e.s - e.pn) / e.d)
        * (a1 * a1 + a2 * a2).powf(e.pn / e.d)
        / b.powf(2.0 * e.s / e.d)
}
