//! Normalized solutions `(lambda1, lambda2, u, v)` of the coupled system.
//!
//! Two solvers, one per existence regime:
//! [`solve_min_rayleigh`] minimizes the Rayleigh quotient over the product of
//! mass spheres (`beta > beta2`), and [`solve_continuation`] follows the
//! saddle-type solution from the decoupled pair at `beta = 0` with a
//! Newton-Krylov corrector (`beta < beta1`).

mod continuation;
mod oracle;
mod paths;
mod rayleigh_min;

pub(crate) use continuation::newton_polish;
pub use continuation::{solve_continuation, solve_continuation_from, ContinuationOpts};
pub use oracle::{seed_fiber_maximum, symmetric_oracle, symmetric_system};
pub use paths::{default_epsilon, path_box, path_energy_surface, PathBox, PathDiagnostics};
pub use rayleigh_min::{random_positive_seed, solve_min_rayleigh, solve_min_rayleigh_from, RayleighOpts};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fiber::FunctionalTriple;
use crate::grid::{same_grid, Field};
use crate::params::SystemParams;
use crate::spectral::{mass, FracOperator};
use crate::thresholds::Regime;

/// Values below this magnitude count as the positivity floor.
pub const POSITIVITY_FLOOR: f64 = 1e-14;

/// `|x|^{q-1} x`, finite at zero for every `q > 0`.
#[inline]
pub(crate) fn odd_pow(x: f64, q: f64) -> f64 {
    if x == 0.0 {
        0.0
    } else {
        x.signum() * x.abs().powf(q)
    }
}

/// `E(u, v)`.
pub fn energy(u: &Field, v: &Field, sys: &SystemParams) -> Result<f64> {
    Ok(FunctionalTriple::of_pair(u, v, &sys.problem)?.energy(sys))
}

/// Nonlinear parts of both equations:
/// `mu1 |u|^{2p-2} u + beta |v|^p |u|^{p-2} u` and its mirror.
pub(crate) fn nonlinear_terms(u: &[f64], v: &[f64], sys: &SystemParams) -> (Vec<f64>, Vec<f64>) {
    let p = sys.problem.p;
    let mut nu = Vec::with_capacity(u.len());
    let mut nv = Vec::with_capacity(v.len());
    for (&a, &b) in u.iter().zip(v) {
        let (aa, ab) = (a.abs(), b.abs());
        nu.push(sys.mu1 * odd_pow(a, 2.0 * p - 1.0) + sys.beta * ab.powf(p) * odd_pow(a, p - 1.0));
        nv.push(sys.mu2 * odd_pow(b, 2.0 * p - 1.0) + sys.beta * aa.powf(p) * odd_pow(b, p - 1.0));
    }
    (nu, nv)
}

/// Pointwise residuals of both Euler-Lagrange equations.
pub fn el_gradient(
    u: &Field,
    v: &Field,
    sys: &SystemParams,
    lambda1: f64,
    lambda2: f64,
) -> Result<(Field, Field)> {
    let grid = same_grid(u, v)?;
    let op = FracOperator::new(&grid, sys.problem.s)?;
    let (ru, rv) = el_residual_fields(&op, u.values(), v.values(), sys, lambda1, lambda2);
    Ok((Field::new(grid, ru)?, Field::new(grid, rv)?))
}

pub(crate) fn el_residual_fields(
    op: &FracOperator,
    u: &[f64],
    v: &[f64],
    sys: &SystemParams,
    lambda1: f64,
    lambda2: f64,
) -> (Vec<f64>, Vec<f64>) {
    let (lu, lv) = op.apply_pair(u, v, |k| k, |k| k);
    let (nu, nv) = nonlinear_terms(u, v, sys);
    let ru = (0..u.len()).map(|i| lu[i] + lambda1 * u[i] - nu[i]).collect();
    let rv = (0..v.len()).map(|i| lv[i] + lambda2 * v[i] - nv[i]).collect();
    (ru, rv)
}

/// Joint relative residual `||(r_u, r_v)|| / ||(u, v)||`.
pub fn el_residual(u: &Field, v: &Field, sys: &SystemParams, lambda1: f64, lambda2: f64) -> Result<f64> {
    let (ru, rv) = el_gradient(u, v, sys, lambda1, lambda2)?;
    let num: f64 = ru.values().iter().chain(rv.values()).map(|x| x * x).sum();
    let den: f64 = u.values().iter().chain(v.values()).map(|x| x * x).sum();
    if den == 0.0 {
        return Err(Error::ZeroField);
    }
    Ok((num / den).sqrt())
}

/// Multipliers from testing each equation against its own component:
/// `lambda1 |u|^2 = -(int |(-Delta)^{s/2} u|^2 - mu1 int|u|^{2p} - beta int |u|^p|v|^p)`.
pub fn extract_multipliers(u: &Field, v: &Field, sys: &SystemParams) -> Result<(f64, f64)> {
    let grid = same_grid(u, v)?;
    let m1 = mass(u);
    let m2 = mass(v);
    if m1 == 0.0 || m2 == 0.0 {
        return Err(Error::ZeroField);
    }
    let op = FracOperator::new(&grid, sys.problem.s)?;
    let t = FunctionalTriple::of_pair(u, v, &sys.problem)?;
    let k1 = op.seminorm_sq(u.values());
    let k2 = op.seminorm_sq(v.values());
    let l1 = -(k1 - sys.mu1 * t.nl_self[0] - sys.beta * t.nl_cross) / m1;
    let l2 = -(k2 - sys.mu2 * t.nl_self[1] - sys.beta * t.nl_cross) / m2;
    Ok((l1, l2))
}

/// A converged pair with multipliers and diagnostics.
#[derive(Clone, Debug)]
pub struct CoupledSolution {
    pub sys: SystemParams,
    pub u: Field,
    pub v: Field,
    pub lambda1: f64,
    pub lambda2: f64,
    pub energy: f64,
    /// `|G(u,v)|` relative to the joint kinetic term.
    pub g_defect: f64,
    pub el_residual: f64,
    pub regime: Regime,
    pub diagnostics: SolveDiagnostics,
}

/// Quantities reported alongside every solution.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct SolveDiagnostics {
    pub iterations: usize,
    /// Relative mass errors `|int u^2 - a1^2| / a1^2` and the same for `v`.
    pub mass_error: [f64; 2],
    pub min_values: [f64; 2],
    /// Joint kinetic term.
    pub kinetic: f64,
    /// Rayleigh quotient at the solution.
    pub rayleigh: f64,
    /// Fiber parameter used by the final projection, if any.
    pub projection_l: Option<f64>,
    /// Objective or residual per iteration.
    pub history: Vec<f64>,
    pub notes: Vec<String>,
}

impl CoupledSolution {
    /// Computes every diagnostic of `(u, v)`. Multipliers are extracted from
    /// the pair unless supplied.
    pub fn assemble(
        u: Field,
        v: Field,
        sys: SystemParams,
        lambdas: Option<(f64, f64)>,
        regime: Regime,
        mut diagnostics: SolveDiagnostics,
    ) -> Result<Self> {
        let (lambda1, lambda2) = match lambdas {
            Some(l) => l,
            None => extract_multipliers(&u, &v, &sys)?,
        };
        let t = FunctionalTriple::of_pair(&u, &v, &sys.problem)?;
        let energy = t.energy(&sys);
        let g_defect = if t.kinetic > 0.0 { t.pohozaev(&sys).abs() / t.kinetic } else { 0.0 };
        let el = el_residual(&u, &v, &sys, lambda1, lambda2)?;
        diagnostics.mass_error = [
            (mass(&u) - sys.a1 * sys.a1).abs() / (sys.a1 * sys.a1),
            (mass(&v) - sys.a2 * sys.a2).abs() / (sys.a2 * sys.a2),
        ];
        diagnostics.min_values = [u.min(), v.min()];
        diagnostics.kinetic = t.kinetic;
        diagnostics.rayleigh = crate::fiber::rayleigh_from(
            t.kinetic,
            t.coupled_nonlinear(&sys),
            &sys.problem.exponents(),
        )
        .unwrap_or(f64::NAN);
        Ok(Self { sys, u, v, lambda1, lambda2, energy, g_defect, el_residual: el, regime, diagnostics })
    }

    /// Both components nonnegative up to [`POSITIVITY_FLOOR`] times the peak.
    pub fn is_positive(&self) -> bool {
        self.u.min() > -POSITIVITY_FLOOR * self.u.max() && self.v.min() > -POSITIVITY_FLOOR * self.v.max()
    }

    pub(crate) fn require_positive_multipliers(self) -> Result<Self> {
        if self.lambda1 > 0.0 && self.lambda2 > 0.0 {
            Ok(self)
        } else {
            Err(Error::NegativeMultiplier { lambda1: self.lambda1, lambda2: self.lambda2 })
        }
    }
}
