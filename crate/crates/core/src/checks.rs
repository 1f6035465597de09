//! Invariant checks on stored or freshly computed solutions. Every quantity
//! is recomputed from the fields; stored diagnostics are not trusted.

use serde::{Deserialize, Serialize};

use crate::coupled::{extract_multipliers, seed_fiber_maximum, CoupledSolution, POSITIVITY_FLOOR};
use crate::error::Result;
use crate::fiber::{pohozaev_scalar, FunctionalTriple};
use crate::scalar::{pde_residual, scalar_level, ScalarGroundState, SolverOpts};
use crate::spectral::{mass, FracOperator};
use crate::thresholds::{classify, Regime};

/// Relative tolerance of the mass constraints.
pub const MASS_TOL: f64 = 1e-8;
/// Relative tolerance of the coupled Pohozaev defect.
pub const G_DEFECT_TOL: f64 = 1e-8;
pub const EL_RESIDUAL_TOL: f64 = 1e-6;
/// Relative tolerance of the identities `E = c K` and `E = R` on the Pohozaev manifold.
pub const IDENTITY_TOL: f64 = 1e-8;
/// Slack in the upper bound by the seed fiber maximum.
pub const SEED_BOUND_SLACK: f64 = 1e-6;

/// One named check: the measured value, its limit (if any) and the outcome.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub limit: Option<f64>,
    pub pass: bool,
}

impl Check {
    /// Passes when `value <= limit`.
    pub fn at_most(name: &str, value: f64, limit: f64) -> Self {
        Self { name: name.into(), value, limit: Some(limit), pass: value <= limit }
    }

    /// Passes when `value > limit`.
    pub fn above(name: &str, value: f64, limit: f64) -> Self {
        Self { name: name.into(), value, limit: Some(limit), pass: value > limit }
    }

    /// Passes when `value < limit`.
    pub fn below(name: &str, value: f64, limit: f64) -> Self {
        Self { name: name.into(), value, limit: Some(limit), pass: value < limit }
    }

    /// Reported only.
    pub fn info(name: &str, value: f64) -> Self {
        Self { name: name.into(), value, limit: None, pass: true }
    }
}

/// `check,value,limit,pass` rows.
pub fn to_csv(checks: &[Check]) -> String {
    let mut out = String::from("check,value,limit,pass\n");
    for c in checks {
        let limit = c.limit.map(|l| l.to_string()).unwrap_or_default();
        out.push_str(&format!("{},{},{},{}\n", c.name, c.value, limit, c.pass));
    }
    out
}

pub fn all_pass(checks: &[Check]) -> bool {
    checks.iter().all(|c| c.pass)
}

/// Positivity, peak location, and the PDE and Pohozaev residuals against the
/// configured tolerances. Without a configured Pohozaev tolerance the defect
/// is reported only.
pub fn scalar_checks(gs: &ScalarGroundState, opts: &SolverOpts) -> Result<Vec<Check>> {
    let w = &gs.w0;
    let p = gs.params.p;
    let op = FracOperator::new(w.grid(), gs.params.s)?;
    let peak = w.max();
    let mut out = vec![
        Check::above("w0_min_over_peak", w.min() / peak, -POSITIVITY_FLOOR),
        Check::at_most("w0_peak_offset_cells", gs.peak_offset, 0.0),
        Check::at_most("w0_residual_pde", pde_residual(&op, w.values(), 1.0, 1.0, p), opts.tol),
        Check::at_most("c0_consistency", (mass(w) - gs.c0).abs() / gs.c0, 1e-12),
    ];
    let e = gs.exponents();
    let poh = pohozaev_scalar(w, 1.0, &gs.params)?.abs() / (e.pohozaev * gs.c1);
    out.push(match opts.pohozaev_tol {
        Some(tol) => Check::at_most("w0_pohozaev_defect", poh, tol),
        None => Check::info("w0_pohozaev_defect", poh),
    });
    out.push(Check::info("w0_tail_ratio", gs.tail_ratio));
    Ok(out)
}

/// The solution invariants, the energy identities on the Pohozaev manifold
/// and, given the scalar ground state, the comparison with the scalar levels
/// that applies to the solution's regime.
pub fn coupled_checks(sol: &CoupledSolution, gs: Option<&ScalarGroundState>) -> Result<Vec<Check>> {
    let sys = &sol.sys;
    let (u, v) = (&sol.u, &sol.v);
    let t = FunctionalTriple::of_pair(u, v, &sys.problem)?;
    let e = sys.problem.exponents();
    let energy = t.energy(sys);
    let (l1, l2) = extract_multipliers(u, v, sys)?;
    let el = crate::coupled::el_residual(u, v, sys, l1, l2)?;
    let nl = t.coupled_nonlinear(sys);
    let rayleigh = crate::fiber::rayleigh_from(t.kinetic, nl, &e)?;
    let rel = |a: f64, b: f64| (a - b).abs() / b.abs().max(f64::MIN_POSITIVE);
    let regime = classify(sys).regime;
    let mut out = vec![
        Check::at_most("mass_u", rel(mass(u), sys.a1 * sys.a1), MASS_TOL),
        Check::at_most("mass_v", rel(mass(v), sys.a2 * sys.a2), MASS_TOL),
        Check::at_most("g_defect", t.pohozaev(sys).abs() / t.kinetic, G_DEFECT_TOL),
        Check::at_most("el_residual", el, EL_RESIDUAL_TOL),
        Check::above("lambda1", l1, 0.0),
        Check::above("lambda2", l2, 0.0),
        Check::above("u_min_over_peak", u.min() / u.max(), -POSITIVITY_FLOOR),
        Check::above("v_min_over_peak", v.min() / v.max(), -POSITIVITY_FLOOR),
        Check::at_most("energy_kinetic_identity", rel(energy, e.energy_kinetic_ratio() * t.kinetic), IDENTITY_TOL),
        Check::at_most("energy_rayleigh_identity", rel(energy, rayleigh), IDENTITY_TOL),
        Check::at_most("stored_energy", rel(sol.energy, energy), 1e-12),
        Check::at_most("regime_matches", if regime == sol.regime { 0.0 } else { 1.0 }, 0.0),
    ];
    if let Some(gs) = gs {
        let levels = [scalar_level(gs, sys.a1, sys.mu1), scalar_level(gs, sys.a2, sys.mu2)];
        match regime {
            Regime::AboveBeta2 => {
                out.push(Check::below("energy_below_scalar_levels", energy, levels[0].min(levels[1])));
                out.push(Check::at_most(
                    "energy_below_seed_fiber_maximum",
                    energy,
                    seed_fiber_maximum(sys, gs.c0, gs.c1) + SEED_BOUND_SLACK,
                ));
            }
            Regime::BelowBeta1 => {
                out.push(Check::above("energy_above_scalar_levels", energy, levels[0].max(levels[1])));
            }
            Regime::Between | Regime::Degenerate => {}
        }
    }
    Ok(out)
}
