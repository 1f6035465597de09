//! Coupling thresholds `beta1` and `beta2` and regime classification.
//!
//! Both thresholds solve a scalar equation whose right side decreases
//! strictly in `beta`, so bisection on a doubling bracket suffices. The
//! constants `C0`, `C1` cancel from both equations.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::params::SystemParams;

/// Root-finder tolerance (absolute for roots below 1, relative above).
pub const ROOT_TOL: f64 = 1e-14;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Regime {
    BelowBeta1,
    Between,
    AboveBeta2,
    Degenerate,
}

impl std::fmt::Display for Regime {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let name = match self {
            Regime::BelowBeta1 => "BelowBeta1",
            Regime::Between => "Between",
            Regime::AboveBeta2 => "AboveBeta2",
            Regime::Degenerate => "Degenerate",
        };
        f.write_str(name)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ThresholdReport {
    pub beta: f64,
    pub beta1: f64,
    /// `None` when the defining equation has no positive root.
    pub beta2: Option<f64>,
    pub residual1: f64,
    pub residual2: Option<f64>,
    pub regime: Regime,
    /// True when `beta` lies below `beta1` and above `beta2` at once.
    pub overlap: bool,
}

/// Bisection for a strictly decreasing `f` with `f(0) > 0`.
///
/// The bracket starts at `[0, 1]` and doubles until `f(hi) < 0`.
pub fn bisect_decreasing(f: impl Fn(f64) -> f64, tol: f64) -> Result<f64> {
    let mut lo = 0.0;
    let mut hi = 1.0;
    let mut doublings = 0;
    while f(hi) >= 0.0 {
        lo = hi;
        hi *= 2.0;
        doublings += 1;
        if doublings > 1100 || !hi.is_finite() {
            return Err(Error::NoPositiveRoot("no sign change found while doubling".into()));
        }
    }
    loop {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi || hi - lo <= tol * hi.max(1.0) {
            return Ok(mid);
        }
        if f(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
}

fn level_weights(sys: &SystemParams) -> (f64, f64) {
    let e = sys.problem.exponents();
    (e.level_weight(sys.a1, sys.mu1), e.level_weight(sys.a2, sys.mu2))
}

/// Right side of the `beta1` equation,
/// `a1^{-tau}(mu1+beta)^{-sigma} + a2^{-tau}(mu2+beta)^{-sigma}`.
pub fn beta1_rhs(sys: &SystemParams, beta: f64) -> f64 {
    let e = sys.problem.exponents();
    e.level_weight(sys.a1, sys.mu1 + beta) + e.level_weight(sys.a2, sys.mu2 + beta)
}

/// Left side of the `beta1` equation, the larger of the two level weights.
pub fn beta1_lhs(sys: &SystemParams) -> f64 {
    let (w1, w2) = level_weights(sys);
    w1.max(w2)
}

/// Right side of the `beta2` equation,
/// `(a1^2+a2^2)^{(p-1)N/d} / (mu1 a1^{2p} + 2 beta a1^p a2^p + mu2 a2^{2p})^{sigma}`.
pub fn beta2_rhs(sys: &SystemParams, beta: f64) -> f64 {
    let e = sys.problem.exponents();
    let s = sys.with_beta(beta);
    (sys.a1 * sys.a1 + sys.a2 * sys.a2).powf(e.theta) / s.mass_weighted_coupling().powf(e.sigma)
}

/// Left side of the `beta2` equation, the smaller of the two level weights.
pub fn beta2_lhs(sys: &SystemParams) -> f64 {
    let (w1, w2) = level_weights(sys);
    w1.min(w2)
}

/// Unique positive root of the `beta1` equation.
pub fn beta1(sys: &SystemParams) -> f64 {
    let lhs = beta1_lhs(sys);
    bisect_decreasing(|b| beta1_rhs(sys, b) - lhs, ROOT_TOL)
        .expect("beta1 right side exceeds the left side at 0 and decays to 0")
}

/// `|rhs - lhs| / lhs` of the `beta1` equation.
pub fn beta1_residual(sys: &SystemParams, beta: f64) -> f64 {
    let lhs = beta1_lhs(sys);
    (beta1_rhs(sys, beta) - lhs).abs() / lhs
}

/// Unique positive root of the `beta2` equation, when the right side at
/// `beta = 0` exceeds the left side.
pub fn beta2(sys: &SystemParams) -> Result<f64> {
    let lhs = beta2_lhs(sys);
    let at_zero = beta2_rhs(sys, 0.0);
    if at_zero <= lhs {
        return Err(Error::NoPositiveRoot(format!(
            "beta2 equation: right side at beta = 0 is {at_zero:.6e} <= left side {lhs:.6e}"
        )));
    }
    bisect_decreasing(|b| beta2_rhs(sys, b) - lhs, ROOT_TOL)
}

pub fn beta2_residual(sys: &SystemParams, beta: f64) -> f64 {
    let lhs = beta2_lhs(sys);
    (beta2_rhs(sys, beta) - lhs).abs() / lhs
}

/// Regime of `sys.beta`: below `beta1` first, then above `beta2`, otherwise between.
pub fn classify(sys: &SystemParams) -> ThresholdReport {
    let b1 = beta1(sys);
    let r1 = beta1_residual(sys, b1);
    let beta = sys.beta;
    match beta2(sys) {
        Ok(b2) => {
            let below = beta < b1;
            let above = beta > b2;
            let regime = if below {
                Regime::BelowBeta1
            } else if above {
                Regime::AboveBeta2
            } else {
                Regime::Between
            };
            ThresholdReport {
                beta,
                beta1: b1,
                beta2: Some(b2),
                residual1: r1,
                residual2: Some(beta2_residual(sys, b2)),
                regime,
                overlap: below && above,
            }
        }
        Err(_) => ThresholdReport {
            beta,
            beta1: b1,
            beta2: None,
            residual1: r1,
            residual2: None,
            regime: Regime::Degenerate,
            overlap: false,
        },
    }
}

/// CSV table `beta,beta1,beta2,regime` over `samples` equally spaced values
/// of `beta` in `[lo, hi]`.
pub fn regime_sweep_csv(sys: &SystemParams, lo: f64, hi: f64, samples: usize) -> String {
    let mut out = String::from("beta,beta1,beta2,regime\n");
    for i in 0..samples {
        let t = if samples > 1 { i as f64 / (samples - 1) as f64 } else { 0.0 };
        let rep = classify(&sys.with_beta(lo + t * (hi - lo)));
        let b2 = rep.beta2.map(|b| b.to_string()).unwrap_or_else(|| "nan".into());
        out.push_str(&format!("{},{},{},{}\n", rep.beta, rep.beta1, b2, rep.regime));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::ProblemParams;

    fn sys(mu1: f64, mu2: f64, a1: f64, a2: f64, beta: f64) -> SystemParams {
        SystemParams::new(ProblemParams::new(1, 0.45, 2.5).unwrap(), mu1, mu2, beta, a1, a2).unwrap()
    }

    #[test]
    fn residuals_are_tiny() {
        let s = sys(1.0, 2.0, 1.0, 1.5, 0.0);
        let b1 = beta1(&s);
        assert!(beta1_residual(&s, b1) < 1e-12);
        let b2 = beta2(&s).unwrap();
        assert!(beta2_residual(&s, b2) < 1e-12);
    }

    #[test]
    fn classification_examples() {
        let base = sys(1.0, 2.0, 1.0, 1.2, 0.0);
        let b1 = beta1(&base);
        let b2 = beta2(&base).unwrap();
        assert_eq!(classify(&base.with_beta(0.5 * b1)).regime, Regime::BelowBeta1);
        assert_eq!(classify(&base.with_beta(2.0 * b1.max(b2))).regime, Regime::AboveBeta2);
        if b1 < b2 {
            assert_eq!(classify(&base.with_beta(0.5 * (b1 + b2))).regime, Regime::Between);
        }
    }

    #[test]
    fn sweep_has_requested_rows() {
        let csv = regime_sweep_csv(&sys(1.0, 1.0, 1.0, 1.0, 0.0), 0.0, 2.0, 7);
        assert_eq!(csv.lines().count(), 8);
    }
}
