//! Problem and system parameters together with the exponents every closed
//! form is written in.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Dimension `n`, fractional order `s` and nonlinearity power `p`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemParams {
    pub n: usize,
    pub s: f64,
    pub p: f64,
}

impl ProblemParams {
    /// Parameters inside the existence window `0 < s < 1`, `2s < N <= 4s`,
    /// `1 + 2s/N < p < N/(N-2s)`.
    pub fn new(n: usize, s: f64, p: f64) -> Result<Self> {
        let params = Self { n, s, p };
        params.validate()?;
        Ok(params)
    }

    /// Parameters outside the existence window, for cross-checks such as the
    /// classical `s = 1` soliton. Only `N in {1,2,3}`, `0 < s <= 1`, `p > 1`
    /// are enforced; the closed-form exponents are meaningless here.
    pub fn unrestricted(n: usize, s: f64, p: f64) -> Result<Self> {
        if !(1..=3).contains(&n) {
            return Err(Error::InvalidParams(format!("dimension N = {n} not in {{1,2,3}}")));
        }
        if !(s > 0.0 && s <= 1.0) {
            return Err(Error::InvalidOrder(s));
        }
        if !(p > 1.0 && p.is_finite()) {
            return Err(Error::InvalidParams(format!("p = {p} must exceed 1")));
        }
        Ok(Self { n, s, p })
    }

    pub fn validate(&self) -> Result<()> {
        let (n, s, p) = (self.n, self.s, self.p);
        if !(1..=3).contains(&n) {
            return Err(Error::InvalidParams(format!("dimension N = {n} not in {{1,2,3}}")));
        }
        if !(s > 0.0 && s < 1.0) {
            return Err(Error::InvalidParams(format!("fractional order s = {s} not in (0,1)")));
        }
        let nf = n as f64;
        if !(2.0 * s < nf && nf <= 4.0 * s) {
            return Err(Error::InvalidParams(format!(
                "dimension window 2s < N <= 4s violated: s = {s}, N = {n}"
            )));
        }
        let lo = 1.0 + 2.0 * s / nf;
        let hi = nf / (nf - 2.0 * s);
        if !(p > lo && p < hi) {
            return Err(Error::InvalidParams(format!(
                "p = {p} outside the window 1+2s/N < p < N/(N-2s) = ({lo}, {hi})"
            )));
        }
        Ok(())
    }

    /// True when the parameters satisfy the existence hypotheses.
    pub fn in_window(&self) -> bool {
        self.validate().is_ok()
    }

    pub fn exponents(&self) -> Exponents {
        Exponents::new(self)
    }
}

/// Derived exponents, computed once per [`ProblemParams`].
///
/// With `d = (p-1)N - 2s`: `sigma = 2s/d`, `tau = (4ps - 2(p-1)N)/d`,
/// `theta = (p-1)N/d`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Exponents {
    pub n: f64,
    pub s: f64,
    pub p: f64,
    /// `(p-1)N`
    pub pn: f64,
    /// `(p-1)N - 2s`
    pub d: f64,
    pub sigma: f64,
    pub tau: f64,
    pub theta: f64,
    /// Pohozaev ratio `(p-1)N / (2ps)`.
    pub pohozaev: f64,
    /// Stabilizing exponent `(2p-1)/(2p-2)` of the ground-state iteration.
    pub gamma: f64,
}

impl Exponents {
    pub fn new(params: &ProblemParams) -> Self {
        let n = params.n as f64;
        let (s, p) = (params.s, params.p);
        let pn = (p - 1.0) * n;
        let d = pn - 2.0 * s;
        Self {
            n,
            s,
            p,
            pn,
            d,
            sigma: 2.0 * s / d,
            tau: (4.0 * p * s - 2.0 * pn) / d,
            theta: pn / d,
            pohozaev: pn / (2.0 * p * s),
            gamma: (2.0 * p - 1.0) / (2.0 * p - 2.0),
        }
    }

    /// Prefactor of the Rayleigh quotient,
    /// `((p-1)N - 2s)/(2(p-1)N) * (2ps/((p-1)N))^sigma`.
    pub fn rayleigh_prefactor(&self) -> f64 {
        self.d / (2.0 * self.pn) * (1.0 / self.pohozaev).powf(self.sigma)
    }

    /// `((p-1)N - 2s)/(2(p-1)N)`: energy per unit kinetic term on a Pohozaev manifold.
    pub fn energy_kinetic_ratio(&self) -> f64 {
        self.d / (2.0 * self.pn)
    }

    /// `a^{-tau} mu^{-sigma}`, the building block of both threshold equations.
    pub fn level_weight(&self, a: f64, mu: f64) -> f64 {
        a.powf(-self.tau) * mu.powf(-self.sigma)
    }
}

/// Couplings and mass radii of the two-component system.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SystemParams {
    pub problem: ProblemParams,
    pub mu1: f64,
    pub mu2: f64,
    pub beta: f64,
    pub a1: f64,
    pub a2: f64,
}

impl SystemParams {
    pub fn new(problem: ProblemParams, mu1: f64, mu2: f64, beta: f64, a1: f64, a2: f64) -> Result<Self> {
        let sys = Self { problem, mu1, mu2, beta, a1, a2 };
        sys.validate()?;
        Ok(sys)
    }

    pub fn validate(&self) -> Result<()> {
        self.problem.validate()?;
        for (name, v) in [("mu1", self.mu1), ("mu2", self.mu2), ("a1", self.a1), ("a2", self.a2)] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::InvalidParams(format!("{name} = {v} must be positive")));
            }
        }
        if !(self.beta >= 0.0 && self.beta.is_finite()) {
            return Err(Error::InvalidParams(format!("beta = {} must be >= 0", self.beta)));
        }
        Ok(())
    }

    pub fn with_beta(&self, beta: f64) -> Self {
        Self { beta, ..*self }
    }

    /// Joint nonlinear weight `mu1 a1^{2p} + 2 beta a1^p a2^p + mu2 a2^{2p}`.
    pub fn mass_weighted_coupling(&self) -> f64 {
        let p = self.problem.p;
        self.mu1 * self.a1.powf(2.0 * p)
            + 2.0 * self.beta * self.a1.powf(p) * self.a2.powf(p)
            + self.mu2 * self.a2.powf(2.0 * p)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn window_is_enforced() {
        assert!(ProblemParams::new(1, 0.45, 2.5).is_ok());
        assert!(ProblemParams::new(1, 0.45, 1.8).is_err());
        assert!(ProblemParams::new(1, 0.45, 10.5).is_err());
        // 2s < N fails
        assert!(ProblemParams::new(1, 0.6, 2.0).is_err());
        // N <= 4s fails
        assert!(ProblemParams::new(2, 0.4, 2.0).is_err());
        assert!(ProblemParams::new(3, 0.8, 1.6).is_ok());
        assert!(ProblemParams::new(4, 0.9, 1.6).is_err());
    }

    #[test]
    fn window_message_names_the_bounds() {
        let err = ProblemParams::new(1, 0.45, 12.0).unwrap_err().to_string();
        assert!(err.contains("1+2s/N < p < N/(N-2s)"), "{err}");
    }

    #[test]
    fn exponents_match_definitions() {
        let e = ProblemParams::new(1, 0.45, 2.5).unwrap().exponents();
        assert!((e.d - 0.6).abs() < 1e-15);
        assert!((e.sigma - 1.5).abs() < 1e-14);
        assert!((e.tau - (4.0 * 2.5 * 0.45 - 3.0) / 0.6).abs() < 1e-14);
        assert!((e.theta - 2.5).abs() < 1e-14);
        assert!((e.theta - e.sigma - 1.0).abs() < 1e-14);
        assert!((e.gamma - 4.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn system_rejects_nonpositive() {
        let pp = ProblemParams::new(1, 0.45, 2.5).unwrap();
        assert!(SystemParams::new(pp, 1.0, 1.0, 0.0, 1.0, 1.0).is_ok());
        assert!(SystemParams::new(pp, 0.0, 1.0, 0.0, 1.0, 1.0).is_err());
        assert!(SystemParams::new(pp, 1.0, 1.0, -0.1, 1.0, 1.0).is_err());
        assert!(SystemParams::new(pp, 1.0, 1.0, 0.1, 1.0, -1.0).is_err());
    }
}
