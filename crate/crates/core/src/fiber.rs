//! Mass-preserving dilations `(l * u)(x) = e^{Nsl/2} u(e^{sl} x)`, energies
//! along the resulting fibers, the Pohozaev functionals of the scalar and
//! coupled problems, and the Rayleigh quotient.
//!
//! A dilation keeps the samples and rescales the box (`L -> e^{-sl} L`), so
//! every scaling law below holds to rounding on the grid.

use crate::error::{Error, Result};
use crate::grid::{same_grid, Field};
use crate::params::{Exponents, ProblemParams, SystemParams};
use crate::spectral::{hs_seminorm_sq, lp_integral};

/// Denominator floor below which a quotient is treated as degenerate.
pub const DENOM_FLOOR: f64 = 1e-300;

/// `l * u` on the box `e^{-sl} L`.
pub fn dilate(u: &Field, l: f64, s: f64) -> Field {
    if l == 0.0 {
        return u.clone();
    }
    let grid = u.grid();
    let amp = (grid.n as f64 * s * l / 2.0).exp();
    let target = grid.rescaled((-s * l).exp());
    u.scaled(amp).with_grid(target).expect("same N and M")
}

/// Dilation of a pair by the same fiber parameter.
pub fn dilate_pair(u: &Field, v: &Field, l: f64, s: f64) -> (Field, Field) {
    (dilate(u, l, s), dilate(v, l, s))
}

/// Integrals entering the energy, the Pohozaev functional and the Rayleigh quotient.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FunctionalTriple {
    /// Sum of the squared `H^s` seminorms of both components.
    pub kinetic: f64,
    /// `int |u|^{2p}`, `int |v|^{2p}`.
    pub nl_self: [f64; 2],
    /// `int |u|^p |v|^p`.
    pub nl_cross: f64,
}

impl FunctionalTriple {
    pub fn of_pair(u: &Field, v: &Field, params: &ProblemParams) -> Result<Self> {
        let grid = same_grid(u, v)?;
        let p = params.p;
        let dv = grid.cell_volume();
        let cross = dv
            * u.values()
                .iter()
                .zip(v.values())
                .map(|(a, b)| (a.abs() * b.abs()).powf(p))
                .sum::<f64>();
        Ok(Self {
            kinetic: hs_seminorm_sq(u, params.s) + hs_seminorm_sq(v, params.s),
            nl_self: [lp_integral(u, 2.0 * p)?, lp_integral(v, 2.0 * p)?],
            nl_cross: cross,
        })
    }

    /// `mu1 int|u|^{2p} + 2 beta int|u|^p|v|^p + mu2 int|v|^{2p}`.
    pub fn coupled_nonlinear(&self, sys: &SystemParams) -> f64 {
        sys.mu1 * self.nl_self[0] + 2.0 * sys.beta * self.nl_cross + sys.mu2 * self.nl_self[1]
    }

    pub fn energy(&self, sys: &SystemParams) -> f64 {
        0.5 * self.kinetic - self.coupled_nonlinear(sys) / (2.0 * sys.problem.p)
    }

    pub fn pohozaev(&self, sys: &SystemParams) -> f64 {
        self.kinetic - sys.problem.exponents().pohozaev * self.coupled_nonlinear(sys)
    }
}

/// Energy `(e^{2s^2 l}/2) K - (e^{(p-1)Nsl}/2p) B` along a fiber, where `K`
/// is the kinetic term and `B` the (coupling-weighted) `L^{2p}` term at `l = 0`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FiberCurve {
    pub kinetic: f64,
    pub nonlinear: f64,
    exps: Exponents,
}

impl FiberCurve {
    pub fn new(kinetic: f64, nonlinear: f64, params: &ProblemParams) -> Self {
        Self { kinetic, nonlinear, exps: params.exponents() }
    }

    /// Fiber of a scalar field under coupling `mu`.
    pub fn scalar(u: &Field, mu: f64, params: &ProblemParams) -> Result<Self> {
        Ok(Self::new(hs_seminorm_sq(u, params.s), mu * lp_integral(u, 2.0 * params.p)?, params))
    }

    /// Joint fiber of a pair under the system couplings.
    pub fn pair(u: &Field, v: &Field, sys: &SystemParams) -> Result<Self> {
        let t = FunctionalTriple::of_pair(u, v, &sys.problem)?;
        Ok(Self::new(t.kinetic, t.coupled_nonlinear(sys), &sys.problem))
    }

    fn rates(&self) -> (f64, f64) {
        let e = &self.exps;
        (2.0 * e.s * e.s, e.pn * e.s)
    }

    pub fn energy(&self, l: f64) -> f64 {
        let (a, b) = self.rates();
        0.5 * (a * l).exp() * self.kinetic - (b * l).exp() * self.nonlinear / (2.0 * self.exps.p)
    }

    pub fn derivative(&self, l: f64) -> f64 {
        let (a, b) = self.rates();
        0.5 * a * (a * l).exp() * self.kinetic - b * (b * l).exp() * self.nonlinear / (2.0 * self.exps.p)
    }

    pub fn second_derivative(&self, l: f64) -> f64 {
        let (a, b) = self.rates();
        0.5 * a * a * (a * l).exp() * self.kinetic
            - b * b * (b * l).exp() * self.nonlinear / (2.0 * self.exps.p)
    }

    /// The unique critical point, from
    /// `e^{s[(p-1)N-2s] l} = K / ((p-1)N/(2ps) B)`.
    pub fn argmax(&self) -> Result<f64> {
        if self.kinetic <= 0.0 {
            return Err(Error::ZeroField);
        }
        if self.nonlinear < DENOM_FLOOR {
            return Err(Error::DegeneratePair(self.nonlinear));
        }
        let e = &self.exps;
        Ok((self.kinetic / (e.pohozaev * self.nonlinear)).ln() / (e.s * e.d))
    }

    /// CSV rows `l,f(l),f'(l)` for plotting.
    pub fn to_csv(&self, ls: &[f64]) -> String {
        let mut out = String::from("l,f,df\n");
        for &l in ls {
            out.push_str(&format!("{},{},{}\n", l, self.energy(l), self.derivative(l)));
        }
        out
    }
}

/// `f_u(l) = I_mu(l * u)` through the closed-form scaling laws.
pub fn fiber_energy_scalar(u: &Field, mu: f64, l: f64, params: &ProblemParams) -> Result<f64> {
    Ok(FiberCurve::scalar(u, mu, params)?.energy(l))
}

/// Maximizer `l0` of `f_u`.
pub fn optimal_fiber_param(u: &Field, mu: f64, params: &ProblemParams) -> Result<f64> {
    if u.is_zero() {
        return Err(Error::ZeroField);
    }
    FiberCurve::scalar(u, mu, params)?.argmax()
}

/// Signed defect `int |(-Delta)^{s/2} u|^2 - (p-1)N mu/(2ps) int |u|^{2p}`;
/// zero exactly on the scalar Pohozaev manifold.
pub fn pohozaev_scalar(u: &Field, mu: f64, params: &ProblemParams) -> Result<f64> {
    let e = params.exponents();
    Ok(hs_seminorm_sq(u, params.s) - e.pohozaev * mu * lp_integral(u, 2.0 * params.p)?)
}

/// The coupled Pohozaev functional `G(u, v)`.
pub fn system_g(u: &Field, v: &Field, sys: &SystemParams) -> Result<f64> {
    Ok(FunctionalTriple::of_pair(u, v, &sys.problem)?.pohozaev(sys))
}

/// Dilates `(u, v)` onto the coupled Pohozaev manifold. Returns the fiber
/// parameter used together with the dilated pair.
pub fn project_to_f(u: &Field, v: &Field, sys: &SystemParams) -> Result<(f64, Field, Field)> {
    let curve = FiberCurve::pair(u, v, sys)?;
    if curve.nonlinear < DENOM_FLOOR {
        return Err(Error::DegeneratePair(curve.nonlinear));
    }
    let l = curve.argmax()?;
    let (du, dv) = dilate_pair(u, v, l, sys.problem.s);
    Ok((l, du, dv))
}

/// Rayleigh quotient `R0 K^{(p-1)N/d} / B^{2s/d}` with `d = (p-1)N - 2s`.
pub fn rayleigh(u: &Field, v: &Field, sys: &SystemParams) -> Result<f64> {
    let t = FunctionalTriple::of_pair(u, v, &sys.problem)?;
    rayleigh_from(t.kinetic, t.coupled_nonlinear(sys), &sys.problem.exponents())
}

/// Scalar Rayleigh quotient under coupling `mu`.
pub fn rayleigh_scalar(u: &Field, mu: f64, params: &ProblemParams) -> Result<f64> {
    let k = hs_seminorm_sq(u, params.s);
    let b = mu * lp_integral(u, 2.0 * params.p)?;
    rayleigh_from(k, b, &params.exponents())
}

pub(crate) fn rayleigh_from(kinetic: f64, nonlinear: f64, e: &Exponents) -> Result<f64> {
    if nonlinear < DENOM_FLOOR {
        return Err(Error::DegeneratePair(nonlinear));
    }
    Ok(e.rayleigh_prefactor() * kinetic.powf(e.theta) / nonlinear.powf(e.sigma))
}
