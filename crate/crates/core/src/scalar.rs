//! The scalar ground state `w0` of `(-Delta)^s w + w = w^{2p-1}`, the
//! constants `C0`, `C1`, `C_opt`, and the two-parameter family
//! `(lambda_{a,mu}, w_{a,mu})` obtained from `w0` by scaling.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{Field, Grid};
use crate::linalg::{dot, norm};
use crate::params::{Exponents, ProblemParams};
use crate::spectral::{hs_seminorm_sq, lp_integral, mass, FracOperator};

/// Boundary-to-peak ratio above which a solution is considered truncated by
/// the box. Reported always; enforced through [`SolverOpts::max_tail_ratio`].
pub const DEFAULT_MAX_TAIL_RATIO: f64 = 1e-2;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverOpts {
    /// Relative PDE residual target.
    pub tol: f64,
    /// Successive-iterate sup-norm change target.
    pub step_tol: f64,
    pub max_iter: usize,
    /// `GridTooSmall` when the converged profile's tail ratio exceeds this.
    pub max_tail_ratio: Option<f64>,
    /// `GridTooSmall` when the Pohozaev defect exceeds this.
    pub pohozaev_tol: Option<f64>,
}

impl Default for SolverOpts {
    fn default() -> Self {
        Self {
            tol: 1e-8,
            step_tol: 1e-12,
            max_iter: 10_000,
            max_tail_ratio: Some(DEFAULT_MAX_TAIL_RATIO),
            pohozaev_tol: None,
        }
    }
}

/// Converged `w0` with its integrals and diagnostics.
#[derive(Clone, Debug)]
pub struct ScalarGroundState {
    pub params: ProblemParams,
    pub w0: Field,
    /// `int w0^2`
    pub c0: f64,
    /// `int w0^{2p}`
    pub c1: f64,
    pub copt: f64,
    /// `int |(-Delta)^{s/2} w0|^2`
    pub kinetic: f64,
    pub residual_pde: f64,
    /// `|K - (p-1)N/(2ps) C1| / ((p-1)N/(2ps) C1)`
    pub residual_pohozaev: f64,
    pub iterations: usize,
    pub tail_ratio: f64,
    /// Distance of the discrete maximum from the origin, in grid cells.
    pub peak_offset: f64,
}

impl ScalarGroundState {
    pub fn grid(&self) -> &Grid {
        self.w0.grid()
    }

    pub fn exponents(&self) -> Exponents {
        self.params.exponents()
    }
}

/// Outcome of the stabilized fixed-point iteration.
#[derive(Clone, Debug)]
pub(crate) struct FixedPoint {
    pub field: Field,
    pub iterations: usize,
    pub residual: f64,
}

/// Stabilized fixed point for `(-Delta)^s w + lambda w = mu w^{2p-1}`:
/// `u <- S^gamma (lambda + (-Delta)^s)^{-1}[mu u^{2p-1}]` with
/// `S = <u, (lambda + (-Delta)^s) u> / <u, mu u^{2p-1}>`.
pub(crate) fn stabilized_fixed_point(
    op: &FracOperator,
    lambda: f64,
    mu: f64,
    p: f64,
    seed: &Field,
    opts: &SolverOpts,
) -> Result<FixedPoint> {
    let grid = *op.grid();
    seed.grid().check_same(&grid)?;
    if seed.is_zero() {
        return Err(Error::ZeroField);
    }
    let gamma = (2.0 * p - 1.0) / (2.0 * p - 2.0);
    let q = 2.0 * p - 2.0;
    let mut u = seed.values().to_vec();
    let mut residual = f64::INFINITY;
    let window = 500;
    let mut best_dev = f64::INFINITY;
    let mut window_best = f64::INFINITY;
    for it in 1..=opts.max_iter {
        let nl: Vec<f64> = u.iter().map(|&x| mu * x.abs().powf(q) * x).collect();
        let lu = op.apply_multiplier(&u, |sym| lambda + sym);
        let denom = dot(&u, &nl);
        let factor = dot(&u, &lu) / denom;
        if !factor.is_finite() || factor <= 0.0 {
            return Err(Error::Stagnation { iterations: it, factor });
        }
        let scale = factor.powf(gamma);
        let next: Vec<f64> = op.solve_shifted(&nl, lambda).into_iter().map(|v| scale * v).collect();
        let step = next.iter().zip(&u).fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
        u = next;
        if u.iter().any(|v| !v.is_finite()) {
            return Err(Error::Stagnation { iterations: it, factor });
        }

        let dev = (factor - 1.0).abs();
        window_best = window_best.min(dev);
        if it % window == 0 {
            if window_best > 1e-10 && window_best >= 0.9 * best_dev {
                return Err(Error::Stagnation { iterations: it, factor });
            }
            best_dev = best_dev.min(window_best);
            window_best = f64::INFINITY;
        }

        if step < opts.step_tol {
            residual = pde_residual(op, &u, lambda, mu, p);
            if residual < opts.tol {
                return Ok(FixedPoint { field: Field::new(grid, u)?, iterations: it, residual });
            }
        }
    }
    if residual.is_infinite() {
        residual = pde_residual(op, &u, lambda, mu, p);
    }
    Err(Error::NoConvergence { iterations: opts.max_iter, residual })
}

/// `||(-Delta)^s w + lambda w - mu w^{2p-1}|| / ||w||` on the grid.
pub fn pde_residual(op: &FracOperator, w: &[f64], lambda: f64, mu: f64, p: f64) -> f64 {
    let lw = op.apply(w);
    let q = 2.0 * p - 2.0;
    let r: Vec<f64> = w
        .iter()
        .zip(&lw)
        .map(|(&x, &l)| l + lambda * x - mu * x.abs().powf(q) * x)
        .collect();
    norm(&r) / norm(w)
}

/// Ground state from the isotropic Gaussian seed `exp(-|x|^2)`.
pub fn solve_w0(params: ProblemParams, grid: Grid, opts: SolverOpts) -> Result<ScalarGroundState> {
    let edge = (-(grid.l / 2.0).powi(2)).exp();
    if edge >= 1e-8 {
        return Err(Error::GridTooSmall(format!(
            "seed Gaussian edge value {edge:.3e} >= 1e-8 of peak; enlarge L = {}",
            grid.l
        )));
    }
    solve_w0_from(params, grid, opts, &Field::gaussian(grid, 1.0, 1.0))
}

/// Ground state from a caller-supplied positive seed.
pub fn solve_w0_from(
    params: ProblemParams,
    grid: Grid,
    opts: SolverOpts,
    seed: &Field,
) -> Result<ScalarGroundState> {
    if params.n != grid.n {
        return Err(Error::InvalidParams(format!(
            "problem dimension {} differs from grid dimension {}",
            params.n, grid.n
        )));
    }
    let op = FracOperator::new(&grid, params.s)?;
    let fp = stabilized_fixed_point(&op, 1.0, 1.0, params.p, seed, &opts)?;
    let w0 = fp.field;
    if w0.min() < -1e-14 * w0.max() {
        return Err(Error::Stagnation { iterations: fp.iterations, factor: w0.min() });
    }
    let e = params.exponents();
    let c0 = mass(&w0);
    let c1 = lp_integral(&w0, 2.0 * params.p)?;
    let kinetic = op.seminorm_sq(w0.values());
    let residual_pohozaev = (kinetic - e.pohozaev * c1).abs() / (e.pohozaev * c1);
    let tail_ratio = w0.tail_ratio();
    if let Some(limit) = opts.max_tail_ratio {
        if tail_ratio > limit {
            return Err(Error::GridTooSmall(format!(
                "boundary value is {tail_ratio:.3e} of the peak (limit {limit:.1e}); enlarge L = {}",
                grid.l
            )));
        }
    }
    if let Some(limit) = opts.pohozaev_tol {
        if residual_pohozaev > limit {
            return Err(Error::GridTooSmall(format!(
                "Pohozaev defect {residual_pohozaev:.3e} exceeds {limit:.1e}; enlarge L or M"
            )));
        }
    }
    let peak = grid.coords(w0.argmax());
    let peak_offset = peak[..grid.n].iter().map(|x| x * x).sum::<f64>().sqrt() / grid.spacing();
    let copt = optimal_gns_constant(&e, c0, c1);
    Ok(ScalarGroundState {
        params,
        w0,
        c0,
        c1,
        copt,
        kinetic,
        residual_pde: fp.residual,
        residual_pohozaev,
        iterations: fp.iterations,
        tail_ratio,
        peak_offset,
    })
}

/// `C_opt = (2ps/((p-1)N))^{(p-1)N/2s} / (C0^{(2ps-(p-1)N)/2s} C1^{((p-1)N-2s)/2s})`.
pub fn optimal_gns_constant(e: &Exponents, c0: f64, c1: f64) -> f64 {
    let two_s = 2.0 * e.s;
    (1.0 / e.pohozaev).powf(e.pn / two_s)
        / (c0.powf((2.0 * e.p * e.s - e.pn) / two_s) * c1.powf(e.d / two_s))
}

/// `(C0, C1, C_opt)` of a converged ground state.
pub fn compute_constants(gs: &ScalarGroundState) -> (f64, f64, f64) {
    (gs.c0, gs.c1, gs.copt)
}

/// `int |u|^{2p} / (C_opt K^{(p-1)N/2s} m^{(2ps-(p-1)N)/2s})`; at most one by
/// the Gagliardo-Nirenberg-Sobolev inequality, with equality at `w0`.
pub fn gns_ratio(u: &Field, params: &ProblemParams, copt: f64) -> Result<f64> {
    let e = params.exponents();
    let k = hs_seminorm_sq(u, params.s);
    let m = mass(u);
    let l = lp_integral(u, 2.0 * params.p)?;
    if k == 0.0 || m == 0.0 {
        return Err(Error::ZeroField);
    }
    let two_s = 2.0 * e.s;
    Ok(l / (copt * k.powf(e.pn / two_s) * m.powf((2.0 * e.p * e.s - e.pn) / two_s)))
}

/// One odd power term `coeff * |u|^{power-1} u`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PowerTerm {
    pub coeff: f64,
    pub power: f64,
}

/// Nonlinearity `f(u) = sum_j c_j |u|^{q_j - 1} u` entering `(-Delta)^s u = f(u)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NonlinearityDescriptor {
    pub terms: Vec<PowerTerm>,
}

impl NonlinearityDescriptor {
    pub fn new(terms: Vec<PowerTerm>) -> Result<Self> {
        for t in &terms {
            if !(t.power >= 1.0 && t.power.is_finite() && t.coeff.is_finite()) {
                return Err(Error::UnsupportedNonlinearity(format!(
                    "term {} |u|^{{q-1}}u with q = {}",
                    t.coeff, t.power
                )));
            }
        }
        Ok(Self { terms })
    }

    /// `-lambda u + mu |u|^{2p-2} u`, the right side of the scalar equation.
    pub fn scalar(lambda: f64, mu: f64, p: f64) -> Self {
        Self {
            terms: vec![
                PowerTerm { coeff: -lambda, power: 1.0 },
                PowerTerm { coeff: mu, power: 2.0 * p - 1.0 },
            ],
        }
    }

    /// Parses `"c1 u^q1 + c2 u^q2 ..."`, where `u^q` stands for `|u|^{q-1} u`.
    /// Anything that is not a power term is rejected.
    pub fn parse(text: &str) -> Result<Self> {
        let mut cleaned = String::with_capacity(text.len() + 4);
        let mut prev = ' ';
        for c in text.chars().filter(|c| !c.is_whitespace()) {
            if c == '-' && !matches!(prev, 'e' | 'E' | '^') {
                cleaned.push('+');
            }
            cleaned.push(c);
            prev = c;
        }
        let mut terms = Vec::new();
        for chunk in cleaned.split('+').filter(|c| !c.is_empty()) {
            let bad = || Error::UnsupportedNonlinearity(chunk.to_string());
            let (coeff_txt, power_txt) = chunk.split_once('u').ok_or_else(bad)?;
            let coeff = match coeff_txt.trim_end_matches('*') {
                "" => 1.0,
                "-" => -1.0,
                c => c.parse::<f64>().map_err(|_| bad())?,
            };
            let power = match power_txt {
                "" => 1.0,
                p => p.strip_prefix('^').ok_or_else(bad)?.parse::<f64>().map_err(|_| bad())?,
            };
            terms.push(PowerTerm { coeff, power });
        }
        Self::new(terms)
    }

    pub fn eval(&self, u: f64) -> f64 {
        self.terms.iter().map(|t| t.coeff * u.abs().powf(t.power - 1.0) * u).sum()
    }

    /// `F(u) = int_0^u f`.
    pub fn primitive(&self, u: f64) -> f64 {
        self.terms.iter().map(|t| t.coeff * u.abs().powf(t.power + 1.0) / (t.power + 1.0)).sum()
    }
}

/// Relative defect of `(N - 2s) int w f(w) = 2N int F(w)`.
pub fn pohozaev_residual(w: &Field, f: &NonlinearityDescriptor, s: f64) -> f64 {
    let grid = w.grid();
    let dv = grid.cell_volume();
    let n = grid.n as f64;
    let lhs = (n - 2.0 * s) * dv * w.values().iter().map(|&x| x * f.eval(x)).sum::<f64>();
    let rhs = 2.0 * n * dv * w.values().iter().map(|&x| f.primitive(x)).sum::<f64>();
    let scale = lhs.abs().max(rhs.abs());
    if scale < 1e-300 {
        0.0
    } else {
        (lhs - rhs).abs() / scale
    }
}

/// Closed-form values of the kinetic term, the `L^{2p}` term and the energy
/// of `w_{a,mu}`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScaledClosedForms {
    pub kinetic: f64,
    pub nonlinear: f64,
    pub energy: f64,
}

#[derive(Clone, Debug)]
pub struct ScaledSolution {
    pub a: f64,
    pub mu: f64,
    pub lambda: f64,
    pub w: Field,
    pub closed_forms: ScaledClosedForms,
}

/// `lambda_{a,mu} = [(1/mu)(C0/a^2)^{p-1}]^{2s/((p-1)N-2s)}`.
pub fn scaled_lambda(e: &Exponents, c0: f64, a: f64, mu: f64) -> f64 {
    ((c0 / (a * a)).powf(e.p - 1.0) / mu).powf(e.sigma)
}

/// Amplitude `(C0^{2s}/(mu^N a^{4s}))^{1/(2(p-1)N-4s)}` of `w_{a,mu}`.
pub fn scaled_amplitude(e: &Exponents, c0: f64, a: f64, mu: f64) -> f64 {
    (c0.powf(2.0 * e.s) / (mu.powf(e.n) * a.powf(4.0 * e.s))).powf(1.0 / (2.0 * e.d))
}

/// The coupling `mu0 = (C0/a^2)^{p-1}` at which `lambda_{a,mu0} = 1`.
pub fn unit_lambda_coupling(e: &Exponents, c0: f64, a: f64) -> f64 {
    (c0 / (a * a)).powf(e.p - 1.0)
}

/// Closed-form kinetic, `L^{2p}` and energy values of `w_{a,mu}`.
pub fn scaled_closed_forms(e: &Exponents, c0: f64, c1: f64, a: f64, mu: f64) -> ScaledClosedForms {
    let base = c1 * c0.powf((2.0 * e.p * e.s - e.pn) / e.d);
    let weight = e.level_weight(a, mu);
    ScaledClosedForms {
        kinetic: e.pohozaev * base * weight,
        nonlinear: base / (mu.powf(e.theta) * a.powf(e.tau)),
        energy: e.d / (4.0 * e.p * e.s) * base * weight,
    }
}

/// Closed-form scalar level `I_mu(w_{a,mu})`.
pub fn scalar_level(gs: &ScalarGroundState, a: f64, mu: f64) -> f64 {
    scaled_closed_forms(&gs.exponents(), gs.c0, gs.c1, a, mu).energy
}

/// `w_{a,mu}(x) = A w0(lambda^{1/2s} x)`, realized by rescaling the box to
/// `L / lambda^{1/2s}` with the samples of `w0` multiplied by `A`.
pub fn scaled_solution(a: f64, mu: f64, gs: &ScalarGroundState) -> Result<ScaledSolution> {
    if !(a > 0.0 && mu > 0.0) {
        return Err(Error::InvalidParams(format!("a = {a}, mu = {mu} must be positive")));
    }
    if gs.tail_ratio > DEFAULT_MAX_TAIL_RATIO {
        return Err(Error::GridTooSmall(format!(
            "rescaled profile keeps boundary ratio {:.3e}",
            gs.tail_ratio
        )));
    }
    let e = gs.exponents();
    let lambda = scaled_lambda(&e, gs.c0, a, mu);
    let amp = scaled_amplitude(&e, gs.c0, a, mu);
    let grid = gs.grid().rescaled(lambda.powf(-1.0 / (2.0 * e.s)));
    let w = gs.w0.scaled(amp).with_grid(grid)?;
    Ok(ScaledSolution {
        a,
        mu,
        lambda,
        w,
        closed_forms: scaled_closed_forms(&e, gs.c0, gs.c1, a, mu),
    })
}

/// `I_mu(w) = (1/2) int |(-Delta)^{s/2} w|^2 - (mu/2p) int |w|^{2p}`.
pub fn scalar_energy(w: &Field, mu: f64, s: f64, p: f64) -> Result<f64> {
    let k = hs_seminorm_sq(w, s);
    if mu == 0.0 {
        return Ok(0.5 * k);
    }
    Ok(0.5 * k - mu / (2.0 * p) * lp_integral(w, 2.0 * p)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small() -> (ProblemParams, Grid) {
        (ProblemParams::new(1, 0.45, 2.5).unwrap(), Grid::new(1, 1024, 40.0).unwrap())
    }

    #[test]
    fn iteration_budget_of_one_fails() {
        let (pp, g) = small();
        let opts = SolverOpts { max_iter: 1, ..Default::default() };
        assert!(matches!(solve_w0(pp, g, opts), Err(Error::NoConvergence { .. })));
    }

    #[test]
    fn seed_must_fit_in_the_box() {
        let pp = ProblemParams::new(1, 0.45, 2.5).unwrap();
        let g = Grid::new(1, 64, 6.0).unwrap();
        assert!(matches!(solve_w0(pp, g, SolverOpts::default()), Err(Error::GridTooSmall(_))));
    }

    #[test]
    fn ground_state_is_positive_even_and_peaked_at_origin() {
        let (pp, g) = small();
        let gs = solve_w0(pp, g, SolverOpts::default()).unwrap();
        assert!(gs.residual_pde < 1e-8);
        assert!(gs.w0.min() > 0.0);
        assert_eq!(gs.w0.argmax(), 0);
        assert_eq!(gs.peak_offset, 0.0);
        let sym = gs.w0.symmetrized();
        assert!(sym.linf_distance(&gs.w0).unwrap() < 1e-12);
    }

    #[test]
    fn mismatched_dimension_rejected() {
        let pp = ProblemParams::new(2, 0.8, 2.5).unwrap();
        let g = Grid::new(1, 64, 20.0).unwrap();
        assert!(solve_w0(pp, g, SolverOpts::default()).is_err());
    }

    #[test]
    fn unit_lambda_at_mu0() {
        let e = ProblemParams::new(1, 0.45, 2.5).unwrap().exponents();
        for (c0, a) in [(0.9973, 0.7), (0.9973, 1.3), (2.0, 1.0)] {
            let mu0 = unit_lambda_coupling(&e, c0, a);
            assert!((scaled_lambda(&e, c0, a, mu0) - 1.0).abs() < 1e-12);
        }
        // a^2 = C0, mu = 1: identity scaling.
        let c0: f64 = 1.7;
        assert!((scaled_lambda(&e, c0, c0.sqrt(), 1.0) - 1.0).abs() < 1e-15);
        assert!((scaled_amplitude(&e, c0, c0.sqrt(), 1.0) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn nonlinearity_parsing() {
        let f = NonlinearityDescriptor::parse("-1 u^1 + 1 u^4").unwrap();
        assert_eq!(f, NonlinearityDescriptor::scalar(1.0, 1.0, 2.5));
        assert!(NonlinearityDescriptor::parse("-u + u^3").is_ok());
        assert!(matches!(
            NonlinearityDescriptor::parse("sin(u)"),
            Err(Error::UnsupportedNonlinearity(_))
        ));
        assert!(matches!(
            NonlinearityDescriptor::parse("u^0.5"),
            Err(Error::UnsupportedNonlinearity(_))
        ));
        assert!((f.primitive(2.0) - (-2.0 + 32.0 / 5.0)).abs() < 1e-14);
    }

    #[test]
    fn pohozaev_residual_of_zero_is_zero() {
        let g = Grid::new(1, 64, 20.0).unwrap();
        let f = NonlinearityDescriptor::scalar(1.0, 1.0, 2.5);
        assert_eq!(pohozaev_residual(&Field::zeros(g), &f, 0.45), 0.0);
    }

    #[test]
    fn energy_without_coupling_is_half_kinetic() {
        let g = Grid::new(1, 128, 20.0).unwrap();
        let u = Field::gaussian(g, 1.3, 1.1);
        let e = scalar_energy(&u, 0.0, 0.45, 2.5).unwrap();
        assert!((e - 0.5 * hs_seminorm_sq(&u, 0.45)).abs() < 1e-15);
        assert_eq!(scalar_energy(&Field::zeros(g), 1.0, 0.45, 2.5).unwrap(), 0.0);
    }
}
