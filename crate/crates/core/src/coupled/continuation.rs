use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fiber::project_to_f;
use crate::grid::{same_grid, Field, Grid};
use crate::linalg::{dot, gmres, norm, GmresOpts};
use crate::params::SystemParams;
use crate::scalar::{stabilized_fixed_point, SolverOpts};
use crate::spectral::{upsample, FracOperator};
use crate::thresholds::{beta1, classify, Regime};

use super::{el_residual_fields, odd_pow, CoupledSolution, SolveDiagnostics};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ContinuationOpts {
    /// Relative Euler-Lagrange residual target.
    pub newton_tol: f64,
    /// Relative mass error target.
    pub mass_tol: f64,
    pub max_newton: usize,
    /// First continuation step in `beta`; a quarter of the target when absent.
    pub initial_step: Option<f64>,
    /// Smallest admissible step as a fraction of `beta1`.
    pub step_floor: f64,
    pub gmres_restart: usize,
    pub gmres_max_iter: usize,
    /// Options of the scalar solves that seed the decoupled pair.
    pub scalar: SolverOpts,
    /// Run outside the `beta < beta1` regime.
    pub force: bool,
}

impl Default for ContinuationOpts {
    fn default() -> Self {
        Self {
            newton_tol: 1e-11,
            mass_tol: 1e-13,
            max_newton: 25,
            initial_step: None,
            step_floor: 1e-6,
            gmres_restart: 80,
            gmres_max_iter: 800,
            scalar: SolverOpts { max_tail_ratio: None, ..SolverOpts::default() },
            force: false,
        }
    }
}

/// Iterate `(u, v, lambda1, lambda2)`.
#[derive(Clone, Debug)]
struct Point {
    u: Vec<f64>,
    v: Vec<f64>,
    lam: [f64; 2],
}

impl Point {
    fn combine(&self, other: &Point, c: f64) -> Point {
        let mix = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| x + c * (x - y)).collect();
        Point {
            u: mix(&self.u, &other.u),
            v: mix(&self.v, &other.v),
            lam: [
                self.lam[0] + c * (self.lam[0] - other.lam[0]),
                self.lam[1] + c * (self.lam[1] - other.lam[1]),
            ],
        }
    }
}

struct Corrector<'a> {
    sys: SystemParams,
    op: &'a FracOperator,
    grid: Grid,
    opts: &'a ContinuationOpts,
}

#[derive(Clone, Copy, Debug)]
struct Merit {
    el: f64,
    mass: [f64; 2],
}

impl Merit {
    fn total(&self) -> f64 {
        self.el + self.mass[0] + self.mass[1]
    }
}

impl Corrector<'_> {
    fn targets(&self) -> [f64; 2] {
        [self.sys.a1 * self.sys.a1, self.sys.a2 * self.sys.a2]
    }

    fn merit(&self, x: &Point) -> (Merit, Vec<f64>, Vec<f64>) {
        let (ru, rv) = el_residual_fields(self.op, &x.u, &x.v, &self.sys, x.lam[0], x.lam[1]);
        let num = (dot(&ru, &ru) + dot(&rv, &rv)).sqrt();
        let den = (dot(&x.u, &x.u) + dot(&x.v, &x.v)).sqrt();
        let dv = self.grid.cell_volume();
        let t = self.targets();
        let m = [
            (dv * dot(&x.u, &x.u) - t[0]).abs() / t[0],
            (dv * dot(&x.v, &x.v) - t[1]).abs() / t[1],
        ];
        (Merit { el: num / den, mass: m }, ru, rv)
    }

    fn converged(&self, m: &Merit) -> bool {
        m.el < self.opts.newton_tol && m.mass[0] < self.opts.mass_tol && m.mass[1] < self.opts.mass_tol
    }

    /// Damped Newton with GMRES inner solves; mass rows and multiplier
    /// columns are scaled by the component norms.
    fn solve(&self, x: &mut Point, history: &mut Vec<f64>) -> Result<usize> {
        let n = x.u.len();
        let p = self.sys.problem.p;
        let beta = self.sys.beta;
        let dv = self.grid.cell_volume();
        let t = self.targets();
        let (mut merit, mut ru, mut rv) = self.merit(x);
        for k in 0..self.opts.max_newton {
            history.push(merit.el);
            if self.converged(&merit) {
                return Ok(k);
            }
            if x.lam[0] <= 0.0 || x.lam[1] <= 0.0 {
                return Err(Error::NegativeMultiplier { lambda1: x.lam[0], lambda2: x.lam[1] });
            }
            let nu = norm(&x.u);
            let nv = norm(&x.v);
            let mut au = Vec::with_capacity(n);
            let mut av = Vec::with_capacity(n);
            let mut cross = Vec::with_capacity(n);
            for (&a, &b) in x.u.iter().zip(&x.v) {
                let (ma, mb) = (a.abs(), b.abs());
                let pu = if ma > 0.0 { beta * (p - 1.0) * mb.powf(p) * ma.powf(p - 2.0) } else { 0.0 };
                let pv = if mb > 0.0 { beta * (p - 1.0) * ma.powf(p) * mb.powf(p - 2.0) } else { 0.0 };
                au.push(self.sys.mu1 * (2.0 * p - 1.0) * ma.powf(2.0 * p - 2.0) + pu);
                av.push(self.sys.mu2 * (2.0 * p - 1.0) * mb.powf(2.0 * p - 2.0) + pv);
                cross.push(beta * p * odd_pow(a, p - 1.0) * odd_pow(b, p - 1.0));
            }
            let mut rhs = Vec::with_capacity(2 * n + 2);
            rhs.extend(ru.iter().map(|r| -r));
            rhs.extend(rv.iter().map(|r| -r));
            rhs.push(-(dv * dot(&x.u, &x.u) - t[0]) / (2.0 * dv * nu));
            rhs.push(-(dv * dot(&x.v, &x.v) - t[1]) / (2.0 * dv * nv));
            let lam = x.lam;
            let (u, v) = (&x.u, &x.v);
            let apply = |z: &[f64]| {
                let (zu, rest) = z.split_at(n);
                let (zv, zl) = rest.split_at(n);
                let (lu, lv) = self.op.apply_pair(zu, zv, |k| lam[0] + k, |k| lam[1] + k);
                let mut out = Vec::with_capacity(2 * n + 2);
                for i in 0..n {
                    out.push(lu[i] - au[i] * zu[i] - cross[i] * zv[i] + zl[0] / nu * u[i]);
                }
                for i in 0..n {
                    out.push(lv[i] - av[i] * zv[i] - cross[i] * zu[i] + zl[1] / nv * v[i]);
                }
                out.push(dot(u, zu) / nu);
                out.push(dot(v, zv) / nv);
                out
            };
            let precond = |z: &[f64]| {
                let (zu, rest) = z.split_at(n);
                let (zv, zl) = rest.split_at(n);
                let (mut out, pv) = self.op.apply_pair(zu, zv, |k| 1.0 / (lam[0] + k), |k| 1.0 / (lam[1] + k));
                out.extend(pv);
                out.extend_from_slice(zl);
                out
            };
            let gopts = GmresOpts {
                restart: self.opts.gmres_restart,
                max_iter: self.opts.gmres_max_iter,
                rtol: (0.1 * merit.total().min(1.0)).clamp(1e-10, 1e-3),
            };
            let (dx, _) = gmres(&rhs, apply, precond, gopts);
            let (du, rest) = dx.split_at(n);
            let (dvv, dl) = rest.split_at(n);
            let dlam = [dl[0] / nu, dl[1] / nv];

            let mut step = 1.0;
            let mut accepted = false;
            for _ in 0..8 {
                let mut trial = Point {
                    u: x.u.iter().zip(du).map(|(a, b)| a + step * b).collect(),
                    v: x.v.iter().zip(dvv).map(|(a, b)| a + step * b).collect(),
                    lam: [x.lam[0] + step * dlam[0], x.lam[1] + step * dlam[1]],
                };
                symmetrize(&self.grid, &mut trial.u);
                symmetrize(&self.grid, &mut trial.v);
                let (m, tru, trv) = self.merit(&trial);
                if m.total().is_finite() && m.total() < merit.total() {
                    *x = trial;
                    merit = m;
                    ru = tru;
                    rv = trv;
                    accepted = true;
                    break;
                }
                step *= 0.5;
            }
            if !accepted {
                if self.converged(&merit) {
                    return Ok(k);
                }
                return Err(Error::NoConvergence { iterations: k, residual: merit.el });
            }
        }
        history.push(merit.el);
        if self.converged(&merit) {
            Ok(self.opts.max_newton)
        } else {
            Err(Error::NoConvergence { iterations: self.opts.max_newton, residual: merit.el })
        }
    }
}

/// Newton corrector at fixed `beta` from `(u, v, lambdas)`; returns the
/// refined pair, its multipliers and the Newton iteration count.
pub(crate) fn newton_polish(
    sys: &SystemParams,
    op: &FracOperator,
    u: Vec<f64>,
    v: Vec<f64>,
    lam: [f64; 2],
    opts: &ContinuationOpts,
    history: &mut Vec<f64>,
) -> Result<(Vec<f64>, Vec<f64>, [f64; 2], usize)> {
    let corrector = Corrector { sys: *sys, op, grid: *op.grid(), opts };
    let mut x = Point { u, v, lam };
    let k = corrector.solve(&mut x, history)?;
    Ok((x.u, x.v, x.lam, k))
}

fn symmetrize(grid: &Grid, x: &mut Vec<f64>) {
    let f = Field::from_parts(*grid, std::mem::take(x)).symmetrized();
    *x = f.into_values();
}

/// Scalar solution of `(-Delta)^s w + lambda w = mu w^{2p-1}` on the grid with
/// mass close to `a^2`: one solve at `lambda = 1`, then the scaling law
/// `mass ~ lambda^{-d/(2s(p-1))}` picks `lambda`.
fn decoupled_component(
    op: &FracOperator,
    a: f64,
    mu: f64,
    sys: &SystemParams,
    opts: &SolverOpts,
) -> Result<(Vec<f64>, f64)> {
    let grid = *op.grid();
    let e = sys.problem.exponents();
    let p = sys.problem.p;
    let width = (grid.l / 20.0).min(1.0);
    // The multiplier only needs the mass at lambda = 1 roughly; Newton fixes
    // the rest, so a coarser grid over the same box suffices.
    let coarse = if grid.n == 1 && grid.m >= 4096 { Grid::new(1, grid.m / 4, grid.l)? } else { grid };
    let coarse_op = FracOperator::new(&coarse, sys.problem.s)?;
    let seed = Field::gaussian(coarse, mu.powf(-1.0 / (2.0 * p - 2.0)), width);
    let first = stabilized_fixed_point(&coarse_op, 1.0, mu, p, &seed, opts)?;
    let m1 = crate::spectral::mass(&first.field);
    let lambda = (a * a / m1).powf(-2.0 * e.s * (p - 1.0) / e.d);
    let amp = (lambda / mu).powf(1.0 / (2.0 * p - 2.0));
    let seed = Field::gaussian(grid, amp, width * lambda.powf(-1.0 / (2.0 * e.s)));
    let fp = stabilized_fixed_point(op, lambda, mu, p, &seed, opts)?;
    Ok((fp.field.into_values(), lambda))
}

/// Continuation in `beta` from the decoupled pair at `beta = 0` to `sys.beta`.
///
/// On large one-dimensional grids the path is followed on a quarter-resolution
/// grid over the same box and only the endpoint is corrected at full resolution.
pub fn solve_continuation(sys: &SystemParams, grid: Grid, opts: ContinuationOpts) -> Result<CoupledSolution> {
    check_regime(sys, &opts)?;
    if sys.problem.n != grid.n {
        return Err(Error::InvalidParams("problem and grid dimensions differ".into()));
    }
    let op = FracOperator::new(&grid, sys.problem.s)?;
    if grid.n == 1 && grid.m >= COARSE_PATH_MIN {
        let coarse = Grid::new(1, grid.m / 4, grid.l)?;
        let coarse_op = FracOperator::new(&coarse, sys.problem.s)?;
        let (u, l1) = decoupled_component(&coarse_op, sys.a1, sys.mu1, sys, &opts.scalar)?;
        let (v, l2) = decoupled_component(&coarse_op, sys.a2, sys.mu2, sys, &opts.scalar)?;
        let mut path = march(sys, &coarse_op, Point { u, v, lam: [l1, l2] }, 0.0, &opts)?;
        let lift = |x: Vec<f64>| upsample(&Field::from_parts(coarse, x), &grid);
        path.x = Point { u: lift(path.x.u), v: lift(path.x.v), lam: path.x.lam };
        let corrector = Corrector { sys: *sys, op: &op, grid, opts: &opts };
        path.newton += corrector.solve(&mut path.x, &mut path.history)?;
        path.notes.push(format!("path followed on {} points, endpoint refined on {}", coarse.m, grid.m));
        return finish(sys, grid, path);
    }
    let (u, l1) = decoupled_component(&op, sys.a1, sys.mu1, sys, &opts.scalar)?;
    let (v, l2) = decoupled_component(&op, sys.a2, sys.mu2, sys, &opts.scalar)?;
    let path = march(sys, &op, Point { u, v, lam: [l1, l2] }, 0.0, &opts)?;
    finish(sys, grid, path)
}

/// Continuation from a supplied pair with multipliers at coupling `beta0`
/// (typically `0`).
pub fn solve_continuation_from(
    sys: &SystemParams,
    u: &Field,
    v: &Field,
    lambdas: (f64, f64),
    beta0: f64,
    opts: ContinuationOpts,
) -> Result<CoupledSolution> {
    check_regime(sys, &opts)?;
    let grid = same_grid(u, v)?;
    if !(0.0..=sys.beta).contains(&beta0) {
        return Err(Error::InvalidParams(format!("start coupling {beta0} outside [0, {}]", sys.beta)));
    }
    let op = FracOperator::new(&grid, sys.problem.s)?;
    let start = Point {
        u: u.symmetrized().into_values(),
        v: v.symmetrized().into_values(),
        lam: [lambdas.0, lambdas.1],
    };
    let path = march(sys, &op, start, beta0, &opts)?;
    finish(sys, grid, path)
}

fn check_regime(sys: &SystemParams, opts: &ContinuationOpts) -> Result<()> {
    sys.validate()?;
    let report = classify(sys);
    if report.regime != Regime::BelowBeta1 && !opts.force {
        return Err(Error::Precondition(format!(
            "continuation needs beta < beta1 = {}; beta = {} is in regime {}",
            report.beta1, sys.beta, report.regime
        )));
    }
    Ok(())
}

/// Grid size from which [`solve_continuation`] follows the path on a coarser grid.
const COARSE_PATH_MIN: usize = 1 << 16;

struct Path {
    x: Point,
    history: Vec<f64>,
    newton: usize,
    notes: Vec<String>,
}

fn march(sys: &SystemParams, op: &FracOperator, start: Point, beta0: f64, opts: &ContinuationOpts) -> Result<Path> {
    let grid = *op.grid();
    let target = sys.beta;
    let floor = opts.step_floor * beta1(sys);
    let mut history = Vec::new();
    let mut newton = 0;
    let mut x = start;
    let corrector = |beta: f64| Corrector { sys: sys.with_beta(beta), op, grid, opts };
    newton += corrector(beta0).solve(&mut x, &mut history)?;

    let mut beta = beta0;
    let mut prev: Option<(f64, Point)> = None;
    let mut step = opts.initial_step.unwrap_or(0.25 * (target - beta0)).min(target - beta0);
    let mut notes = Vec::new();
    while beta < target {
        let next = (beta + step).min(target);
        let mut trial = match &prev {
            Some((pb, px)) => x.combine(px, (next - beta) / (beta - pb)),
            None => x.clone(),
        };
        match corrector(next).solve(&mut trial, &mut history) {
            Ok(k) => {
                newton += k;
                prev = Some((beta, std::mem::replace(&mut x, trial)));
                beta = next;
                step *= 1.5;
            }
            Err(Error::NegativeMultiplier { .. }) | Err(Error::NoConvergence { .. }) => {
                step *= 0.5;
                notes.push(format!("step halved to {step:.3e} at beta = {beta}"));
                if step < floor {
                    return Err(Error::StepCollapse { beta, floor });
                }
            }
            Err(e) => return Err(e),
        }
    }
    Ok(Path { x, history, newton, notes })
}

fn finish(sys: &SystemParams, grid: Grid, path: Path) -> Result<CoupledSolution> {
    let Path { x, history, newton, mut notes } = path;
    notes.push(format!(
        "box solution: lambda = ({:.17e}, {:.17e}), residual {:.3e}",
        x.lam[0],
        x.lam[1],
        history.last().copied().unwrap_or(f64::NAN)
    ));
    let u = Field::new(grid, x.u)?;
    let v = Field::new(grid, x.v)?;
    // The box solution misses the Pohozaev constraint by the truncation of
    // the algebraic tails; a dilation restores it exactly.
    let (l, u, v) = project_to_f(&u, &v, sys)?;
    let diagnostics = SolveDiagnostics {
        iterations: newton,
        projection_l: Some(l),
        history,
        notes,
        ..Default::default()
    };
    let regime = classify(sys).regime;
    CoupledSolution::assemble(u, v, *sys, None, regime, diagnostics)?.require_positive_multipliers()
}
