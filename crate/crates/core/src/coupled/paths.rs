use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fiber::{dilate, FiberCurve};
use crate::grid::Field;
use crate::params::SystemParams;
use crate::scalar::{scalar_level, scaled_solution, ScalarGroundState};
use crate::spectral::resample_localized;
use crate::thresholds::{classify, Regime};

/// `Q = [rho1, R1] x [rho2, R2]`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PathBox {
    pub rho: [f64; 2],
    pub big_r: [f64; 2],
}

/// `E` sampled over `(t1 * w1, t2 * w2)` with the one-dimensional curves
/// `phi_i(l) = I_{mu_i}(l * w_i)` and `phi~_i(l) = d/dl I_{mu_i + beta}(l * w_i)`,
/// where `w_i = w_{a_i, mu_i + beta}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PathDiagnostics {
    pub path_box: PathBox,
    pub t: [Vec<f64>; 2],
    /// Row-major over `(t1, t2)`.
    pub energy: Vec<f64>,
    pub phi: [Vec<f64>; 2],
    pub phi_tilde: [Vec<f64>; 2],
    /// `phi~_i(0)`.
    pub phi_tilde_at_zero: [f64; 2],
    /// `I_{mu_i}(w_{a_i, mu_i})`.
    pub scalar_levels: [f64; 2],
}

impl PathDiagnostics {
    pub fn at(&self, i: usize, j: usize) -> f64 {
        self.energy[i * self.t[1].len() + j]
    }

    /// Largest sampled value on the boundary of `Q`.
    pub fn boundary_max(&self) -> f64 {
        let (n1, n2) = (self.t[0].len(), self.t[1].len());
        let mut m = f64::NEG_INFINITY;
        for i in 0..n1 {
            for j in 0..n2 {
                if i == 0 || j == 0 || i + 1 == n1 || j + 1 == n2 {
                    m = m.max(self.at(i, j));
                }
            }
        }
        m
    }

    pub fn max(&self) -> f64 {
        self.energy.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    /// `phi~_i > 0` on sampled `l < 0`, `< 0` on sampled `l > 0`, and
    /// `|phi~_i(0)|` below `tol` times the curve's scale.
    pub fn sign_pattern_holds(&self, tol: f64) -> bool {
        (0..2).all(|i| {
            let scale = self.phi_tilde[i].iter().fold(0.0f64, |m, x| m.max(x.abs()));
            let ok = self.t[i].iter().zip(&self.phi_tilde[i]).all(|(&l, &f)| {
                if l < 0.0 {
                    f > 0.0
                } else if l > 0.0 {
                    f < 0.0
                } else {
                    true
                }
            });
            ok && self.phi_tilde_at_zero[i].abs() <= tol * scale.max(f64::MIN_POSITIVE)
        })
    }

    /// `t1,t2,E` rows.
    pub fn surface_csv(&self) -> String {
        let mut out = String::from("t1,t2,energy\n");
        for (i, t1) in self.t[0].iter().enumerate() {
            for (j, t2) in self.t[1].iter().enumerate() {
                out.push_str(&format!("{t1},{t2},{}\n", self.at(i, j)));
            }
        }
        out
    }

    /// `component,l,phi,phi_tilde` rows.
    pub fn curves_csv(&self) -> String {
        let mut out = String::from("component,l,phi,phi_tilde\n");
        for i in 0..2 {
            for (k, l) in self.t[i].iter().enumerate() {
                out.push_str(&format!("{},{l},{},{}\n", i + 1, self.phi[i][k], self.phi_tilde[i][k]));
            }
        }
        out
    }
}

fn require_below_beta1(sys: &SystemParams) -> Result<()> {
    let report = classify(sys);
    if report.regime != Regime::BelowBeta1 {
        return Err(Error::Precondition(format!(
            "path diagnostics need beta < beta1 = {}; beta = {} is in regime {}",
            report.beta1, sys.beta, report.regime
        )));
    }
    Ok(())
}

/// Closed-form fibers: `phi_i` under `mu_i` and `phi~_i` under `mu_i + beta`,
/// both through `w_{a_i, mu_i + beta}`.
fn curves(sys: &SystemParams, gs: &ScalarGroundState) -> [(FiberCurve, FiberCurve); 2] {
    let e = gs.exponents();
    let pair = |a: f64, mu: f64| {
        let cf = crate::scalar::scaled_closed_forms(&e, gs.c0, gs.c1, a, mu + sys.beta);
        let b = cf.nonlinear;
        (
            FiberCurve::new(cf.kinetic, mu * b, &sys.problem),
            FiberCurve::new(cf.kinetic, (mu + sys.beta) * b, &sys.problem),
        )
    };
    [pair(sys.a1, sys.mu1), pair(sys.a2, sys.mu2)]
}

/// Half the gap between `I_{mu1+beta}(w_{a1,mu1+beta}) + I_{mu2+beta}(w_{a2,mu2+beta})`,
/// a lower bound for `E` on the product of the Pohozaev sets, and the larger
/// scalar level.
pub fn default_epsilon(sys: &SystemParams, gs: &ScalarGroundState) -> Result<f64> {
    require_below_beta1(sys)?;
    let lower = scalar_level(gs, sys.a1, sys.mu1 + sys.beta) + scalar_level(gs, sys.a2, sys.mu2 + sys.beta);
    let top = scalar_level(gs, sys.a1, sys.mu1).max(scalar_level(gs, sys.a2, sys.mu2));
    let eps = 0.5 * (lower - top);
    if eps > 0.0 {
        Ok(eps)
    } else {
        Err(Error::Precondition(format!("no admissible epsilon: gap {:.3e}", lower - top)))
    }
}

/// `rho_i < 0 < R_i` with `0 < phi_i(rho_i) < eps` and `phi_i(R_i) <= 0`,
/// found on the integers.
pub fn path_box(sys: &SystemParams, gs: &ScalarGroundState, eps: f64) -> Result<PathBox> {
    require_below_beta1(sys)?;
    if !(eps > 0.0) {
        return Err(Error::InvalidParams(format!("epsilon = {eps} must be positive")));
    }
    let c = curves(sys, gs);
    let mut rho = [0.0; 2];
    let mut big_r = [0.0; 2];
    for i in 0..2 {
        let phi = &c[i].0;
        rho[i] = (1..=400)
            .map(|k| -(k as f64))
            .find(|&l| {
                let f = phi.energy(l);
                f > 0.0 && f < eps
            })
            .ok_or_else(|| Error::NoConvergence { iterations: 400, residual: phi.energy(-400.0) })?;
        big_r[i] = (1..=400)
            .map(|k| k as f64)
            .find(|&l| phi.energy(l) <= 0.0)
            .ok_or_else(|| Error::NoConvergence { iterations: 400, residual: phi.energy(400.0) })?;
    }
    Ok(PathBox { rho, big_r })
}

fn linspace(a: f64, b: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![a];
    }
    (0..n).map(|k| a + (b - a) * k as f64 / (n - 1) as f64).collect()
}

/// `X(d) = int w1^p (d * w2)^p`, evaluated on the grid of the narrower profile.
fn cross_integral(w1: &Field, w2: &Field, d: f64, s: f64, p: f64) -> Result<f64> {
    let dw2 = dilate(w2, d, s);
    let (a, b) = if dw2.grid().l < w1.grid().l {
        (resample_localized(w1, dw2.grid())?, dw2)
    } else {
        (resample_localized(&dw2, w1.grid())?, w1.clone())
    };
    let dv = b.grid().cell_volume();
    Ok(dv * a.values().iter().zip(b.values()).map(|(x, y)| (x.abs() * y.abs()).powf(p)).sum::<f64>())
}

/// Samples `E(t1 * w1, t2 * w2)` on a `resolution x resolution` lattice of `Q`.
/// Fiber terms use the closed-form scaling laws; the coupling term uses
/// `int (t1*w1)^p (t2*w2)^p = e^{(p-1)N s t1} X(t2 - t1)`.
pub fn path_energy_surface(
    sys: &SystemParams,
    gs: &ScalarGroundState,
    path_box: PathBox,
    resolution: usize,
) -> Result<PathDiagnostics> {
    require_below_beta1(sys)?;
    if resolution < 2 {
        return Err(Error::InvalidParams("resolution must be at least 2".into()));
    }
    for i in 0..2 {
        let (r, big) = (path_box.rho[i], path_box.big_r[i]);
        if !(r.is_finite() && big.is_finite() && r < 0.0 && big > 0.0) {
            return Err(Error::InvalidParams(format!("box side [{r}, {big}] must satisfy rho < 0 < R")));
        }
    }
    let e = sys.problem.exponents();
    let s = e.s;
    let p = e.p;
    let c = curves(sys, gs);
    let w1 = scaled_solution(sys.a1, sys.mu1 + sys.beta, gs)?.w;
    let w2 = scaled_solution(sys.a2, sys.mu2 + sys.beta, gs)?.w;
    let t = [
        linspace(path_box.rho[0], path_box.big_r[0], resolution),
        linspace(path_box.rho[1], path_box.big_r[1], resolution),
    ];
    let mut cache: HashMap<u64, f64> = HashMap::new();
    let mut energy = Vec::with_capacity(resolution * resolution);
    for &t1 in &t[0] {
        for &t2 in &t[1] {
            let d = t2 - t1;
            let x = match cache.get(&d.to_bits()) {
                Some(&x) => x,
                None => {
                    let x = cross_integral(&w1, &w2, d, s, p)?;
                    cache.insert(d.to_bits(), x);
                    x
                }
            };
            let cross = (e.pn * s * t1).exp() * x;
            energy.push(c[0].0.energy(t1) + c[1].0.energy(t2) - sys.beta / p * cross);
        }
    }
    let phi = [
        t[0].iter().map(|&l| c[0].0.energy(l)).collect(),
        t[1].iter().map(|&l| c[1].0.energy(l)).collect(),
    ];
    let phi_tilde = [
        t[0].iter().map(|&l| c[0].1.derivative(l)).collect(),
        t[1].iter().map(|&l| c[1].1.derivative(l)).collect(),
    ];
    Ok(PathDiagnostics {
        path_box,
        t,
        energy,
        phi,
        phi_tilde,
        phi_tilde_at_zero: [c[0].1.derivative(0.0), c[1].1.derivative(0.0)],
        scalar_levels: [scalar_level(gs, sys.a1, sys.mu1), scalar_level(gs, sys.a2, sys.mu2)],
    })
}
