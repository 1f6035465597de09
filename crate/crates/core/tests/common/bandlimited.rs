#![allow(dead_code)]

use fracnls::spectral::{frac_laplacian, hs_seminorm_sq, inner, mass, spectral_mass};
use fracnls::{Field, Grid};
use proptest::prelude::*;
use proptest::test_runner::TestCaseError;

/// A finite cosine series `c + sum a cos(k . x + phi)` on a periodic box,
/// kept in analytic form so that every multiplier has an exact oracle.
#[derive(Clone, Debug)]
pub struct Series {
    pub grid: Grid,
    pub constant: f64,
    /// `(integer mode per axis, amplitude, phase)`
    pub modes: Vec<([i64; 2], f64, f64)>,
}

impl Series {
    fn wavevector(&self, m: [i64; 2]) -> [f64; 2] {
        let dk = 2.0 * std::f64::consts::PI / self.grid.l;
        [m[0] as f64 * dk, m[1] as f64 * dk]
    }

    /// Samples of `sum |k|^{2s} a cos(k . x + phi)`; `s = 0` gives the series itself.
    pub fn sample_with_multiplier(&self, s: f64) -> Field {
        Field::from_fn(self.grid, |x| {
            let mut v = if s == 0.0 { self.constant } else { 0.0 };
            for &(m, a, phi) in &self.modes {
                let k = self.wavevector(m);
                let k2 = k[0] * k[0] + k[1] * k[1];
                let arg = k[0] * x[0] + if x.len() > 1 { k[1] * x[1] } else { 0.0 } + phi;
                v += k2.powf(s) * a * arg.cos();
            }
            v
        })
        .unwrap()
    }

    pub fn field(&self) -> Field {
        self.sample_with_multiplier(0.0)
    }

    /// Exact `int u^2` over the box.
    pub fn exact_mass(&self) -> f64 {
        let v = self.grid.volume();
        v * (self.constant * self.constant + self.modes.iter().map(|(_, a, _)| 0.5 * a * a).sum::<f64>())
    }
}

/// Random series with distinct modes strictly below the Nyquist frequency.
pub fn series() -> impl Strategy<Value = Series> {
    (1usize..=2, 10.0f64..60.0).prop_flat_map(|(n, l)| {
        let m = if n == 1 { 64 } else { 32 };
        let top = (m / 2 - 1) as i64;
        let mode = if n == 1 { ((1..=top), Just(0i64)).boxed() } else { ((-top..=top), (1..=top)).boxed() };
        (
            -2.0f64..2.0,
            prop::collection::btree_map(mode, (-1.0f64..1.0, 0.0f64..std::f64::consts::TAU), 1..8),
        )
            .prop_map(move |(constant, modes)| Series {
                grid: Grid::new(n, m, l).unwrap(),
                constant,
                modes: modes.into_iter().map(|((a, b), (amp, phi))| ([a, b], amp, phi)).collect(),
            })
    })
}

/// Two independent series on one grid.
pub fn series_pair() -> impl Strategy<Value = (Series, Series)> {
    (series(), series()).prop_map(|(a, mut b)| {
        b.grid = a.grid;
        b.modes.retain(|(m, _, _)| a.grid.n == 2 || m[1] == 0);
        (a, b)
    })
}

fn sup(u: &Field) -> f64 {
    u.max_abs()
}

pub fn plancherel(u: &Series) -> Result<(), TestCaseError> {
    let f = u.field();
    let m = mass(&f);
    let scale = m.max(1e-300);
    prop_assert!((spectral_mass(&f) - m).abs() <= 1e-12 * scale, "spectral {} vs {}", spectral_mass(&f), m);
    prop_assert!((u.exact_mass() - m).abs() <= 1e-12 * scale, "exact {} vs {}", u.exact_mass(), m);
    Ok(())
}

pub fn semigroup(u: &Series, s1: f64, s2: f64) -> Result<(), TestCaseError> {
    let f = u.field();
    let two_step = frac_laplacian(&frac_laplacian(&f, s1).unwrap(), s2).unwrap();
    let direct = frac_laplacian(&f, s1 + s2).unwrap();
    let exact = u.sample_with_multiplier(s1 + s2);
    let scale = sup(&exact).max(1e-300);
    prop_assert!(two_step.linf_distance(&direct).unwrap() <= 1e-10 * scale);
    prop_assert!(direct.linf_distance(&exact).unwrap() <= 1e-10 * scale);
    Ok(())
}

pub fn self_adjoint(u: &Series, v: &Series, s: f64) -> Result<(), TestCaseError> {
    let (f, g) = (u.field(), v.field());
    let (af, ag) = (frac_laplacian(&f, s).unwrap(), frac_laplacian(&g, s).unwrap());
    let lhs = inner(&af, &g).unwrap();
    let rhs = inner(&f, &ag).unwrap();
    let scale = (mass(&af) * mass(&g)).sqrt().max((mass(&f) * mass(&ag)).sqrt()).max(1e-300);
    prop_assert!((lhs - rhs).abs() <= 1e-10 * scale, "{lhs} vs {rhs}");
    Ok(())
}

pub fn seminorm_positive(u: &Series, s: f64) -> Result<(), TestCaseError> {
    let f = u.field();
    let k = hs_seminorm_sq(&f, s);
    prop_assert!(k > 0.0);
    let c = Field::constant(u.grid, u.constant);
    prop_assert!(hs_seminorm_sq(&c, s) <= 1e-24 * mass(&c).max(1.0));
    Ok(())
}
