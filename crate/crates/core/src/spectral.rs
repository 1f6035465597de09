//! FFT machinery, the fractional Laplacian as a Fourier multiplier and the
//! quadrature primitives.
//!
//! The discrete transform is unnormalized forward / `1/M^N` inverse. All public
//! quantities are physical-space integrals, so that convention never leaks.

use std::cell::RefCell;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};
use crate::grid::{same_grid, Field, Grid};

thread_local! {
    static PLANNER: RefCell<FftPlanner<f64>> = RefCell::new(FftPlanner::new());
}

fn plan(m: usize, inverse: bool) -> Arc<dyn Fft<f64>> {
    PLANNER.with(|p| {
        let mut p = p.borrow_mut();
        if inverse {
            p.plan_fft_inverse(m)
        } else {
            p.plan_fft_forward(m)
        }
    })
}

/// In-place N-dimensional transform. The inverse is normalized by `1/M^N`.
pub fn fft_nd(grid: &Grid, data: &mut [Complex64], inverse: bool) {
    let m = grid.m;
    let n = grid.n;
    assert_eq!(data.len(), grid.len());
    let fft = plan(m, inverse);
    let mut scratch = vec![Complex64::default(); fft.get_inplace_scratch_len()];
    // Last axis is contiguous.
    fft.process_with_scratch(data, &mut scratch);
    if n > 1 {
        let mut line = vec![Complex64::default(); m];
        for axis in 0..n - 1 {
            let stride = m.pow((n - 1 - axis) as u32);
            let blocks = m.pow(axis as u32);
            for block in 0..blocks {
                let base = block * m * stride;
                for inner in 0..stride {
                    for (j, c) in line.iter_mut().enumerate() {
                        *c = data[base + inner + j * stride];
                    }
                    fft.process_with_scratch(&mut line, &mut scratch);
                    for (j, c) in line.iter().enumerate() {
                        data[base + inner + j * stride] = *c;
                    }
                }
            }
        }
    }
    if inverse {
        let norm = 1.0 / data.len() as f64;
        for c in data.iter_mut() {
            *c *= norm;
        }
    }
}

/// Forward transform of real samples.
pub fn forward(grid: &Grid, values: &[f64]) -> Vec<Complex64> {
    let mut data: Vec<Complex64> = values.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    fft_nd(grid, &mut data, false);
    data
}

/// Inverse transform, keeping the real part.
pub fn inverse_real(grid: &Grid, mut spectrum: Vec<Complex64>) -> Vec<f64> {
    fft_nd(grid, &mut spectrum, true);
    spectrum.into_iter().map(|c| c.re).collect()
}

/// `|k|^{2s}` on the frequency lattice, zero mode annihilated.
pub fn frac_symbol(grid: &Grid, s: f64) -> Vec<f64> {
    grid.wavenumber_sq()
        .into_iter()
        .map(|k2| if k2 == 0.0 { 0.0 } else { k2.powf(s) })
        .collect()
}

fn check_order(s: f64) -> Result<()> {
    if s > 0.0 && s <= 1.0 {
        Ok(())
    } else {
        Err(Error::InvalidOrder(s))
    }
}

/// The fractional Laplacian on one grid with its symbol precomputed.
///
/// Solvers hold one of these per grid; every method is `&self` and allocates
/// its own transform buffers.
#[derive(Clone, Debug)]
pub struct FracOperator {
    grid: Grid,
    s: f64,
    symbol: Vec<f64>,
    /// Flat index of `-k` for every frequency `k`.
    mirror: Vec<usize>,
}

impl FracOperator {
    pub fn new(grid: &Grid, s: f64) -> Result<Self> {
        check_order(s)?;
        let mirror = (0..grid.len()).map(|i| grid.reflect(i)).collect();
        Ok(Self { grid: *grid, s, symbol: frac_symbol(grid, s), mirror })
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn order(&self) -> f64 {
        self.s
    }

    pub fn symbol(&self) -> &[f64] {
        &self.symbol
    }

    /// `(-Delta)^s u`.
    pub fn apply(&self, u: &[f64]) -> Vec<f64> {
        self.apply_multiplier(u, |sym| sym)
    }

    /// Inverse transform of `f(|k|^{2s}) * u_hat`.
    pub fn apply_multiplier(&self, u: &[f64], f: impl Fn(f64) -> f64) -> Vec<f64> {
        let mut spec = forward(&self.grid, u);
        for (c, &sym) in spec.iter_mut().zip(&self.symbol) {
            *c *= f(sym);
        }
        inverse_real(&self.grid, spec)
    }

    /// Applies `fu(|k|^{2s})` to `u` and `fv(|k|^{2s})` to `v` with a single
    /// complex transform of `u + i v`.
    pub fn apply_pair(
        &self,
        u: &[f64],
        v: &[f64],
        fu: impl Fn(f64) -> f64,
        fv: impl Fn(f64) -> f64,
    ) -> (Vec<f64>, Vec<f64>) {
        let mut z: Vec<Complex64> = u.iter().zip(v).map(|(&a, &b)| Complex64::new(a, b)).collect();
        fft_nd(&self.grid, &mut z, false);
        let half = Complex64::new(0.5, 0.0);
        let mut w = vec![Complex64::default(); z.len()];
        for (k, out) in w.iter_mut().enumerate() {
            let zk = z[k];
            let zm = z[self.mirror[k]].conj();
            // Spectra of u and v, and i times the latter.
            let uk = (zk + zm) * half;
            let ivk = (zk - zm) * half;
            let sym = self.symbol[k];
            *out = uk * fu(sym) + ivk * fv(sym);
        }
        fft_nd(&self.grid, &mut w, true);
        w.into_iter().map(|c| (c.re, c.im)).unzip()
    }

    /// `(shift + (-Delta)^s)^{-1} rhs`, `shift > 0`.
    pub fn solve_shifted(&self, rhs: &[f64], shift: f64) -> Vec<f64> {
        self.apply_multiplier(rhs, |sym| 1.0 / (shift + sym))
    }

    /// `int |(-Delta)^{s/2} u|^2`.
    pub fn seminorm_sq(&self, u: &[f64]) -> f64 {
        let spec = forward(&self.grid, u);
        let w = self.grid.cell_volume() / self.grid.len() as f64;
        w * spec.iter().zip(&self.symbol).map(|(c, &sym)| sym * c.norm_sqr()).sum::<f64>()
    }
}

/// `(-Delta)^s u` for `0 < s <= 1`.
pub fn frac_laplacian(u: &Field, s: f64) -> Result<Field> {
    let op = FracOperator::new(u.grid(), s)?;
    Ok(Field::from_parts(*u.grid(), op.apply(u.values())))
}

/// `int |(-Delta)^{s/2} u|^2 dx = sum_k |k|^{2s} |u_hat(k)|^2` (Plancherel weights).
pub fn hs_seminorm_sq(u: &Field, s: f64) -> f64 {
    let grid = u.grid();
    let spec = forward(grid, u.values());
    let w = grid.cell_volume() / grid.len() as f64;
    let k2 = grid.wavenumber_sq();
    w * spec
        .iter()
        .zip(&k2)
        .map(|(c, &k2)| if k2 == 0.0 { 0.0 } else { k2.powf(s) * c.norm_sqr() })
        .sum::<f64>()
}

/// Spectral-side mass `h^N / M^N * sum |u_hat|^2`; equals [`mass`] by Plancherel.
pub fn spectral_mass(u: &Field) -> f64 {
    let grid = u.grid();
    let spec = forward(grid, u.values());
    grid.cell_volume() / grid.len() as f64 * spec.iter().map(|c| c.norm_sqr()).sum::<f64>()
}

/// `int u^2 dx`.
pub fn mass(u: &Field) -> f64 {
    u.grid().cell_volume() * u.values().iter().map(|v| v * v).sum::<f64>()
}

/// `int |u|^q dx`, `q >= 1`.
pub fn lp_integral(u: &Field, q: f64) -> Result<f64> {
    if !(q >= 1.0) {
        return Err(Error::InvalidParams(format!("exponent q = {q} must be >= 1")));
    }
    Ok(u.grid().cell_volume() * u.values().iter().map(|v| v.abs().powf(q)).sum::<f64>())
}

/// `int u v dx`.
pub fn inner(u: &Field, v: &Field) -> Result<f64> {
    let grid = same_grid(u, v)?;
    Ok(grid.cell_volume() * u.values().iter().zip(v.values()).map(|(a, b)| a * b).sum::<f64>())
}

/// Evaluates `u` (as a trigonometric interpolant on its torus) at the sample
/// points of `target`. Target points outside the source box wrap periodically.
///
/// Spectral zero-padding followed by 8-point Lagrange interpolation per axis.
pub fn resample(u: &Field, target: &Grid) -> Result<Field> {
    resample_impl(u, target, true)
}

/// As [`resample`], but target points outside the source box are set to zero
/// instead of wrapping. Suited to localized profiles on differently sized boxes.
pub fn resample_localized(u: &Field, target: &Grid) -> Result<Field> {
    resample_impl(u, target, false)
}

fn resample_impl(u: &Field, target: &Grid, wrap_outside: bool) -> Result<Field> {
    let src = *u.grid();
    if src.n != target.n {
        return Err(Error::GridMismatch);
    }
    let factor = if src.n == 1 { 4 } else { 2 };
    let fine = Grid { n: src.n, m: src.m * factor, l: src.l };
    let fine_vals = upsample(u, &fine);
    const P: usize = 8;
    let hf = fine.spacing();
    let tc = target.axis_coords();
    // Per target axis coordinate: base index and Lagrange weights.
    let stencil: Vec<(i64, [f64; P])> = tc
        .iter()
        .map(|&x| {
            let t = x / hf;
            let base = t.floor() as i64 - (P as i64 / 2 - 1);
            let mut w = [0.0; P];
            for (a, wa) in w.iter_mut().enumerate() {
                let xa = (base + a as i64) as f64;
                let mut prod = 1.0;
                for b in 0..P {
                    if b != a {
                        let xb = (base + b as i64) as f64;
                        prod *= (t - xb) / (xa - xb);
                    }
                }
                *wa = prod;
            }
            (base, w)
        })
        .collect();
    let half_box = 0.5 * src.l;
    let inside: Vec<bool> = tc.iter().map(|x| wrap_outside || x.abs() <= half_box).collect();
    let fm = fine.m as i64;
    let wrap = |i: i64| i.rem_euclid(fm) as usize;
    let mut out = vec![0.0; target.len()];
    for (idx, o) in out.iter_mut().enumerate() {
        let ix = target.unflatten(idx);
        if !ix[..src.n].iter().all(|&j| inside[j]) {
            continue;
        }
        let mut acc = 0.0;
        match src.n {
            1 => {
                let (b0, w0) = &stencil[ix[0]];
                for a in 0..P {
                    acc += w0[a] * fine_vals[wrap(b0 + a as i64)];
                }
            }
            2 => {
                let (b0, w0) = &stencil[ix[0]];
                let (b1, w1) = &stencil[ix[1]];
                for a in 0..P {
                    let row = wrap(b0 + a as i64) * fine.m;
                    let mut r = 0.0;
                    for b in 0..P {
                        r += w1[b] * fine_vals[row + wrap(b1 + b as i64)];
                    }
                    acc += w0[a] * r;
                }
            }
            _ => {
                let (b0, w0) = &stencil[ix[0]];
                let (b1, w1) = &stencil[ix[1]];
                let (b2, w2) = &stencil[ix[2]];
                for a in 0..P {
                    let pa = wrap(b0 + a as i64) * fine.m;
                    for b in 0..P {
                        let pb = (pa + wrap(b1 + b as i64)) * fine.m;
                        let mut r = 0.0;
                        for c in 0..P {
                            r += w2[c] * fine_vals[pb + wrap(b2 + c as i64)];
                        }
                        acc += w0[a] * w1[b] * r;
                    }
                }
            }
        }
        *o = acc;
    }
    Field::new(*target, out)
}

/// Trigonometric interpolation onto a finer grid over the same box.
pub(crate) fn upsample(u: &Field, fine: &Grid) -> Vec<f64> {
    let src = *u.grid();
    let spec = forward(&src, u.values());
    let mut padded = vec![Complex64::default(); fine.len()];
    let m = src.m as i64;
    let half = m / 2;
    let fm = fine.m as i64;
    for (idx, c) in spec.iter().enumerate() {
        let ix = src.unflatten(idx);
        // Nyquist entries are split evenly between +M/2 and -M/2.
        let mut targets: Vec<([usize; 3], f64)> = vec![([0; 3], 1.0)];
        for axis in 0..src.n {
            let off = src.offset(ix[axis]);
            let mut next = Vec::with_capacity(targets.len() * 2);
            for (t, w) in targets {
                if off == -half {
                    for sgn in [-half, half] {
                        let mut t2 = t;
                        t2[axis] = sgn.rem_euclid(fm) as usize;
                        next.push((t2, w * 0.5));
                    }
                } else {
                    let mut t2 = t;
                    t2[axis] = off.rem_euclid(fm) as usize;
                    next.push((t2, w));
                }
            }
            targets = next;
        }
        for (t, w) in targets {
            padded[fine.flatten(&t[..src.n])] += c * w;
        }
    }
    let scale = fine.len() as f64 / src.len() as f64;
    inverse_real(fine, padded).into_iter().map(|v| v * scale).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn grid1(m: usize, l: f64) -> Grid {
        Grid::new(1, m, l).unwrap()
    }

    #[test]
    fn cosine_is_an_eigenfunction() {
        let g = grid1(64, 2.0 * PI);
        let k0 = 3.0;
        let u = Field::from_fn(g, |x| (k0 * x[0]).cos()).unwrap();
        for s in [0.3, 0.5, 1.0] {
            let lu = frac_laplacian(&u, s).unwrap();
            for (a, b) in lu.values().iter().zip(u.values()) {
                assert!((a - k0.powf(2.0 * s) * b).abs() < 1e-12);
            }
            let hs = hs_seminorm_sq(&u, s);
            assert!((hs - k0.powf(2.0 * s) * mass(&u)).abs() < 1e-12 * hs);
        }
    }

    #[test]
    fn constants_are_annihilated() {
        let g = Grid::new(2, 16, 5.0).unwrap();
        let u = Field::constant(g, 2.5);
        let lu = frac_laplacian(&u, 0.7).unwrap();
        assert!(lu.max_abs() < 1e-13);
        assert!(hs_seminorm_sq(&u, 0.7).abs() < 1e-20);
    }

    #[test]
    fn invalid_order_rejected() {
        let g = grid1(16, 1.0);
        let u = Field::zeros(g);
        assert!(matches!(frac_laplacian(&u, 0.0), Err(Error::InvalidOrder(_))));
        assert!(matches!(frac_laplacian(&u, 1.2), Err(Error::InvalidOrder(_))));
        assert!(frac_laplacian(&u, 1.0).is_ok());
    }

    #[test]
    fn quadrature_examples() {
        let g = grid1(64, 10.0);
        assert_eq!(mass(&Field::zeros(g)), 0.0);
        assert!((mass(&Field::constant(g, 1.0)) - 10.0).abs() < 1e-12);
        assert!((lp_integral(&Field::constant(g, 1.0), 5.0).unwrap() - 10.0).abs() < 1e-12);
        assert!((lp_integral(&Field::constant(g, 2.0), 3.0).unwrap() - 80.0).abs() < 1e-11);
        assert!(lp_integral(&Field::constant(g, 1.0), 0.5).is_err());
    }

    #[test]
    fn gaussian_mass_and_l4() {
        let g = grid1(512, 40.0);
        let u = Field::gaussian(g, 1.0, 1.0);
        // int e^{-2x^2} = sqrt(pi/2), int e^{-4x^2} = sqrt(pi)/2
        assert!((mass(&u) - (PI / 2.0).sqrt()).abs() < 1e-10);
        assert!((lp_integral(&u, 4.0).unwrap() - PI.sqrt() / 2.0).abs() < 1e-10);
    }

    #[test]
    fn multidimensional_transform_roundtrip() {
        let g = Grid::new(3, 16, 3.0).unwrap();
        let u = Field::from_fn(g, |x| (x[0] - 0.3 * x[1]).sin() + x[2] * x[2]).unwrap();
        let back = inverse_real(&g, forward(&g, u.values()));
        for (a, b) in back.iter().zip(u.values()) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn resample_reproduces_band_limited_field() {
        let g = grid1(128, 20.0);
        let u = Field::gaussian(g, 1.0, 1.5);
        let target = grid1(128, 17.0);
        let r = resample(&u, &target).unwrap();
        let exact = Field::gaussian(target, 1.0, 1.5);
        assert!(r.linf_distance(&exact).unwrap() < 1e-9);
    }

    #[test]
    fn paired_transform_matches_separate_ones() {
        let g = Grid::new(2, 16, 9.0).unwrap();
        let u = Field::from_fn(g, |x| (x[0] - 0.3 * x[1]).cos() * (-x[1] * x[1] / 4.0).exp()).unwrap();
        let v = Field::from_fn(g, |x| (-(x[0] * x[0] + x[1] * x[1]) / 3.0).exp() + 0.1 * x[0].sin()).unwrap();
        let op = FracOperator::new(&g, 0.6).unwrap();
        let (a, b) = op.apply_pair(u.values(), v.values(), |k| 0.7 + k, |k| 1.0 / (2.0 + k));
        let a2 = op.apply_multiplier(u.values(), |k| 0.7 + k);
        let b2 = op.solve_shifted(v.values(), 2.0);
        for i in 0..g.len() {
            assert!((a[i] - a2[i]).abs() < 1e-12);
            assert!((b[i] - b2[i]).abs() < 1e-12);
        }
    }
}
