//! Periodic box discretization of R^N and real sample arrays on it.
//!
//! Samples are stored in FFT order along every axis: index `j` sits at
//! coordinate `j*h` for `j < M/2` and `(j-M)*h` otherwise, so the origin is
//! index 0 and reflection `x -> -x` maps `j` to `(M-j) mod M`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Relative tolerance on the box length when deciding that two grids agree.
/// Dilations compose exactly up to rounding of `L`, nothing more.
pub const GRID_LENGTH_RTOL: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Grid {
    pub n: usize,
    pub m: usize,
    pub l: f64,
}

impl Grid {
    pub fn new(n: usize, m: usize, l: f64) -> Result<Self> {
        if !(1..=3).contains(&n) {
            return Err(Error::InvalidGrid(format!("dimension {n} not in {{1,2,3}}")));
        }
        if m < 16 || m % 2 != 0 {
            return Err(Error::InvalidGrid(format!("M = {m} must be even and >= 16")));
        }
        if !(l > 0.0 && l.is_finite()) {
            return Err(Error::InvalidGrid(format!("L = {l} must be positive")));
        }
        m.checked_pow(n as u32)
            .filter(|&total| total <= 1 << 28)
            .ok_or_else(|| Error::InvalidGrid(format!("M^N too large for M = {m}, N = {n}")))?;
        Ok(Self { n, m, l })
    }

    pub fn spacing(&self) -> f64 {
        self.l / self.m as f64
    }

    /// Cell volume `h^N`.
    pub fn cell_volume(&self) -> f64 {
        self.spacing().powi(self.n as i32)
    }

    pub fn volume(&self) -> f64 {
        self.l.powi(self.n as i32)
    }

    pub fn len(&self) -> usize {
        self.m.pow(self.n as u32)
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Signed integer offset of a 1-D index from the origin.
    pub fn offset(&self, j: usize) -> i64 {
        if j < self.m / 2 {
            j as i64
        } else {
            j as i64 - self.m as i64
        }
    }

    /// 1-D coordinates in storage order.
    pub fn axis_coords(&self) -> Vec<f64> {
        let h = self.spacing();
        (0..self.m).map(|j| self.offset(j) as f64 * h).collect()
    }

    /// 1-D angular wavenumbers `2 pi m / L` in storage order; the Nyquist
    /// entry is `-M/2`.
    pub fn axis_wavenumbers(&self) -> Vec<f64> {
        let dk = 2.0 * std::f64::consts::PI / self.l;
        (0..self.m).map(|j| self.offset(j) as f64 * dk).collect()
    }

    /// Splits a flat index into per-axis indices (row-major, last axis fastest).
    pub fn unflatten(&self, mut idx: usize) -> [usize; 3] {
        let mut out = [0usize; 3];
        for axis in (0..self.n).rev() {
            out[axis] = idx % self.m;
            idx /= self.m;
        }
        out
    }

    pub fn flatten(&self, ix: &[usize]) -> usize {
        ix.iter().take(self.n).fold(0, |acc, &j| acc * self.m + j)
    }

    /// Coordinates of a flat index.
    pub fn coords(&self, idx: usize) -> [f64; 3] {
        let h = self.spacing();
        let ix = self.unflatten(idx);
        let mut x = [0.0; 3];
        for axis in 0..self.n {
            x[axis] = self.offset(ix[axis]) as f64 * h;
        }
        x
    }

    /// `|x|^2` at every sample.
    pub fn radius_sq(&self) -> Vec<f64> {
        let c = self.axis_coords();
        self.per_axis_sum(|j| c[j] * c[j])
    }

    /// `|k|^2` at every frequency.
    pub fn wavenumber_sq(&self) -> Vec<f64> {
        let k = self.axis_wavenumbers();
        self.per_axis_sum(|j| k[j] * k[j])
    }

    fn per_axis_sum(&self, f: impl Fn(usize) -> f64) -> Vec<f64> {
        let axis: Vec<f64> = (0..self.m).map(f).collect();
        let mut out = vec![0.0; self.len()];
        for (idx, o) in out.iter_mut().enumerate() {
            let ix = self.unflatten(idx);
            *o = ix.iter().take(self.n).map(|&j| axis[j]).sum();
        }
        out
    }

    /// Flat index of the reflection `x -> -x`.
    pub fn reflect(&self, idx: usize) -> usize {
        let ix = self.unflatten(idx);
        let mut r = [0usize; 3];
        for axis in 0..self.n {
            r[axis] = (self.m - ix[axis]) % self.m;
        }
        self.flatten(&r[..self.n])
    }

    /// True when both grids describe the same box up to [`GRID_LENGTH_RTOL`].
    pub fn matches(&self, other: &Grid) -> bool {
        self.n == other.n
            && self.m == other.m
            && (self.l - other.l).abs() <= GRID_LENGTH_RTOL * self.l.max(other.l)
    }

    pub fn check_same(&self, other: &Grid) -> Result<()> {
        if self.matches(other) {
            Ok(())
        } else {
            Err(Error::GridMismatch)
        }
    }

    /// Same samples on a box scaled by `factor`.
    pub fn rescaled(&self, factor: f64) -> Grid {
        Grid { l: self.l * factor, ..*self }
    }
}

/// Real samples of a function on a [`Grid`].
#[derive(Clone, Debug, PartialEq)]
pub struct Field {
    grid: Grid,
    values: Vec<f64>,
}

impl Field {
    pub fn new(grid: Grid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::InvalidGrid(format!(
                "expected {} samples, got {}",
                grid.len(),
                values.len()
            )));
        }
        if let Some(bad) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite(bad));
        }
        Ok(Self { grid, values })
    }

    /// Internal constructor for values already known to be finite.
    pub(crate) fn from_parts(grid: Grid, values: Vec<f64>) -> Self {
        debug_assert_eq!(values.len(), grid.len());
        Self { grid, values }
    }

    pub fn zeros(grid: Grid) -> Self {
        Self { grid, values: vec![0.0; grid.len()] }
    }

    pub fn constant(grid: Grid, c: f64) -> Self {
        Self { grid, values: vec![c; grid.len()] }
    }

    /// Samples `f(x)` with `x` the coordinate tuple (first `N` entries used).
    pub fn from_fn(grid: Grid, f: impl Fn(&[f64]) -> f64) -> Result<Self> {
        let values = (0..grid.len())
            .map(|idx| {
                let x = grid.coords(idx);
                f(&x[..grid.n])
            })
            .collect();
        Self::new(grid, values)
    }

    /// Isotropic Gaussian `amp * exp(-|x|^2 / width^2)`.
    pub fn gaussian(grid: Grid, amp: f64, width: f64) -> Self {
        let values = grid.radius_sq().iter().map(|r2| amp * (-r2 / (width * width)).exp()).collect();
        Self { grid, values }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Result<Field> {
        Field::new(self.grid, self.values.iter().map(|&v| f(v)).collect())
    }

    pub fn scaled(&self, c: f64) -> Field {
        Field::from_parts(self.grid, self.values.iter().map(|v| c * v).collect())
    }

    /// Same samples viewed on another grid with identical `N` and `M`.
    pub fn with_grid(&self, grid: Grid) -> Result<Field> {
        if grid.n != self.grid.n || grid.m != self.grid.m {
            return Err(Error::GridMismatch);
        }
        Ok(Field::from_parts(grid, self.values.clone()))
    }

    pub fn max(&self) -> f64 {
        self.values.iter().cloned().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn min(&self) -> f64 {
        self.values.iter().cloned().fold(f64::INFINITY, f64::min)
    }

    pub fn argmax(&self) -> usize {
        let mut best = 0;
        for (i, &v) in self.values.iter().enumerate() {
            if v > self.values[best] {
                best = i;
            }
        }
        best
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn is_zero(&self) -> bool {
        self.values.iter().all(|&v| v == 0.0)
    }

    /// Largest `|u(x)|` on the box boundary faces relative to the peak `|u|`.
    pub fn tail_ratio(&self) -> f64 {
        let peak = self.max_abs();
        if peak == 0.0 {
            return 0.0;
        }
        let half = self.grid.m / 2;
        let mut tail: f64 = 0.0;
        for (idx, v) in self.values.iter().enumerate() {
            let ix = self.grid.unflatten(idx);
            if ix.iter().take(self.grid.n).any(|&j| j == half) {
                tail = tail.max(v.abs());
            }
        }
        tail / peak
    }

    /// Average over the reflection `x -> -x`.
    pub fn symmetrized(&self) -> Field {
        let g = self.grid;
        let values = (0..g.len()).map(|i| 0.5 * (self.values[i] + self.values[g.reflect(i)])).collect();
        Field::from_parts(g, values)
    }

    /// Cyclic shift moving the sample at flat index `from` to the origin.
    pub fn rolled_to_origin(&self, from: usize) -> Field {
        let g = self.grid;
        let shift = g.unflatten(from);
        let mut out = vec![0.0; g.len()];
        for (idx, o) in out.iter_mut().enumerate() {
            let ix = g.unflatten(idx);
            let mut src = [0usize; 3];
            for axis in 0..g.n {
                src[axis] = (ix[axis] + shift[axis]) % g.m;
            }
            *o = self.values[g.flatten(&src[..g.n])];
        }
        Field::from_parts(g, out)
    }

    /// Peak moved to the origin (translation gauge used for comparisons).
    pub fn peak_centered(&self) -> Field {
        self.rolled_to_origin(self.argmax())
    }

    /// `max |u - v|` over matching grids.
    pub fn linf_distance(&self, other: &Field) -> Result<f64> {
        self.grid.check_same(&other.grid)?;
        Ok(self.values.iter().zip(&other.values).fold(0.0, |m, (a, b)| m.max((a - b).abs())))
    }
}

/// Checks that both fields share a grid.
pub fn same_grid(u: &Field, v: &Field) -> Result<Grid> {
    u.grid().check_same(v.grid())?;
    Ok(*u.grid())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn make_grid_examples() {
        let g = Grid::new(1, 16, 16.0).unwrap();
        assert_eq!(g.spacing(), 1.0);
        let k = g.axis_wavenumbers();
        let dk = 2.0 * std::f64::consts::PI / 16.0;
        let mut sorted: Vec<i64> = k.iter().map(|k| (k / dk).round() as i64).collect();
        sorted.sort();
        assert_eq!(sorted, (-8..8).collect::<Vec<_>>());

        let g2 = Grid::new(2, 32, 20.0).unwrap();
        assert_eq!(g2.len(), 1024);
        assert_eq!(g2.spacing(), 0.625);

        assert!(matches!(Grid::new(1, 15, 16.0), Err(Error::InvalidGrid(_))));
        assert!(matches!(Grid::new(1, 14, 16.0), Err(Error::InvalidGrid(_))));
        assert!(matches!(Grid::new(1, 16, 0.0), Err(Error::InvalidGrid(_))));
        assert!(matches!(Grid::new(4, 16, 1.0), Err(Error::InvalidGrid(_))));
    }

    #[test]
    fn flatten_roundtrip_and_reflection() {
        let g = Grid::new(3, 16, 4.0).unwrap();
        for idx in [0, 1, 17, 300, 4095] {
            let ix = g.unflatten(idx);
            assert_eq!(g.flatten(&ix[..3]), idx);
            assert_eq!(g.reflect(g.reflect(idx)), idx);
            let x = g.coords(idx);
            let xr = g.coords(g.reflect(idx));
            for a in 0..3 {
                // Nyquist plane maps to itself.
                if ix[a] != 8 {
                    assert_eq!(x[a], -xr[a]);
                }
            }
        }
    }

    #[test]
    fn non_finite_values_rejected() {
        let g = Grid::new(1, 16, 1.0).unwrap();
        let mut v = vec![0.0; 16];
        v[3] = f64::NAN;
        assert!(matches!(Field::new(g, v), Err(Error::NonFinite(3))));
    }

    #[test]
    fn peak_centering_moves_max_to_origin() {
        let g = Grid::new(1, 16, 16.0).unwrap();
        let f = Field::from_fn(g, |x| (-(x[0] - 3.0).powi(2)).exp()).unwrap();
        let c = f.peak_centered();
        assert_eq!(c.argmax(), 0);
        assert_eq!(c.max(), f.max());
    }
}
