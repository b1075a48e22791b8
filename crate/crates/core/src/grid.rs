//! Periodic sampling lattices and real fields on them.
//!
//! A [`GridSpec`] describes the torus `[0, L)^d` sampled at `n` points per
//! axis. Sample `i` along an axis sits at `x = i h`; for geometry the signed
//! representative `(i - n) h` is used once `i >= n/2`, so the origin is sample
//! zero and kernels are centred there. Values are stored row-major with axis 0
//! slowest.

use crate::error::{Error, Result};

pub const MAX_DIM: usize = 4;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    d: usize,
    n: usize,
    box_length: f64,
}

pub fn make_grid(d: usize, n: usize, box_length: f64) -> Result<GridSpec> {
    GridSpec::new(d, n, box_length)
}

impl GridSpec {
    pub fn new(d: usize, n: usize, box_length: f64) -> Result<Self> {
        if d == 0 || d > MAX_DIM {
            return Err(Error::Dimension(d));
        }
        if n < 4 || !n.is_power_of_two() {
            return Err(Error::NotPowerOfTwo(n));
        }
        if !(box_length.is_finite() && box_length > 0.0) {
            return Err(Error::BoxLength(box_length));
        }
        Ok(Self { d, n, box_length })
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn box_length(&self) -> f64 {
        self.box_length
    }

    pub fn spacing(&self) -> f64 {
        self.box_length / self.n as f64
    }

    pub fn cell_volume(&self) -> f64 {
        self.spacing().powi(self.d as i32)
    }

    pub fn box_volume(&self) -> f64 {
        self.box_length.powi(self.d as i32)
    }

    pub fn len(&self) -> usize {
        self.n.pow(self.d as u32)
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Stride of `axis` in the flat layout.
    pub fn stride(&self, axis: usize) -> usize {
        self.n.pow((self.d - 1 - axis) as u32)
    }

    pub fn unravel(&self, mut flat: usize, out: &mut [usize]) {
        for axis in (0..self.d).rev() {
            out[axis] = flat % self.n;
            flat /= self.n;
        }
    }

    pub fn ravel(&self, idx: &[usize]) -> usize {
        idx.iter().fold(0, |acc, &i| acc * self.n + i)
    }

    /// Flat index of `idx + offset` with periodic wrap.
    pub fn ravel_wrapped(&self, idx: &[usize], offset: &[isize]) -> usize {
        let n = self.n as isize;
        idx.iter()
            .zip(offset)
            .fold(0, |acc, (&i, &o)| acc * self.n + (i as isize + o).rem_euclid(n) as usize)
    }

    /// Signed lattice offset of sample `i`, in `[-n/2, n/2)`.
    pub fn signed_index(&self, i: usize) -> isize {
        if i < self.n / 2 {
            i as isize
        } else {
            i as isize - self.n as isize
        }
    }

    /// Signed physical coordinate of sample `i` along an axis.
    pub fn coordinate(&self, i: usize) -> f64 {
        self.signed_index(i) as f64 * self.spacing()
    }

    /// Frequency (cycles per unit length) of DFT index `i` along an axis.
    pub fn frequency(&self, i: usize) -> f64 {
        self.signed_index(i) as f64 / self.box_length
    }

    /// Largest frequency magnitude representable along one axis.
    pub fn nyquist(&self) -> f64 {
        self.n as f64 / (2.0 * self.box_length)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Field {
    grid: GridSpec,
    values: Vec<f64>,
}

impl Field {
    pub fn new(grid: GridSpec, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::Config(format!(
                "field needs {} values, got {}",
                grid.len(),
                values.len()
            )));
        }
        if let Some(v) = values.iter().find(|v| !v.is_finite()) {
            return Err(Error::Config(format!("non-finite field value {v}")));
        }
        Ok(Self { grid, values })
    }

    /// Internal constructor for values already known to be finite.
    pub(crate) fn from_parts(grid: GridSpec, values: Vec<f64>) -> Self {
        debug_assert_eq!(values.len(), grid.len());
        Self { grid, values }
    }

    pub fn zeros(grid: GridSpec) -> Self {
        Self::constant(grid, 0.0)
    }

    pub fn constant(grid: GridSpec, c: f64) -> Self {
        Self { grid, values: vec![c; grid.len()] }
    }

    /// Samples `f` at the signed physical coordinates of every lattice point.
    pub fn from_fn(grid: GridSpec, mut f: impl FnMut(&[f64]) -> f64) -> Self {
        let d = grid.dim();
        let mut idx = vec![0usize; d];
        let mut x = vec![0.0; d];
        let values = (0..grid.len())
            .map(|flat| {
                grid.unravel(flat, &mut idx);
                for (xa, &ia) in x.iter_mut().zip(&idx) {
                    *xa = grid.coordinate(ia);
                }
                f(&x)
            })
            .collect();
        Self { grid, values }
    }

    /// Field equal to `1/h^d` at the origin and zero elsewhere (unit mass).
    pub fn unit_impulse(grid: GridSpec) -> Self {
        let mut f = Self::zeros(grid);
        f.values[0] = 1.0 / grid.cell_volume();
        f
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn get(&self, idx: &[usize]) -> f64 {
        self.values[self.grid.ravel(idx)]
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Field {
        Field::from_parts(self.grid, self.values.iter().map(|&v| f(v)).collect())
    }

    pub fn scale(&self, c: f64) -> Field {
        self.map(|v| c * v)
    }

    pub fn abs(&self) -> Field {
        self.map(f64::abs)
    }

    pub fn zip_with(&self, other: &Field, f: impl Fn(f64, f64) -> f64) -> Result<Field> {
        if self.grid != other.grid {
            return Err(Error::GridMismatch);
        }
        let values = self.values.iter().zip(&other.values).map(|(&a, &b)| f(a, b)).collect();
        Ok(Field::from_parts(self.grid, values))
    }

    pub fn add(&self, other: &Field) -> Result<Field> {
        self.zip_with(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &Field) -> Result<Field> {
        self.zip_with(other, |a, b| a - b)
    }

    pub fn max_value(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn min_value(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    /// Quadrature of the field over the box.
    pub fn integral(&self) -> f64 {
        self.values.iter().sum::<f64>() * self.grid.cell_volume()
    }

    pub fn mean(&self) -> f64 {
        self.values.iter().sum::<f64>() / self.values.len() as f64
    }

    /// `g(i) = f(i - shift)` with periodic wrap, so the pattern moves by `shift`.
    pub fn translate(&self, shift: &[isize]) -> Field {
        let d = self.grid.dim();
        let neg: Vec<isize> = shift.iter().map(|s| -s).collect();
        let mut idx = vec![0usize; d];
        let values = (0..self.grid.len())
            .map(|flat| {
                self.grid.unravel(flat, &mut idx);
                self.values[self.grid.ravel_wrapped(&idx, &neg)]
            })
            .collect();
        Field::from_parts(self.grid, values)
    }
}

/// Discrete `L^p` norm `(sum |f|^p h^d)^(1/p)`; pass `f64::INFINITY` for the sup norm.
pub fn lp_norm(f: &Field, p: f64) -> Result<f64> {
    if p.is_nan() || p < 1.0 {
        return Err(Error::Exponent(p));
    }
    if p.is_infinite() {
        return Ok(f.values.iter().fold(0.0, |m, v| m.max(v.abs())));
    }
    // Scale by the sup norm first so large p cannot overflow.
    let sup = f.values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if sup == 0.0 {
        return Ok(0.0);
    }
    let sum: f64 = f.values.iter().map(|v| (v.abs() / sup).powf(p)).sum();
    Ok(sup * (sum * f.grid.cell_volume()).powf(1.0 / p))
}

/// Measure of `{x : f(x) > lambda}`.
pub fn level_measure(f: &Field, lambda: f64) -> f64 {
    let count = f.values.iter().filter(|&&v| v > lambda).count();
    count as f64 * f.grid.cell_volume()
}

const DIRECT_LIMIT: usize = 1 << 16;

/// Periodic convolution by the direct double sum; an oracle for small grids.
pub fn direct_convolve(f: &Field, g: &Field) -> Result<Field> {
    if f.grid != g.grid {
        return Err(Error::GridMismatch);
    }
    let grid = f.grid;
    let len = grid.len();
    if len > DIRECT_LIMIT {
        return Err(Error::OracleTooLarge(len));
    }
    let d = grid.dim();
    let n = grid.n();
    let mut xi = vec![0usize; d];
    let mut yi = vec![0usize; d];
    let mut diff = vec![0usize; d];
    let mut out = vec![0.0; len];
    for (x, slot) in out.iter_mut().enumerate() {
        grid.unravel(x, &mut xi);
        let mut acc = 0.0;
        for (y, &fy) in f.values.iter().enumerate() {
            grid.unravel(y, &mut yi);
            for a in 0..d {
                diff[a] = (xi[a] + n - yi[a]) % n;
            }
            acc += fy * g.values[grid.ravel(&diff)];
        }
        *slot = acc * grid.cell_volume();
    }
    Ok(Field::from_parts(grid, out))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid2(n: usize, l: f64) -> GridSpec {
        make_grid(2, n, l).unwrap()
    }

    #[test]
    fn spacing_examples() {
        assert_eq!(make_grid(2, 8, 1.0).unwrap().spacing(), 0.125);
        assert_eq!(make_grid(3, 16, 8.0).unwrap().spacing(), 0.5);
        assert!(matches!(make_grid(2, 7, 1.0), Err(Error::NotPowerOfTwo(7))));
        assert!(matches!(make_grid(5, 8, 1.0), Err(Error::Dimension(5))));
        assert!(matches!(make_grid(0, 8, 1.0), Err(Error::Dimension(0))));
        assert!(make_grid(2, 2, 1.0).is_err());
        assert!(make_grid(2, 8, 0.0).is_err());
    }

    #[test]
    fn spacing_times_n_is_box() {
        for &(n, l) in &[(8usize, 1.0), (64, 3.7), (1024, 0.1)] {
            let g = grid2(n, l);
            assert_eq!(g.spacing() * n as f64, l);
        }
    }

    #[test]
    fn lp_norm_examples() {
        let g = grid2(8, 1.0);
        let one = Field::constant(g, 1.0);
        assert!((lp_norm(&one, 2.0).unwrap() - 1.0).abs() < 1e-15);
        let half = Field::from_fn(g, |x| if x[0] >= 0.0 { 1.0 } else { 0.0 });
        assert!((lp_norm(&half, 1.0).unwrap() - 0.5).abs() < 1e-15);
        assert!(matches!(lp_norm(&one, 0.5), Err(Error::Exponent(_))));
        assert_eq!(lp_norm(&Field::zeros(g), 3.0).unwrap(), 0.0);
        assert_eq!(lp_norm(&half.scale(-3.0), f64::INFINITY).unwrap(), 3.0);
    }

    #[test]
    fn level_measure_examples() {
        let g = grid2(8, 1.0);
        let one = Field::constant(g, 1.0);
        assert_eq!(level_measure(&one, 2.0), 0.0);
        assert_eq!(level_measure(&one, 0.5), 1.0);
    }

    #[test]
    fn translate_by_period_is_identity() {
        let g = make_grid(3, 4, 1.0).unwrap();
        let f = Field::from_fn(g, |x| x[0] + 2.0 * x[1] * x[1] - x[2]);
        assert_eq!(f.translate(&[4, 0, -8]), f);
        assert_eq!(f.translate(&[1, 2, 3]).translate(&[-1, -2, -3]), f);
        assert_ne!(f.translate(&[1, 0, 0]), f);
    }

    #[test]
    fn direct_convolve_identity_and_constants() {
        let g = grid2(8, 2.0);
        let f = Field::from_fn(g, |x| (x[0] * 3.0).sin() + x[1]);
        let out = direct_convolve(&f, &Field::unit_impulse(g)).unwrap();
        for (a, b) in out.values().iter().zip(f.values()) {
            assert!((a - b).abs() < 1e-12);
        }
        let u = grid2(8, 1.0);
        let c = direct_convolve(&Field::constant(u, 2.0), &Field::constant(u, 3.5)).unwrap();
        assert!(c.values().iter().all(|v| (v - 7.0).abs() < 1e-12));
    }

    #[test]
    fn direct_convolve_guards() {
        let a = Field::zeros(grid2(8, 1.0));
        let b = Field::zeros(grid2(8, 2.0));
        assert!(matches!(direct_convolve(&a, &b), Err(Error::GridMismatch)));
        let big = Field::zeros(grid2(512, 1.0));
        assert!(matches!(direct_convolve(&big, &big), Err(Error::OracleTooLarge(_))));
    }

    #[test]
    fn field_rejects_nan() {
        let g = grid2(4, 1.0);
        let mut v = vec![0.0; 16];
        v[3] = f64::NAN;
        assert!(Field::new(g, v).is_err());
        assert!(Field::new(g, vec![0.0; 15]).is_err());
    }
}
