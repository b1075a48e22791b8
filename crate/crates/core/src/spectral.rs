//! Discrete Fourier analysis on the periodic grid and the annular averaging
//! operator `f *_delta sigma_k`.
//!
//! Conventions: `F(xi) = h^d sum_x f(x) e^{-2 pi i x.xi}` at the lattice
//! frequencies `m / L`, and `f(x) = L^{-d} sum_xi F(xi) e^{2 pi i x.xi}`, so the
//! continuous Fourier transform is approximated and Parseval reads
//! `sum |f|^2 h^d = L^{-d} sum |F|^2`.

use std::cell::RefCell;
use std::collections::HashMap;
use std::sync::{Arc, Mutex};

use num_complex::Complex64;
use rustfft::FftPlanner;

use crate::annulus::{annulus_measure, rasterize_annulus_with, AnnulusSpec};
use crate::error::{Error, Result};
use crate::grid::{Field, GridSpec};
use crate::special::annulus_fourier;

thread_local! {
    static PLANNER: RefCell<FftPlanner<f64>> = RefCell::new(FftPlanner::new());
}

/// Fourier coefficients on a grid. Storage follows the field layout; along each
/// axis index `i` carries the centred frequency `GridSpec::frequency(i)`.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralField {
    grid: GridSpec,
    coeffs: Vec<Complex64>,
}

impl SpectralField {
    pub fn new(grid: GridSpec, coeffs: Vec<Complex64>) -> Result<Self> {
        if coeffs.len() != grid.len() {
            return Err(Error::GridMismatch);
        }
        Ok(Self { grid, coeffs })
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn coeffs_mut(&mut self) -> &mut [Complex64] {
        &mut self.coeffs
    }

    /// `(L^{-d} sum |F|^2)^{1/2}`, equal to the L^2 norm of the field.
    pub fn l2_norm(&self) -> f64 {
        let s: f64 = self.coeffs.iter().map(|c| c.norm_sqr()).sum();
        (s / self.grid.box_volume()).sqrt()
    }

    /// Pointwise product with a real multiplier laid out like the coefficients.
    pub fn multiply(&self, multiplier: &[f64]) -> SpectralField {
        let coeffs = self.coeffs.iter().zip(multiplier).map(|(c, m)| c * m).collect();
        SpectralField { grid: self.grid, coeffs }
    }
}

fn transform_in_place(grid: &GridSpec, data: &mut [Complex64], inverse: bool) {
    let n = grid.n();
    let fft = PLANNER.with(|p| {
        let mut p = p.borrow_mut();
        if inverse {
            p.plan_fft_inverse(n)
        } else {
            p.plan_fft_forward(n)
        }
    });
    let mut scratch = vec![Complex64::default(); fft.get_inplace_scratch_len()];
    for axis in 0..grid.dim() {
        let stride = grid.stride(axis);
        if stride == 1 {
            fft.process_with_scratch(data, &mut scratch);
            continue;
        }
        let block = n * stride;
        let mut lines = vec![Complex64::default(); block];
        for chunk in data.chunks_mut(block) {
            for i in 0..n {
                for t in 0..stride {
                    lines[t * n + i] = chunk[i * stride + t];
                }
            }
            fft.process_with_scratch(&mut lines, &mut scratch);
            for i in 0..n {
                for t in 0..stride {
                    chunk[i * stride + t] = lines[t * n + i];
                }
            }
        }
    }
}

pub fn forward_transform(f: &Field) -> SpectralField {
    let grid = *f.grid();
    let h_d = grid.cell_volume();
    let mut coeffs: Vec<Complex64> = f.values().iter().map(|&v| Complex64::new(v, 0.0)).collect();
    transform_in_place(&grid, &mut coeffs, false);
    for c in coeffs.iter_mut() {
        *c *= h_d;
    }
    SpectralField { grid, coeffs }
}

/// Real part of the inverse transform.
pub fn inverse_transform(spectrum: &SpectralField) -> Field {
    let grid = spectrum.grid;
    let mut data = spectrum.coeffs.clone();
    transform_in_place(&grid, &mut data, true);
    let scale = 1.0 / grid.box_volume();
    Field::from_parts(grid, data.iter().map(|c| c.re * scale).collect())
}

/// `(f * g)(x) = h^d sum_y f(y) g(x - y)` via the convolution theorem.
pub fn fft_convolve(f: &Field, g: &Field) -> Result<Field> {
    if f.grid() != g.grid() {
        return Err(Error::GridMismatch);
    }
    let mut a = forward_transform(f);
    let b = forward_transform(g);
    for (x, y) in a.coeffs.iter_mut().zip(&b.coeffs) {
        *x *= y;
    }
    Ok(inverse_transform(&a))
}

/// Evaluates `m` at every lattice frequency vector, in coefficient layout.
pub fn frequency_map(grid: &GridSpec, mut m: impl FnMut(&[f64]) -> f64) -> Vec<f64> {
    let d = grid.dim();
    let mut idx = vec![0usize; d];
    let mut xi = vec![0.0; d];
    (0..grid.len())
        .map(|flat| {
            grid.unravel(flat, &mut idx);
            for (x, &i) in xi.iter_mut().zip(&idx) {
                *x = grid.frequency(i);
            }
            m(&xi)
        })
        .collect()
}

/// How the averaging kernel of an annulus is realised on the grid.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum KernelMode {
    /// Rasterised indicator with `samples_per_axis^d` sub-samples per boundary
    /// cell (1 is the cell-centre rule). Requires the annulus to fit and be resolved.
    Raster { samples_per_axis: u32 },
    /// Exact continuum multiplier `chi_hat(|2^k xi|) / |C^delta|` sampled at the
    /// lattice frequencies. Acts exactly on trigonometric polynomials.
    Analytic,
}

impl Default for KernelMode {
    fn default() -> Self {
        KernelMode::Raster { samples_per_axis: 1 }
    }
}

type CacheKey = (u64, Vec<i32>, KernelMode);

/// Annular averaging on a fixed grid with a per-run cache of kernel multipliers.
///
/// The cache is internally synchronised so one averager can be shared by
/// parallel trials.
#[derive(Debug)]
pub struct Averager {
    grid: GridSpec,
    mode: KernelMode,
    cache: Mutex<HashMap<CacheKey, Arc<Vec<f64>>>>,
    capacity: usize,
}

impl Averager {
    pub fn new(grid: GridSpec, mode: KernelMode) -> Self {
        Self::with_capacity(grid, mode, 64)
    }

    /// Averager caching at most `capacity` multipliers; later ones are rebuilt on demand.
    pub fn with_capacity(grid: GridSpec, mode: KernelMode, capacity: usize) -> Self {
        Self { grid, mode, cache: Mutex::new(HashMap::new()), capacity }
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn mode(&self) -> KernelMode {
        self.mode
    }

    /// Checks that `spec` can be realised on this grid in this mode.
    pub fn validate(&self, spec: &AnnulusSpec) -> Result<()> {
        if spec.dim() != self.grid.dim() {
            return Err(Error::DilationLength { expected: self.grid.dim(), got: spec.dim() });
        }
        if let KernelMode::Raster { samples_per_axis } = self.mode {
            spec.check_fits(&self.grid)?;
            spec.check_resolved(&self.grid, samples_per_axis.max(1))?;
        }
        Ok(())
    }

    /// Real Fourier multiplier of the averaging kernel for `spec`.
    pub fn multiplier(&self, spec: &AnnulusSpec) -> Result<Arc<Vec<f64>>> {
        let key = (spec.delta().to_bits(), spec.kvec().to_vec(), self.mode);
        if let Some(m) = self.cache.lock().unwrap().get(&key) {
            return Ok(Arc::clone(m));
        }
        let m = Arc::new(self.build_multiplier(spec)?);
        let mut cache = self.cache.lock().unwrap();
        if cache.len() < self.capacity {
            cache.insert(key, Arc::clone(&m));
        }
        Ok(m)
    }

    fn build_multiplier(&self, spec: &AnnulusSpec) -> Result<Vec<f64>> {
        self.validate(spec)?;
        match self.mode {
            KernelMode::Raster { samples_per_axis } => {
                let kernel = rasterize_annulus_with(&self.grid, spec, samples_per_axis)?;
                // The kernel is reflection symmetric, so its transform is real.
                Ok(forward_transform(&kernel).coeffs.iter().map(|c| c.re).collect())
            }
            KernelMode::Analytic => {
                let d = spec.dim();
                let measure = annulus_measure(d, spec.delta())?;
                let scale: Vec<f64> = spec.kvec().iter().map(|&k| 2f64.powi(k)).collect();
                let mut err = None;
                let m = frequency_map(&self.grid, |xi| {
                    let rho = xi.iter().zip(&scale).map(|(x, s)| (x * s).powi(2)).sum::<f64>().sqrt();
                    match annulus_fourier(d, spec.delta(), rho) {
                        Ok(v) => v / measure,
                        Err(e) => {
                            err.get_or_insert(e);
                            0.0
                        }
                    }
                });
                match err {
                    Some(e) => Err(e),
                    None => Ok(m),
                }
            }
        }
    }

    pub fn average(&self, f: &Field, spec: &AnnulusSpec) -> Result<Field> {
        if f.grid() != &self.grid {
            return Err(Error::GridMismatch);
        }
        self.average_spectrum(&forward_transform(f), spec)
    }

    /// Averages a field given by its spectrum, so one transform serves many dilations.
    pub fn average_spectrum(&self, spectrum: &SpectralField, spec: &AnnulusSpec) -> Result<Field> {
        if spectrum.grid() != &self.grid {
            return Err(Error::GridMismatch);
        }
        let m = self.multiplier(spec)?;
        Ok(inverse_transform(&spectrum.multiply(&m)))
    }
}

/// `f *_delta sigma_k` with the cell-centre rasterised kernel.
pub fn delta_convolve(f: &Field, spec: &AnnulusSpec) -> Result<Field> {
    let kernel = rasterize_annulus_with(f.grid(), spec, 1)?;
    fft_convolve(f, &kernel)
}
