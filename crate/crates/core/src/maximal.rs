//! Maximal operators: lacunary and strong annular maxima, the dyadic
//! Hardy-Littlewood and strong (rectangle) maximal functions, the frequency-band
//! pieces `A_j^k` and their maxima, and periodic ball maxima.

use rayon::prelude::*;

use crate::annulus::AnnulusSpec;
use crate::error::{Error, Result};
use crate::grid::{Field, GridSpec};
use crate::littlewood_paley::{big_psi_hat, psi_hat};
use crate::spectral::{forward_transform, inverse_transform, Averager, KernelMode, SpectralField};

/// Truncated index set for the supremum over dilations.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum DilationRange {
    /// `k` in `[kmin, kmax]`, applied on every axis.
    Isotropic { kmin: i32, kmax: i32 },
    /// `k_i` in `[lo_i, hi_i]` independently per axis.
    Box { lo: Vec<i32>, hi: Vec<i32> },
}

impl DilationRange {
    pub fn isotropic(kmin: i32, kmax: i32) -> Result<Self> {
        if kmin > kmax {
            return Err(Error::EmptyRange);
        }
        Ok(DilationRange::Isotropic { kmin, kmax })
    }

    pub fn anisotropic(lo: Vec<i32>, hi: Vec<i32>) -> Result<Self> {
        if lo.len() != hi.len() {
            return Err(Error::DilationLength { expected: lo.len(), got: hi.len() });
        }
        if lo.is_empty() || lo.iter().zip(&hi).any(|(a, b)| a > b) {
            return Err(Error::EmptyRange);
        }
        Ok(DilationRange::Box { lo, hi })
    }

    /// All dilation vectors in the range, for dimension `d`.
    pub fn dilations(&self, d: usize) -> Result<Vec<Vec<i32>>> {
        match self {
            DilationRange::Isotropic { kmin, kmax } => Ok((*kmin..=*kmax).map(|k| vec![k; d]).collect()),
            DilationRange::Box { lo, hi } => {
                if lo.len() != d {
                    return Err(Error::DilationLength { expected: d, got: lo.len() });
                }
                let mut out = vec![lo.clone()];
                for axis in 0..d {
                    out = out
                        .into_iter()
                        .flat_map(|v| {
                            (lo[axis]..=hi[axis]).map(move |k| {
                                let mut w = v.clone();
                                w[axis] = k;
                                w
                            })
                        })
                        .collect();
                }
                Ok(out)
            }
        }
    }
}

fn pointwise_max(mut a: Vec<f64>, b: Vec<f64>) -> Vec<f64> {
    for (x, y) in a.iter_mut().zip(b) {
        if y > *x {
            *x = y;
        }
    }
    a
}

/// Pointwise `sup_k |op(k)|` over dilations, evaluated in parallel.
fn sup_over<F>(grid: &GridSpec, dilations: &[Vec<i32>], op: F) -> Result<Field>
where
    F: Fn(&[i32]) -> Result<Option<Field>> + Sync,
{
    if dilations.is_empty() {
        return Err(Error::EmptyRange);
    }
    let values = dilations
        .par_iter()
        .map(|k| op(k).map(|f| f.map(|f| f.abs().into_values())))
        .try_fold(
            || vec![0.0; grid.len()],
            |acc, next| next.map(|v| match v {
                Some(v) => pointwise_max(acc, v),
                None => acc,
            }),
        )
        .try_reduce(|| vec![0.0; grid.len()], |a, b| Ok(pointwise_max(a, b)))?;
    Ok(Field::from_parts(*grid, values))
}

/// `M_lac^delta f` with the cell-centre rasterised kernel.
pub fn lacunary_max(f: &Field, delta: f64, range: &DilationRange) -> Result<Field> {
    lacunary_max_with(&Averager::new(*f.grid(), KernelMode::default()), f, delta, range)
}

pub fn lacunary_max_with(avg: &Averager, f: &Field, delta: f64, range: &DilationRange) -> Result<Field> {
    if !matches!(range, DilationRange::Isotropic { .. }) {
        return Err(Error::Config("lacunary maximal function needs an isotropic range".into()));
    }
    annular_max(avg, f, delta, range)
}

/// Strong lacunary maximal function `M^delta f` over an anisotropic range.
pub fn strong_max(f: &Field, delta: f64, range: &DilationRange) -> Result<Field> {
    strong_max_with(&Averager::new(*f.grid(), KernelMode::default()), f, delta, range)
}

pub fn strong_max_with(avg: &Averager, f: &Field, delta: f64, range: &DilationRange) -> Result<Field> {
    annular_max(avg, f, delta, range)
}

fn annular_max(avg: &Averager, f: &Field, delta: f64, range: &DilationRange) -> Result<Field> {
    let grid = *f.grid();
    if avg.grid() != &grid {
        return Err(Error::GridMismatch);
    }
    let d = grid.dim();
    let dilations = range.dilations(d)?;
    let specs = dilations
        .iter()
        .map(|k| AnnulusSpec::new(d, delta, k.clone()))
        .collect::<Result<Vec<_>>>()?;
    for s in &specs {
        avg.validate(s)?;
    }
    let spectrum = forward_transform(f);
    sup_over(&grid, &dilations, |k| {
        let spec = AnnulusSpec::new(d, delta, k.to_vec())?;
        avg.average_spectrum(&spectrum, &spec).map(Some)
    })
}

/// Axis factor of the band multiplier: `psi_hat(2^k xi)` for `j = 0`, else
/// `Psi_hat(2^{k-j} xi)`.
fn band_factor(j: i32, k: i32, xi: f64) -> f64 {
    if j == 0 {
        psi_hat(2f64.powi(k) * xi)
    } else {
        big_psi_hat(2f64.powi(k - j) * xi)
    }
}

/// Band multiplier `prod_i factor(j_i, k_i, xi_i)` on the grid, or an error when
/// some axis band lies entirely above the Nyquist frequency.
pub fn band_multiplier(grid: &GridSpec, jvec: &[i32], kvec: &[i32]) -> Result<Vec<f64>> {
    let d = grid.dim();
    if jvec.len() != d || kvec.len() != d {
        return Err(Error::DilationLength { expected: d, got: jvec.len().min(kvec.len()) });
    }
    if jvec.iter().any(|&j| j < 0) {
        return Err(Error::Config("band index must be nonnegative".into()));
    }
    for (&j, &k) in jvec.iter().zip(kvec) {
        if j > 0 && 2f64.powi(j - k - 1) >= grid.nyquist() {
            let band: Vec<i32> = kvec.iter().zip(jvec).map(|(k, j)| k - j).collect();
            return Err(Error::BandOutOfRange(band));
        }
    }
    let n = grid.n();
    let axis: Vec<Vec<f64>> = (0..d)
        .map(|a| (0..n).map(|i| band_factor(jvec[a], kvec[a], grid.frequency(i))).collect())
        .collect();
    let mut idx = vec![0usize; d];
    Ok((0..grid.len())
        .map(|flat| {
            grid.unravel(flat, &mut idx);
            idx.iter().enumerate().map(|(a, &i)| axis[a][i]).product()
        })
        .collect())
}

/// `A_j^k f = f * Psi_{k-j} *_delta sigma_k` (with `psi_k` on axes where `j_i = 0`).
pub fn band_operator(avg: &Averager, f: &Field, jvec: &[i32], kvec: &[i32], delta: f64) -> Result<Field> {
    if avg.grid() != f.grid() {
        return Err(Error::GridMismatch);
    }
    band_apply(avg, &forward_transform(f), jvec, kvec, delta)
}

fn band_apply(avg: &Averager, spectrum: &SpectralField, jvec: &[i32], kvec: &[i32], delta: f64) -> Result<Field> {
    let grid = *spectrum.grid();
    let band = band_multiplier(&grid, jvec, kvec)?;
    let spec = AnnulusSpec::new(grid.dim(), delta, kvec.to_vec())?;
    let sigma = avg.multiplier(&spec)?;
    let m: Vec<f64> = band.iter().zip(sigma.iter()).map(|(a, b)| a * b).collect();
    Ok(inverse_transform(&spectrum.multiply(&m)))
}

/// `M_j f = sup_k |A_j^k f|` over the range. Dilations whose band misses every
/// grid frequency carrying energy of `f` contribute exactly zero and are skipped.
pub fn band_max(avg: &Averager, f: &Field, jvec: &[i32], delta: f64, range: &DilationRange) -> Result<Field> {
    let grid = *f.grid();
    if avg.grid() != &grid {
        return Err(Error::GridMismatch);
    }
    let dilations = range.dilations(grid.dim())?;
    let spectrum = forward_transform(f);
    sup_over(&grid, &dilations, |k| {
        let band = match band_multiplier(&grid, jvec, k) {
            Ok(b) => b,
            Err(Error::BandOutOfRange(_)) => return Ok(None),
            Err(e) => return Err(e),
        };
        let live = band.iter().zip(spectrum.coeffs()).any(|(b, c)| *b != 0.0 && c.norm_sqr() > 0.0);
        if !live {
            return Ok(None);
        }
        band_apply(avg, &spectrum, jvec, k, delta).map(Some)
    })
}

/// Applies `op` to every periodic line of `src` along `axis`.
pub(crate) fn map_lines(grid: &GridSpec, src: &[f64], axis: usize, mut op: impl FnMut(&[f64], &mut [f64])) -> Vec<f64> {
    let n = grid.n();
    let stride = grid.stride(axis);
    let block = n * stride;
    let mut out = vec![0.0; src.len()];
    let (mut line, mut res) = (vec![0.0; n], vec![0.0; n]);
    for start in (0..src.len()).step_by(block) {
        for t in 0..stride {
            let base = start + t;
            for i in 0..n {
                line[i] = src[base + i * stride];
            }
            op(&line, &mut res);
            for i in 0..n {
                out[base + i * stride] = res[i];
            }
        }
    }
    out
}

/// `out[i] = sum_{o = lo}^{hi} line[i + o]` on a periodic line, `hi - lo < n`.
pub(crate) fn window_sum(line: &[f64], lo: isize, hi: isize, out: &mut [f64]) {
    let n = line.len() as isize;
    let mut prefix = vec![0.0; 3 * line.len() + 1];
    for m in 0..3 * line.len() {
        prefix[m + 1] = prefix[m] + line[m % line.len()];
    }
    for (i, o) in out.iter_mut().enumerate() {
        let i = i as isize + n;
        *o = prefix[(i + hi + 1) as usize] - prefix[(i + lo) as usize];
    }
}

/// `out[i] = max_{|o| <= w} line[i + o]` on a periodic line (van Herk / Gil-Werman).
fn window_max(line: &[f64], w: usize, out: &mut [f64]) {
    let n = line.len();
    let m = 2 * w + 1;
    if m >= n {
        let top = line.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        out.iter_mut().for_each(|o| *o = top);
        return;
    }
    let len = n + 2 * w;
    let ext: Vec<f64> = (0..len).map(|k| line[(k + n - w) % n]).collect();
    let mut fwd = ext.clone();
    let mut bwd = ext.clone();
    for k in 1..len {
        if k % m != 0 {
            fwd[k] = fwd[k].max(fwd[k - 1]);
        }
    }
    for k in (0..len - 1).rev() {
        if (k + 1) % m != 0 {
            bwd[k] = bwd[k].max(bwd[k + 1]);
        }
    }
    for (i, o) in out.iter_mut().enumerate() {
        *o = bwd[i].max(fwd[i + m - 1]);
    }
}

/// Mean over the centred window of `2^m` cells (offsets `[-s/2, s/2 - 1]`) on every axis
/// listed in `sides`, where `sides[a]` is the exponent for axis `a`.
fn box_mean(grid: &GridSpec, src: &[f64], sides: &[u32]) -> Vec<f64> {
    let mut cur = src.to_vec();
    for (axis, &m) in sides.iter().enumerate() {
        let s = 1isize << m;
        let (lo, hi) = if s == 1 { (0, 0) } else { (-s / 2, s / 2 - 1) };
        let inv = 1.0 / s as f64;
        cur = map_lines(grid, &cur, axis, |line, out| {
            window_sum(line, lo, hi, out);
            out.iter_mut().for_each(|v| *v *= inv);
        });
    }
    cur
}

fn dyadic_exponents(grid: &GridSpec) -> u32 {
    grid.n().trailing_zeros()
}

/// Dyadic Hardy-Littlewood maximal function: sup over centred cubes of side
/// `2^m` cells (`m = 0..log2 n`) of the mean of `|f|`.
pub fn hl_max(f: &Field) -> Field {
    let grid = *f.grid();
    let abs: Vec<f64> = f.values().iter().map(|v| v.abs()).collect();
    let mut best = abs.clone();
    for m in 1..=dyadic_exponents(&grid) {
        let mean = box_mean(&grid, &abs, &vec![m; grid.dim()]);
        best = pointwise_max(best, mean);
    }
    Field::from_parts(grid, best)
}

/// Dyadic strong maximal function: sup over centred rectangles with
/// independent dyadic side lengths per axis.
pub fn strong_rect_max(f: &Field) -> Field {
    let grid = *f.grid();
    let d = grid.dim();
    let top = dyadic_exponents(&grid);
    let abs: Vec<f64> = f.values().iter().map(|v| v.abs()).collect();

    fn recurse(grid: &GridSpec, cur: &[f64], axis: usize, top: u32, best: &mut Vec<f64>) {
        if axis == grid.dim() {
            for (b, v) in best.iter_mut().zip(cur) {
                if *v > *b {
                    *b = *v;
                }
            }
            return;
        }
        for m in 0..=top {
            let s = 1isize << m;
            let (lo, hi) = if s == 1 { (0, 0) } else { (-s / 2, s / 2 - 1) };
            let inv = 1.0 / s as f64;
            let next = map_lines(grid, cur, axis, |line, out| {
                window_sum(line, lo, hi, out);
                out.iter_mut().for_each(|v| *v *= inv);
            });
            recurse(grid, &next, axis + 1, top, best);
        }
    }

    let mut best = abs.clone();
    if d > 0 {
        recurse(&grid, &abs, 0, top, &mut best);
    }
    Field::from_parts(grid, best)
}

/// `sup_{|o| < radius} v(x + o)` over lattice offsets on the torus, with the
/// radius measured in cells.
pub fn ball_max(f: &Field, radius: f64) -> Field {
    let grid = *f.grid();
    let d = grid.dim();
    let n = grid.n();
    let half = (n / 2) as f64;
    let r2 = radius * radius;
    if d as f64 * half * half < r2 {
        let top = f.max_value();
        return Field::constant(grid, top);
    }
    if r2 <= 1.0 {
        return f.clone();
    }
    // Offsets on the leading d-1 axes range over distinct residues (-n/2, n/2].
    let reach = (radius.ceil() as isize - 1).min(n as isize / 2);
    let lo = (-reach).max(-(n as isize) / 2 + 1);
    let lead = d - 1;
    let span = (reach - lo + 1) as usize;
    let mut groups: std::collections::BTreeMap<usize, Vec<Vec<isize>>> = Default::default();
    let count = span.pow(lead as u32);
    for flat in 0..count {
        let mut rem = flat;
        let mut off = vec![0isize; lead];
        let mut q = 0.0;
        for o in off.iter_mut() {
            *o = lo + (rem % span) as isize;
            rem /= span;
            q += (*o * *o) as f64;
        }
        if q >= r2 {
            continue;
        }
        let mut w = (r2 - q).sqrt().ceil() as usize;
        while w > 0 && (w * w) as f64 + q >= r2 {
            w -= 1;
        }
        while ((w + 1) * (w + 1)) as f64 + q < r2 {
            w += 1;
        }
        groups.entry(w).or_default().push(off);
    }
    let rows = grid.len() / n;
    let mut best = vec![f64::NEG_INFINITY; grid.len()];
    let mut row_idx = vec![0usize; lead];
    for (w, offsets) in groups {
        let m = map_lines(&grid, f.values(), d - 1, |line, out| window_max(line, w, out));
        for off in &offsets {
            for row in 0..rows {
                let mut rem = row;
                for slot in row_idx.iter_mut().rev() {
                    *slot = rem % n;
                    rem /= n;
                }
                let src_row = row_idx
                    .iter()
                    .zip(off)
                    .fold(0, |acc, (&i, &o)| acc * n + (i as isize + o).rem_euclid(n as isize) as usize);
                let (dst, src) = (row * n, src_row * n);
                for t in 0..n {
                    if m[src + t] > best[dst + t] {
                        best[dst + t] = m[src + t];
                    }
                }
            }
        }
    }
    Field::from_parts(grid, best)
}
