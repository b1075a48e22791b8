//! Annuli `C^delta(0,1)` under (possibly anisotropic) dyadic dilation, their
//! volumes, rasterised averaging kernels, and sum-set volume diagnostics.

use crate::error::{Error, Result};
use crate::grid::{Field, GridSpec};
use crate::special::unit_ball_volume;

/// The annulus `1 - delta < |(2^{-k_1} y_1, ..., 2^{-k_d} y_d)| < 1 + delta`.
#[derive(Debug, Clone, PartialEq)]
pub struct AnnulusSpec {
    d: usize,
    delta: f64,
    kvec: Vec<i32>,
}

impl AnnulusSpec {
    pub fn new(d: usize, delta: f64, kvec: Vec<i32>) -> Result<Self> {
        if d == 0 || d > crate::grid::MAX_DIM {
            return Err(Error::Dimension(d));
        }
        if !(delta > 0.0 && delta < 0.5) {
            return Err(Error::Delta(delta));
        }
        if kvec.len() != d {
            return Err(Error::DilationLength { expected: d, got: kvec.len() });
        }
        Ok(Self { d, delta, kvec })
    }

    pub fn isotropic(d: usize, delta: f64, k: i32) -> Result<Self> {
        Self::new(d, delta, vec![k; d])
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn kvec(&self) -> &[i32] {
        &self.kvec
    }

    pub fn is_isotropic(&self) -> bool {
        self.kvec.iter().all(|&k| k == self.kvec[0])
    }

    /// Largest extent of the dilated annulus along any axis.
    pub fn diameter(&self) -> f64 {
        let kmax = *self.kvec.iter().max().unwrap();
        2.0 * 2f64.powi(kmax) * (1.0 + self.delta)
    }

    /// Thinnest shell thickness over all axes, `2 delta 2^{min k}`.
    pub fn min_thickness(&self) -> f64 {
        let kmin = *self.kvec.iter().min().unwrap();
        2.0 * self.delta * 2f64.powi(kmin)
    }

    /// The periodic box must leave a margin of at least one diameter.
    pub fn check_fits(&self, grid: &GridSpec) -> Result<()> {
        if grid.dim() != self.d {
            return Err(Error::DilationLength { expected: grid.dim(), got: self.d });
        }
        let diameter = self.diameter();
        if 2.0 * diameter > grid.box_length() {
            return Err(Error::AnnulusTooLarge { diameter, box_length: grid.box_length() });
        }
        Ok(())
    }

    /// Sample spacing `h / s` must not exceed a quarter of `delta 2^{min k}`.
    pub fn check_resolved(&self, grid: &GridSpec, samples_per_axis: u32) -> Result<()> {
        let spacing = grid.spacing() / samples_per_axis as f64;
        let kmin = *self.kvec.iter().min().unwrap();
        if spacing > self.delta * 2f64.powi(kmin) / 4.0 {
            return Err(Error::UnderResolved { thickness: self.min_thickness(), spacing });
        }
        Ok(())
    }
}

/// `|C^delta(0,1)| = omega_d ((1+delta)^d - (1-delta)^d)`.
pub fn annulus_measure(d: usize, delta: f64) -> Result<f64> {
    if !(2..=crate::grid::MAX_DIM).contains(&d) {
        return Err(Error::Dimension(d));
    }
    if !(delta > 0.0 && delta < 0.5) {
        return Err(Error::Delta(delta));
    }
    let di = d as i32;
    Ok(unit_ball_volume(d) * ((1.0 + delta).powi(di) - (1.0 - delta).powi(di)))
}

/// Unit-mass averaging kernel for `spec` by cell-centre membership.
pub fn rasterize_annulus(grid: &GridSpec, spec: &AnnulusSpec) -> Result<Field> {
    rasterize_annulus_with(grid, spec, 1)
}

/// Unit-mass averaging kernel where each cell is weighted by the fraction of an
/// `s^d` lattice of sub-samples inside the annulus. `s = 1` is the cell-centre rule.
pub fn rasterize_annulus_with(
    grid: &GridSpec,
    spec: &AnnulusSpec,
    samples_per_axis: u32,
) -> Result<Field> {
    let weights = annulus_coverage(grid, spec, samples_per_axis)?;
    let mass = weights.integral();
    if mass <= 0.0 {
        return Err(Error::UnderResolved { thickness: spec.min_thickness(), spacing: grid.spacing() });
    }
    Ok(weights.scale(1.0 / mass))
}

/// Fraction of each cell covered by the annulus, estimated on an `s^d` lattice
/// of sub-samples. Cells whose box lies entirely inside or outside the shell are
/// classified without sub-sampling.
pub fn annulus_coverage(grid: &GridSpec, spec: &AnnulusSpec, samples_per_axis: u32) -> Result<Field> {
    spec.check_fits(grid)?;
    let s = samples_per_axis.max(1);
    spec.check_resolved(grid, s)?;
    let d = spec.d;
    let h = grid.spacing();
    let inv_scale: Vec<f64> = spec.kvec.iter().map(|&k| 2f64.powi(-k)).collect();
    let half: Vec<f64> = inv_scale.iter().map(|c| 0.5 * h * c).collect();
    let (r_in, r_out) = (1.0 - spec.delta, 1.0 + spec.delta);
    let (r_in2, r_out2) = (r_in * r_in, r_out * r_out);
    let offsets: Vec<f64> =
        (0..s).map(|m| ((m as f64 + 0.5) / s as f64 - 0.5) * h).collect();
    let total_sub = (s as usize).pow(d as u32);
    let mut sub = vec![0usize; d];

    let weights = Field::from_fn(*grid, |x| {
        let (mut near2, mut far2) = (0.0, 0.0);
        for a in 0..d {
            let u = (x[a] * inv_scale[a]).abs();
            let lo = (u - half[a]).max(0.0);
            near2 += lo * lo;
            far2 += (u + half[a]) * (u + half[a]);
        }
        if far2 <= r_in2 || near2 >= r_out2 {
            return 0.0;
        }
        if near2 > r_in2 && far2 < r_out2 {
            return 1.0;
        }
        let mut inside = 0usize;
        for flat in 0..total_sub {
            let mut rem = flat;
            for slot in sub.iter_mut() {
                *slot = rem % s as usize;
                rem /= s as usize;
            }
            let r2: f64 = (0..d)
                .map(|a| {
                    let u = (x[a] + offsets[sub[a]]) * inv_scale[a];
                    u * u
                })
                .sum();
            if r2 > r_in2 && r2 < r_out2 {
                inside += 1;
            }
        }
        inside as f64 / total_sub as f64
    });
    Ok(weights)
}

/// Simplified bound `2^{kd} (delta + 2^{l - k})` for the volume of the sum set
/// of an enlarged cube of level `l` and the `2^k delta` neighbourhood of the
/// sphere of radius `2^k`.
pub fn sumset_volume_bound(level: i32, k: i32, delta: f64, d: usize) -> f64 {
    2f64.powi(k * d as i32) * (delta + 2f64.powi(level - k))
}

/// Measured volume of `W* + {y : | |y| - 2^k | < 2^k delta}` where `W*` is the
/// cube of side `enlargement * 2^level` centred at the origin, by counting cells
/// of side `h` (one orthant, by symmetry).
pub fn measure_sumset_volume(level: i32, k: i32, delta: f64, d: usize, enlargement: f64, h: f64) -> f64 {
    let a = 0.5 * enlargement * 2f64.powi(level);
    let r = 2f64.powi(k);
    let (r1, r2) = (r * (1.0 - delta), r * (1.0 + delta));
    let extent = a + r2;
    let m = (extent / h).ceil() as usize;
    let mut idx = vec![0usize; d];
    let total = m.pow(d as u32);
    let mut count = 0u64;
    for flat in 0..total {
        let mut rem = flat;
        for slot in idx.iter_mut() {
            *slot = rem % m;
            rem /= m;
        }
        let (mut near2, mut far2) = (0.0, 0.0);
        for &i in &idx {
            let x = (i as f64 + 0.5) * h;
            let lo = (x - a).max(0.0);
            near2 += lo * lo;
            far2 += (x + a) * (x + a);
        }
        if near2 < r2 * r2 && far2 > r1 * r1 {
            count += 1;
        }
    }
    count as f64 * h.powi(d as i32) * 2f64.powi(d as i32)
}
