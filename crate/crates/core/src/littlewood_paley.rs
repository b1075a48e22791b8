//! Frequency-side Littlewood-Paley toolkit: the plateau profile `eta`, the
//! windows `psi`, `Psi`, `phi`, square functions, the H^1 norm and the
//! reproducing identity `f = sum_j phi_j * phi_j * w_j * f`.
//!
//! Scale `j` lives at frequency `2^{-j}`: `phi_j_hat(xi) = phi_hat(2^j xi)`.

use crate::error::{Error, Result};
use crate::grid::{lp_norm, Field, GridSpec};
use crate::maximal::ball_max;
use crate::spectral::{forward_transform, frequency_map, inverse_transform, SpectralField};

fn glue(s: f64) -> f64 {
    if s > 0.0 {
        (-1.0 / s).exp()
    } else {
        0.0
    }
}

/// Smooth plateau: 1 on `[0, 1]`, 0 on `[2, inf)`, monotone in between.
pub fn eta(t: f64) -> f64 {
    if t <= 1.0 {
        1.0
    } else if t >= 2.0 {
        0.0
    } else {
        let a = glue(2.0 - t);
        a / (a + glue(t - 1.0))
    }
}

/// `psi_hat(t) = eta(|t|)`.
pub fn psi_hat(t: f64) -> f64 {
    eta(t.abs())
}

/// `Psi_hat(t) = eta(|t|) - eta(2|t|)`, supported in `1/2 <= |t| <= 2`.
pub fn big_psi_hat(t: f64) -> f64 {
    let t = t.abs();
    eta(t) - eta(2.0 * t)
}

/// Band window `phi_hat = Psi_hat^{1/3}`, chosen so that
/// `phi_hat^2 * w_hat = Psi_hat` with `w_hat = phi_hat`.
pub fn phi_hat(t: f64) -> f64 {
    big_psi_hat(t).cbrt()
}

/// Dyadic window family on a grid, scales `j_min..=j_max`.
#[derive(Debug, Clone, PartialEq)]
pub struct BumpFamily {
    grid: GridSpec,
    j_min: i32,
    j_max: i32,
}

pub fn build_bump_family(grid: &GridSpec, j_min: i32, j_max: i32) -> Result<BumpFamily> {
    if j_min > j_max {
        return Err(Error::Scales(format!("j_min {j_min} exceeds j_max {j_max}")));
    }
    let top = grid.nyquist() * (grid.dim() as f64).sqrt();
    if 2f64.powi(-j_min - 1) >= top {
        return Err(Error::Scales(format!("scale {j_min} lies above the grid frequencies")));
    }
    if 2f64.powi(1 - j_max) <= 1.0 / grid.box_length() {
        return Err(Error::Scales(format!("scale {j_max} lies below the lowest nonzero frequency")));
    }
    Ok(BumpFamily { grid: *grid, j_min, j_max })
}

impl BumpFamily {
    /// Family whose resolved region `[2^{-j_max}, 2^{-j_min}]` contains every
    /// nonzero grid frequency.
    pub fn covering(grid: &GridSpec) -> Self {
        let top = grid.nyquist() * (grid.dim() as f64).sqrt();
        let j_min = (-top.log2()).floor() as i32;
        let j_max = grid.box_length().log2().ceil() as i32;
        BumpFamily { grid: *grid, j_min, j_max }
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn j_min(&self) -> i32 {
        self.j_min
    }

    pub fn j_max(&self) -> i32 {
        self.j_max
    }

    pub fn scales(&self) -> std::ops::RangeInclusive<i32> {
        self.j_min..=self.j_max
    }

    /// Frequencies `|xi|` where the reproducing identity holds exactly.
    pub fn resolved_region(&self) -> (f64, f64) {
        (2f64.powi(-self.j_max), 2f64.powi(-self.j_min))
    }

    /// `sum_j phi_hat(2^j r)^2 w_hat(2^j r) = eta(2^{j_min} r) - eta(2^{j_max + 1} r)`.
    pub fn partition_sum(&self, r: f64) -> f64 {
        self.scales().map(|j| big_psi_hat(2f64.powi(j) * r)).sum()
    }

    /// `phi_hat(2^j |xi|)` on the grid.
    pub fn phi_multiplier(&self, j: i32) -> Vec<f64> {
        let s = 2f64.powi(j);
        frequency_map(&self.grid, |xi| phi_hat(s * norm(xi)))
    }

    fn check(&self, f: &Field) -> Result<()> {
        if f.grid() != &self.grid {
            return Err(Error::GridMismatch);
        }
        Ok(())
    }

    /// `phi_j * f` for every scale.
    pub fn filtered(&self, f: &Field) -> Result<Vec<(i32, Field)>> {
        self.check(f)?;
        let spectrum = forward_transform(f);
        Ok(self.scales().map(|j| (j, inverse_transform(&spectrum.multiply(&self.phi_multiplier(j))))).collect())
    }
}

fn norm(xi: &[f64]) -> f64 {
    xi.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// `psi_hat(t) + sum_{j=1}^{J} Psi_hat(2^{-j} t)`, which telescopes to `eta(2^{-J} |t|)`.
pub fn telescoped_partition(levels: i32, t: f64) -> f64 {
    psi_hat(t) + (1..=levels).map(|j| big_psi_hat(2f64.powi(-j) * t)).sum::<f64>()
}

/// `S(f) = (sum_j |phi_j * f|^2)^{1/2}`.
pub fn square_function(f: &Field, fam: &BumpFamily) -> Result<Field> {
    let mut acc = vec![0.0; f.grid().len()];
    for (_, band) in fam.filtered(f)? {
        for (a, v) in acc.iter_mut().zip(band.values()) {
            *a += v * v;
        }
    }
    Ok(Field::from_parts(*f.grid(), acc.into_iter().map(f64::sqrt).collect()))
}

/// Peetre maximal square function
/// `S_max(f) = (sum_j sup_{|x - y| < 2^j} |phi_j * f(y)|^2)^{1/2}`, with the ball
/// radius floored at one cell.
pub fn peetre_square_function(f: &Field, fam: &BumpFamily) -> Result<Field> {
    let h = f.grid().spacing();
    let mut acc = vec![0.0; f.grid().len()];
    for (j, band) in fam.filtered(f)? {
        let radius = (2f64.powi(j) / h).max(1.0);
        let m = ball_max(&band.abs(), radius);
        for (a, v) in acc.iter_mut().zip(m.values()) {
            *a += v * v;
        }
    }
    Ok(Field::from_parts(*f.grid(), acc.into_iter().map(f64::sqrt).collect()))
}

/// `||f||_{H^1} = ||S_max(f)||_{L^1}`.
pub fn h1_norm(f: &Field, fam: &BumpFamily) -> Result<f64> {
    Ok(peetre_square_function(f, fam)?.integral())
}

/// Field reproduced by `sum_j phi_j * phi_j * w_j * f`.
pub fn reproduce(f: &Field, fam: &BumpFamily) -> Result<Field> {
    fam.check(f)?;
    let m = frequency_map(&fam.grid, |xi| fam.partition_sum(norm(xi)));
    Ok(inverse_transform(&forward_transform(f).multiply(&m)))
}

/// `||f - sum_j phi_j * phi_j * w_j * f||_2 / ||f||_2`, zero for the zero field.
pub fn reproducing_residual(f: &Field, fam: &BumpFamily) -> Result<f64> {
    let norm_f = lp_norm(f, 2.0)?;
    if norm_f == 0.0 {
        return Ok(0.0);
    }
    let back = reproduce(f, fam)?;
    Ok(lp_norm(&f.sub(&back)?, 2.0)? / norm_f)
}

/// Spectrum restricted to the frequencies where `keep` holds.
pub fn restrict_spectrum(spectrum: &SpectralField, keep: impl Fn(&[f64]) -> bool) -> SpectralField {
    let mask = frequency_map(spectrum.grid(), |xi| if keep(xi) { 1.0 } else { 0.0 });
    spectrum.multiply(&mask)
}
