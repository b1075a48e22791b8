//! Seeded random inputs: band-limited Gaussian fields and mean-zero bumps on
//! random dyadic cubes.
//!
//! Every draw comes from ChaCha8 seeded with the run seed, with the stream id
//! `(class << 32) | trial`, so any single trial can be regenerated alone.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::grid::{lp_norm, Field, GridSpec};
use crate::spectral::{forward_transform, frequency_map, inverse_transform};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum InputClass {
    BandLimited,
    CubeBump,
}

impl InputClass {
    pub fn name(self) -> &'static str {
        match self {
            InputClass::BandLimited => "bandlimited",
            InputClass::CubeBump => "cubebump",
        }
    }

    fn stream(self) -> u64 {
        match self {
            InputClass::BandLimited => 1,
            InputClass::CubeBump => 2,
        }
    }

    pub fn generate(self, grid: &GridSpec, seed: u64, trial: u64) -> Field {
        let mut rng = trial_rng(seed, self, trial);
        match self {
            InputClass::BandLimited => band_limited_field(grid, &mut rng),
            InputClass::CubeBump => cube_bump(grid, &mut rng),
        }
    }
}

pub fn trial_rng(seed: u64, class: InputClass, trial: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream((class.stream() << 32) | trial);
    rng
}

/// Unit-L^2 field with Gaussian Fourier coefficients on `0 < max_i |m_i| <= n/8`.
pub fn band_limited_field(grid: &GridSpec, rng: &mut impl Rng) -> Field {
    let noise: Vec<f64> = (0..grid.len()).map(|_| rng.sample(StandardNormal)).collect();
    let noise = Field::new(*grid, noise).expect("finite samples");
    let cut = grid.n() as f64 / 8.0 / grid.box_length();
    let mask = frequency_map(grid, |xi| {
        let top = xi.iter().fold(0.0f64, |m, x| m.max(x.abs()));
        if top > 0.0 && top <= cut + 1e-12 {
            1.0
        } else {
            0.0
        }
    });
    normalise(inverse_transform(&forward_transform(&noise).multiply(&mask)))
}

/// Unit-L^2 bump `sin(2 pi u_1) prod_{i>1} sin^2(pi u_i)` on a random dyadic cube of
/// side `2^m` cells, `m` in `3..=5` (clipped to half the grid). Mean zero.
pub fn cube_bump(grid: &GridSpec, rng: &mut impl Rng) -> Field {
    let n = grid.n();
    let top = (n.trailing_zeros() - 1).max(1);
    let m = rng.random_range(3..=5u32).min(top);
    let side = 1usize << m;
    let corner: Vec<usize> = (0..grid.dim()).map(|_| rng.random_range(0..n / side) * side).collect();
    let d = grid.dim();
    let mut idx = vec![0usize; d];
    let values = (0..grid.len())
        .map(|flat| {
            grid.unravel(flat, &mut idx);
            let mut v = 1.0;
            for a in 0..d {
                let Some(local) = idx[a].checked_sub(corner[a]).filter(|&l| l < side) else {
                    return 0.0;
                };
                let u = (local as f64 + 0.5) / side as f64;
                v *= if a == 0 {
                    (2.0 * std::f64::consts::PI * u).sin()
                } else {
                    (std::f64::consts::PI * u).sin().powi(2)
                };
            }
            v
        })
        .collect();
    normalise(Field::new(*grid, values).expect("finite bump"))
}

fn normalise(f: Field) -> Field {
    let norm = lp_norm(&f, 2.0).expect("p = 2");
    if norm == 0.0 {
        f
    } else {
        f.scale(1.0 / norm)
    }
}
