//! Bessel functions of integer and half-integer order, and the radial Fourier
//! profiles of the unit sphere and of the annulus `1 - delta < |x| < 1 + delta`.
//!
//! Transforms use the kernel `exp(-2 pi i x . xi)`, so profiles are functions
//! of `rho = |xi|` in cycles per unit length.

use std::f64::consts::PI;

use crate::error::{Error, Result};

/// Order `nu = twice_order / 2`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct BesselOrder {
    twice_order: u32,
}

impl BesselOrder {
    pub const fn from_twice(twice_order: u32) -> Self {
        Self { twice_order }
    }

    pub const fn integer(n: u32) -> Self {
        Self { twice_order: 2 * n }
    }

    pub const fn half_integer(n: u32) -> Self {
        Self { twice_order: 2 * n + 1 }
    }

    pub fn twice(self) -> u32 {
        self.twice_order
    }

    pub fn value(self) -> f64 {
        self.twice_order as f64 / 2.0
    }

    pub fn is_integer(self) -> bool {
        self.twice_order.is_multiple_of(2)
    }
}

/// `Gamma(t/2)` for a positive integer `t`.
pub fn gamma_half(t: u32) -> f64 {
    assert!(t > 0, "Gamma has a pole at 0");
    let (mut x, mut g) = if t.is_multiple_of(2) { (1.0, 1.0) } else { (0.5, PI.sqrt()) };
    let target = t as f64 / 2.0;
    while x < target {
        g *= x;
        x += 1.0;
    }
    g
}

/// Volume of the unit ball in `R^d`.
pub fn unit_ball_volume(d: usize) -> f64 {
    PI.powf(d as f64 / 2.0) / gamma_half(d as u32 + 2)
}

/// Surface measure of the unit sphere in `R^d`.
pub fn sphere_area(d: usize) -> f64 {
    d as f64 * unit_ball_volume(d)
}

const SERIES_LIMIT: f64 = 8.0;
const HANKEL_MIN: f64 = 25.0;

/// `J_nu(x)` for `x >= 0`.
///
/// Small arguments use the ascending series, large ones the Hankel expansion.
/// Between them integer orders use Miller's backward recurrence and
/// half-integer orders the exact trigonometric recurrences.
pub fn bessel_j(order: BesselOrder, x: f64) -> Result<f64> {
    if x.is_nan() || x < 0.0 {
        return Err(Error::NegativeArgument(x));
    }
    Ok(bessel_j_unchecked(order, x))
}

fn bessel_j_unchecked(order: BesselOrder, x: f64) -> f64 {
    let nu = order.value();
    if x == 0.0 {
        return if order.twice() == 0 { 1.0 } else { 0.0 };
    }
    if x <= SERIES_LIMIT {
        return series_scaled(nu, x) * (0.5 * x).powf(nu);
    }
    if x >= HANKEL_MIN.max(nu * nu) {
        return hankel(nu, x);
    }
    if order.is_integer() {
        miller_integer(order.twice() / 2, x)
    } else {
        half_integer_mid(order.twice() / 2, x)
    }
}

/// `J_nu(x) / (x/2)^nu`, finite and continuous at `x = 0`.
pub fn bessel_j_scaled(order: BesselOrder, x: f64) -> Result<f64> {
    if x.is_nan() || x < 0.0 {
        return Err(Error::NegativeArgument(x));
    }
    let nu = order.value();
    if x <= SERIES_LIMIT {
        Ok(series_scaled(nu, x))
    } else {
        Ok(bessel_j_unchecked(order, x) / (0.5 * x).powf(nu))
    }
}

fn series_scaled(nu: f64, x: f64) -> f64 {
    let q = 0.25 * x * x;
    let mut term = 1.0 / gamma_half((2.0 * nu) as u32 + 2);
    let mut sum = term;
    let mut k = 1.0;
    loop {
        term *= -q / (k * (k + nu));
        sum += term;
        if term.abs() <= 1e-17 * sum.abs() && k > 0.5 * x {
            break;
        }
        k += 1.0;
    }
    sum
}

fn hankel(nu: f64, x: f64) -> f64 {
    let mu = 4.0 * nu * nu;
    let inv8x = 1.0 / (8.0 * x);
    let (mut p, mut q) = (0.0, 0.0);
    let mut term: f64 = 1.0;
    let mut prev = f64::INFINITY;
    for k in 0..60 {
        if term.abs() > prev {
            break;
        }
        let signed = match k % 4 {
            0 | 1 => term,
            _ => -term,
        };
        if k % 2 == 0 {
            p += signed;
        } else {
            q += signed;
        }
        if term.abs() < 1e-17 {
            break;
        }
        prev = term.abs();
        let odd = (2 * k + 1) as f64;
        term *= (mu - odd * odd) * inv8x / (k + 1) as f64;
    }
    let chi = x - (0.5 * nu + 0.25) * PI;
    (2.0 / (PI * x)).sqrt() * (p * chi.cos() - q * chi.sin())
}

fn miller_integer(n: u32, x: f64) -> f64 {
    let top = (n as f64).max(x);
    let mut m = (top + 20.0 + (40.0 * top).sqrt()) as u32;
    m += m % 2;
    let (mut jp, mut j) = (0.0, 1e-300);
    let mut result = 0.0;
    let mut norm = 0.0;
    for k in (1..=m).rev() {
        let jm = 2.0 * k as f64 / x * j - jp;
        jp = j;
        j = jm;
        if j.abs() > 1e250 {
            j *= 1e-250;
            jp *= 1e-250;
            result *= 1e-250;
            norm *= 1e-250;
        }
        // `j` now holds the unnormalised J_{k-1}.
        if k - 1 == n {
            result = j;
        }
        if (k - 1) % 2 == 0 && k - 1 > 0 {
            norm += 2.0 * j;
        }
    }
    norm += j;
    result / norm
}

/// `J_{n+1/2}` for `x > SERIES_LIMIT`.
fn half_integer_mid(n: u32, x: f64) -> f64 {
    let amp = (2.0 / (PI * x)).sqrt();
    let (s, c) = x.sin_cos();
    if (n as f64) <= x {
        let (mut lo, mut hi) = (amp * c, amp * s);
        for k in 0..n {
            let nu = k as f64 + 0.5;
            let next = 2.0 * nu / x * hi - lo;
            lo = hi;
            hi = next;
        }
        return hi;
    }
    let mut m = (n as f64 + 20.0 + (40.0 * n as f64).sqrt()) as u32;
    m = m.max(n + 2);
    let (mut jp, mut j) = (0.0, 1e-300);
    let mut result = 0.0;
    for k in (1..=m).rev() {
        // j holds J_{k+1/2}; step to J_{k-1/2}.
        let nu = k as f64 + 0.5;
        let jm = 2.0 * nu / x * j - jp;
        jp = j;
        j = jm;
        if j.abs() > 1e250 {
            j *= 1e-250;
            jp *= 1e-250;
            result *= 1e-250;
        }
        if k - 1 == n {
            result = j;
        }
    }
    // j = J_{1/2}, jp = J_{3/2} unnormalised; J_{-1/2} = J_{1/2}/x - J_{3/2}.
    let j_minus = j / x - jp;
    let scale = if s.abs() >= c.abs() { amp * s / j } else { amp * c / j_minus };
    result * scale
}

/// Radial profile of the normalised sphere measure, `sigma_hat(xi) / sigma(S^{d-1})`.
pub fn sphere_fourier(d: usize, rho: f64) -> Result<f64> {
    if d < 2 {
        return Err(Error::Dimension(d));
    }
    if rho.is_nan() || rho < 0.0 {
        return Err(Error::NegativeArgument(rho));
    }
    let order = BesselOrder::from_twice(d as u32 - 2);
    Ok(gamma_half(d as u32) * bessel_j_scaled(order, 2.0 * PI * rho)?)
}

/// Fourier transform of the indicator of `1 - delta < |x| < 1 + delta` at `|xi| = rho`.
///
/// Computed as the difference of two ball transforms,
/// `pi^{d/2} [R^d S(2 pi R rho)]` over `R = 1 +- delta`, where `S` is the
/// scaled Bessel function of order `d/2`.
pub fn annulus_fourier(d: usize, delta: f64, rho: f64) -> Result<f64> {
    if d < 2 {
        return Err(Error::Dimension(d));
    }
    if !(delta > 0.0 && delta < 0.5) {
        return Err(Error::Delta(delta));
    }
    if rho.is_nan() || rho < 0.0 {
        return Err(Error::NegativeArgument(rho));
    }
    let order = BesselOrder::from_twice(d as u32);
    let ball = |r: f64| -> Result<f64> {
        Ok(r.powi(d as i32) * bessel_j_scaled(order, 2.0 * PI * r * rho)?)
    };
    Ok(PI.powf(d as f64 / 2.0) * (ball(1.0 + delta)? - ball(1.0 - delta)?))
}
