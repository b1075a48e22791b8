//! Measured constants of the almost-orthogonality estimates. Each test prints
//! the constant it measures.

use deltasphere::grid::{lp_norm, Field, GridSpec};
use deltasphere::littlewood_paley::{big_psi_hat, build_bump_family, BumpFamily};
use deltasphere::maximal::hl_max;
use deltasphere::random::InputClass;
use deltasphere::spectral::{forward_transform, frequency_map, inverse_transform, SpectralField};
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

fn grid() -> GridSpec {
    GridSpec::new(2, 128, 128.0).unwrap()
}

fn build_family(g: &GridSpec) -> BumpFamily {
    build_bump_family(g, 0, 6).unwrap()
}

fn radial(g: &GridSpec, m: impl Fn(f64) -> f64) -> Vec<f64> {
    frequency_map(g, |xi| m(xi.iter().map(|x| x * x).sum::<f64>().sqrt()))
}

/// Multiplier of `Psi_k * phi_j`.
fn pair(g: &GridSpec, fam: &BumpFamily, j: i32, k: i32) -> Vec<f64> {
    let s = 2f64.powi(k);
    let psi = radial(g, |r| big_psi_hat(s * r));
    fam.phi_multiplier(j).iter().zip(psi).map(|(a, b)| a * b).collect()
}

fn kernel(g: &GridSpec, m: &[f64]) -> Field {
    let spectrum = SpectralField::new(*g, m.iter().map(|&v| Complex64::new(v, 0.0)).collect()).unwrap();
    inverse_transform(&spectrum)
}

#[test]
fn almost_orthogonality_of_the_windows() {
    let g = grid();
    let fam = build_family(&g);
    let mut c: f64 = 0.0;
    for j in 0..=5 {
        for k in (j - 8).max(0)..=(j + 8).min(5) {
            let norm = lp_norm(&kernel(&g, &pair(&g, &fam, j, k)), 1.0).unwrap();
            let gap = (j - k).abs();
            if gap >= 2 {
                // Windows of scales two apart meet at a single radius where both vanish.
                assert!(norm < 1e-12, "j={j} k={k} norm={norm}");
            }
            c = c.max(norm * 2f64.powi(gap));
        }
    }
    println!("almost orthogonality constant C = {c:.4}");
    assert!(c.is_finite() && c < 10.0);
}

#[test]
fn band_pieces_are_dominated_by_the_maximal_function() {
    let g = grid();
    let fam = build_family(&g);
    let mut c: f64 = 0.0;
    for trial in 0..4 {
        let f = InputClass::CubeBump.generate(&g, 11, trial);
        let hl = hl_max(&f);
        let spectrum = forward_transform(&f);
        for j in 0..=5 {
            for k in (j - 3).max(0)..=(j + 3).min(5) {
                let piece = inverse_transform(&spectrum.multiply(&pair(&g, &fam, j, k)));
                let scale = 2f64.powi((j - k).abs());
                for (v, m) in piece.values().iter().zip(hl.values()) {
                    if *m > 0.0 {
                        c = c.max(v.abs() * scale / m);
                    }
                }
            }
        }
    }
    println!("pointwise domination constant C = {c:.4}");
    assert!(c.is_finite() && c < 100.0);
}

#[test]
fn almost_orthogonal_sum_is_bounded_in_l2() {
    let g = grid();
    let fam = build_family(&g);
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut c: f64 = 0.0;
    for _ in 0..5 {
        let mut total = vec![Complex64::default(); g.len()];
        let mut energy = 0.0;
        for j in fam.scales() {
            let gj = Field::new(g, (0..g.len()).map(|_| StandardNormal.sample(&mut rng)).collect()).unwrap();
            energy += lp_norm(&gj, 2.0).unwrap().powi(2);
            let s = forward_transform(&gj).multiply(&fam.phi_multiplier(j));
            for (t, v) in total.iter_mut().zip(s.coeffs()) {
                *t += v;
            }
        }
        let sum = inverse_transform(&SpectralField::new(g, total).unwrap());
        c = c.max(lp_norm(&sum, 2.0).unwrap() / energy.sqrt());
    }
    println!("almost-orthogonal summation constant C = {c:.4}");
    // At most three windows overlap and each is bounded by one.
    assert!(c <= 3f64.sqrt());
}
