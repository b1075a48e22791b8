//! Acceptance suite: one line per criterion with the measured quantity and the
//! wall time. Exits non-zero if any criterion fails.

use std::collections::BTreeMap;
use std::time::{Duration, Instant};

use deltasphere::annulus::{annulus_measure, rasterize_annulus, AnnulusSpec};
use deltasphere::experiments::{
    band_multiplier_sup, decay_envelopes, run_experiment, three_regime_bound, ExperimentConfig, Param, SweepReport,
    Subcommand,
};
use deltasphere::grid::{direct_convolve, lp_norm, Field, GridSpec};
use deltasphere::special::annulus_fourier;
use deltasphere::spectral::{fft_convolve, forward_transform};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

const SEED: u64 = 20240601;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn ratio(values: &[f64]) -> f64 {
    let hi = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let lo = values.iter().cloned().fold(f64::INFINITY, f64::min);
    hi / lo
}

fn param_text(p: &Param) -> String {
    p.to_string()
}

fn criterion_1() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let mut worst = 0.0f64;
    for n in [8, 16] {
        let g = GridSpec::new(2, n, n as f64 / 2.0).unwrap();
        for _ in 0..50 {
            let mut draw = || Field::new(g, (0..g.len()).map(|_| StandardNormal.sample(&mut rng)).collect()).unwrap();
            let (f, h) = (draw(), draw());
            let exact = direct_convolve(&f, &h).unwrap();
            let err = lp_norm(&fft_convolve(&f, &h).unwrap().sub(&exact).unwrap(), 2.0).unwrap();
            worst = worst.max(err / lp_norm(&exact, 2.0).unwrap());
        }
    }
    outcome(worst <= 1e-9, format!("max relative L2 error {worst:.3e} (tol 1e-9)"))
}

/// Max over lattice frequencies `0 < |xi| <= 16` of the raster-vs-closed-form
/// multiplier error, relative to the zero-frequency value 1.
fn raster_error(n: usize) -> f64 {
    let g = GridSpec::new(2, n, 8.0).unwrap();
    let spec = AnnulusSpec::isotropic(2, 0.25, 0).unwrap();
    let hat = forward_transform(&rasterize_annulus(&g, &spec).unwrap());
    let measure = annulus_measure(2, 0.25).unwrap();
    let mut idx = [0usize; 2];
    let mut worst = 0.0f64;
    for (i, c) in hat.coeffs().iter().enumerate() {
        g.unravel(i, &mut idx);
        let rho = idx.iter().map(|&k| g.frequency(k).powi(2)).sum::<f64>().sqrt();
        if rho <= 16.0 {
            let exact = annulus_fourier(2, 0.25, rho).unwrap() / measure;
            worst = worst.max((c.re - exact).abs());
        }
    }
    worst
}

fn criterion_2() -> Outcome {
    let coarse = raster_error(512);
    let fine = raster_error(1024);
    let factor = coarse / fine;
    outcome(
        coarse <= 5e-2 && factor >= 1.5,
        format!("max error {coarse:.3e} at h=1/64 (tol 5e-2), {fine:.3e} at h=1/128, reduction x{factor:.2} (need >= 1.5)"),
    )
}

fn criterion_3() -> Outcome {
    let deltas: Vec<f64> = (2..=8).map(|e| 2f64.powi(-e)).collect();
    let mut pass = true;
    let mut detail = Vec::new();
    for d in [2, 3] {
        let env: Vec<(f64, f64, f64)> = deltas.iter().map(|&x| decay_envelopes(d, x).unwrap()).collect();
        let a: Vec<f64> = env.iter().map(|e| e.0).collect();
        let b_max = env.iter().map(|e| e.1).fold(0.0, f64::max);
        let c_max = env.iter().map(|e| e.2).fold(0.0, f64::max);
        let spread = ratio(&a);
        pass &= spread.is_finite() && spread <= 4.0 && b_max.is_finite() && c_max <= 10.0;
        detail.push(format!("d={d}: A spread x{spread:.3} (<= 4), B max {b_max:.3}, interpolated C {c_max:.3} (<= 10)"));
    }
    outcome(pass, detail.join("; "))
}

fn criterion_4() -> Outcome {
    let mut worst = 0.0f64;
    for delta in [0.125, 2f64.powi(-6)] {
        for j in -12..=4 {
            let r = band_multiplier_sup(2, delta, j).unwrap() / three_regime_bound(2, delta, j);
            worst = worst.max(r);
        }
    }
    outcome(worst <= 10.0, format!("max sup/bound over j in [-12, 4] is {worst:.3} (<= 10)"))
}

/// `(max over delta)/(min over delta)` of the summary rows, per (p, class).
fn uniformity(report: &SweepReport) -> BTreeMap<String, f64> {
    let mut by_key: BTreeMap<String, Vec<f64>> = BTreeMap::new();
    for r in report.metric("norm_ratio").filter(|r| r.params[3].as_str() == Some("max")) {
        let key = format!("p={} {}", param_text(&r.params[1]), param_text(&r.params[2]));
        by_key.entry(key).or_default().push(r.value);
    }
    by_key.into_iter().map(|(k, v)| (k, ratio(&v))).collect()
}

fn norms_outcome(report: &SweepReport) -> Outcome {
    let spreads = uniformity(report);
    let worst = spreads.values().cloned().fold(0.0, f64::max);
    let top = report
        .metric("norm_ratio")
        .filter(|r| r.params[3].as_str() == Some("max"))
        .map(|r| r.value)
        .fold(0.0, f64::max);
    let list: Vec<String> = spreads.iter().map(|(k, v)| format!("{k} x{v:.3}")).collect();
    outcome(worst <= 2.0, format!("max/min over delta: {} (<= 2); largest norm ratio {top:.4}", list.join(", ")))
}

fn criterion_5() -> Outcome {
    let cfg = ExperimentConfig { seed: SEED, ..ExperimentConfig::new(Subcommand::Norms) };
    norms_outcome(&run_experiment(&cfg).unwrap())
}

fn criterion_6() -> Outcome {
    let cfg = ExperimentConfig { seed: SEED, ps: vec![2.0], ..ExperimentConfig::new(Subcommand::Strong) };
    norms_outcome(&run_experiment(&cfg).unwrap())
}

fn criterion_7() -> Outcome {
    let cfg = ExperimentConfig { seed: SEED, ..ExperimentConfig::new(Subcommand::Weaktype) };
    let report = run_experiment(&cfg).unwrap();
    let mut per_atom: BTreeMap<i64, Vec<f64>> = BTreeMap::new();
    for r in report.metric("weak_ratio") {
        if let Param::Int(t) = r.params[1] {
            per_atom.entry(t).or_default().push(r.value);
        }
    }
    let worst = per_atom.values().map(|v| ratio(v)).fold(0.0, f64::max);
    let constant = report.metric("weak_ratio").map(|r| r.value).fold(0.0, f64::max);
    outcome(
        worst <= 2.0,
        format!("worst per-atom max/min over delta x{worst:.3} (<= 2); measured weak-type constant {constant:.4}"),
    )
}

fn criteria_8_9() -> (Outcome, Outcome) {
    let cfg = ExperimentConfig { seed: SEED, ..ExperimentConfig::new(Subcommand::Atoms) };
    let report = run_experiment(&cfg).unwrap();
    let values = |m: &str| report.metric(m).map(|r| r.value).collect::<Vec<f64>>();
    let residual = values("residual").into_iter().fold(0.0, f64::max);
    let violations: f64 = values("support_violations").iter().sum();
    let orphans: f64 = values("orphans").iter().sum();
    let atom_spread = ratio(&values("atom_norm_constant"));
    let piece_spread = ratio(&values("piece_norm_constant"));
    let tilde = values("tilde_ratio").into_iter().fold(0.0, f64::max);
    let eight = outcome(
        residual <= 1e-6 && violations == 0.0 && atom_spread <= 2.0 && piece_spread <= 2.0 && tilde.is_finite(),
        format!(
            "residual {residual:.2e} (<= 1e-6), support violations {violations}, orphans {orphans}, \
             constant spreads x{atom_spread:.3} / x{piece_spread:.3} (<= 2), |tilde Omega|/|Omega| <= {tilde:.3}"
        ),
    );
    let checks: f64 = values("stopping_checks").iter().sum();
    let failures: f64 = values("stopping_failures").iter().sum();
    let nine = outcome(checks > 0.0 && failures == 0.0, format!("{failures} failures in {checks} minimality checks"));
    (eight, nine)
}

fn criterion_10() -> Outcome {
    let cfg = ExperimentConfig { seed: SEED, ..ExperimentConfig::new(Subcommand::Banddecay) };
    let report = run_experiment(&cfg).unwrap();
    let slopes: Vec<(f64, f64)> = report.metric("slope").map(|r| (r.params[0].as_f64().unwrap(), r.value)).collect();
    let worst = slopes.iter().map(|s| s.1).fold(f64::NEG_INFINITY, f64::max);
    let list: Vec<String> = slopes.iter().map(|(d, s)| format!("delta={d} {s:.3}")).collect();
    outcome(!slopes.is_empty() && worst <= -0.3, format!("slopes {} (<= -0.3)", list.join(", ")))
}

fn criterion_11() -> Outcome {
    let dir = tempfile::tempdir().unwrap();
    let mut identical = 0;
    let mut total = 0;
    for sub in Subcommand::ALL {
        let cfg = ExperimentConfig {
            n: 64,
            box_length: 64.0,
            trials: 2,
            seed: SEED,
            kmin: if sub == Subcommand::Decay { -4 } else { 0 },
            kmax: if sub == Subcommand::Banddecay { 8 } else { 3 },
            jmax: 3,
            ..ExperimentConfig::new(sub)
        };
        let a = dir.path().join(format!("{}-a.csv", sub.name()));
        let b = dir.path().join(format!("{}-b.csv", sub.name()));
        run_experiment(&cfg).unwrap().write(&a).unwrap();
        run_experiment(&cfg).unwrap().write(&b).unwrap();
        total += 1;
        if std::fs::read(&a).unwrap() == std::fs::read(&b).unwrap() {
            identical += 1;
        }
    }
    outcome(identical == total, format!("{identical}/{total} subcommands byte-identical on regeneration"))
}

fn run(label: &str, budget: Duration, f: impl FnOnce() -> Outcome, failures: &mut usize) {
    let start = Instant::now();
    let o = f();
    report(label, budget, start.elapsed(), o, failures);
}

fn report(label: &str, budget: Duration, elapsed: Duration, o: Outcome, failures: &mut usize) {
    let pass = o.pass && elapsed <= budget;
    if !pass {
        *failures += 1;
    }
    println!(
        "{} {label}: {} [{:.1}s, budget {}s]",
        if pass { "PASS" } else { "FAIL" },
        o.detail,
        elapsed.as_secs_f64(),
        budget.as_secs()
    );
}

fn main() {
    let mut failures = 0;
    let s = Duration::from_secs;
    run("1 fft convolution oracle", s(5), criterion_1, &mut failures);
    run("2 rasterised annulus transform", s(30), criterion_2, &mut failures);
    run("3 decay envelopes", s(60), criterion_3, &mut failures);
    run("4 three-regime multiplier bound", s(30), criterion_4, &mut failures);
    run("5 lacunary L^p uniformity", s(300), criterion_5, &mut failures);
    run("6 strong L^2 uniformity", s(300), criterion_6, &mut failures);
    run("7 weak-type uniformity", s(300), criterion_7, &mut failures);
    let start = Instant::now();
    let (eight, nine) = criteria_8_9();
    let elapsed = start.elapsed();
    report("8 atomic decomposition", s(300), elapsed, eight, &mut failures);
    report("9 stopping-time minimality", s(300), Duration::ZERO, nine, &mut failures);
    run("10 band decay slope", s(300), criterion_10, &mut failures);
    run("11 determinism", s(60), criterion_11, &mut failures);
    println!("acceptance: {} of 11 criteria passed", 11 - failures);
    if failures > 0 {
        std::process::exit(1);
    }
}
