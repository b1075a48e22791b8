//! Parameter sweeps behind the command-line harness.
//!
//! [`run_experiment`] validates the whole configuration before computing
//! anything, evaluates sweep points in parallel and sorts the rows
//! canonically, so the CSV bytes depend only on the configuration and seed.

use std::cmp::Ordering;
use std::f64::consts::PI;
use std::fmt::{self, Write as _};
use std::fs;
use std::io::Write as _;
use std::path::Path;
use std::str::FromStr;

use rayon::prelude::*;

use crate::annulus::{annulus_measure, AnnulusSpec};
use crate::atoms::{build_atoms, build_level_system, stopping_time, stopping_time_is_minimal, verify_decomposition, Regime};
use crate::error::{Error, Result};
use crate::grid::{level_measure, lp_norm, Field, GridSpec, MAX_DIM};
use crate::littlewood_paley::{h1_norm, phi_hat, BumpFamily};
use crate::maximal::{band_max, lacunary_max_with, strong_max_with, DilationRange};
use crate::random::InputClass;
use crate::special::annulus_fourier;
use crate::spectral::{Averager, KernelMode};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Subcommand {
    Decay,
    Norms,
    Strong,
    Weaktype,
    Atoms,
    Banddecay,
}

impl Subcommand {
    pub const ALL: [Subcommand; 6] = [
        Subcommand::Decay,
        Subcommand::Norms,
        Subcommand::Strong,
        Subcommand::Weaktype,
        Subcommand::Atoms,
        Subcommand::Banddecay,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Subcommand::Decay => "decay",
            Subcommand::Norms => "norms",
            Subcommand::Strong => "strong",
            Subcommand::Weaktype => "weaktype",
            Subcommand::Atoms => "atoms",
            Subcommand::Banddecay => "banddecay",
        }
    }
}

impl FromStr for Subcommand {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Subcommand::ALL
            .into_iter()
            .find(|c| c.name() == s)
            .ok_or_else(|| Error::Config(format!("unknown subcommand {s:?}")))
    }
}

/// Parses `analytic`, `raster` or `raster:S` (S sub-samples per axis).
pub fn parse_kernel(s: &str) -> Result<KernelMode> {
    match s {
        "analytic" => Ok(KernelMode::Analytic),
        "raster" => Ok(KernelMode::Raster { samples_per_axis: 1 }),
        _ => s
            .strip_prefix("raster:")
            .and_then(|v| v.parse::<u32>().ok())
            .filter(|&v| v >= 1)
            .map(|samples_per_axis| KernelMode::Raster { samples_per_axis })
            .ok_or_else(|| Error::Config(format!("unknown kernel {s:?}"))),
    }
}

pub fn kernel_name(mode: KernelMode) -> String {
    match mode {
        KernelMode::Analytic => "analytic".into(),
        KernelMode::Raster { samples_per_axis } => format!("raster:{samples_per_axis}"),
    }
}

/// One sweep. `kmin..=kmax` is the dilation range, except for `decay`
/// where it is the band scale range of the multiplier bound.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub subcommand: Subcommand,
    pub d: usize,
    pub n: usize,
    pub box_length: f64,
    pub deltas: Vec<f64>,
    pub ps: Vec<f64>,
    pub kmin: i32,
    pub kmax: i32,
    pub lambda_points: usize,
    pub trials: u64,
    pub seed: u64,
    pub kernel: KernelMode,
    /// Largest diagonal band index for `banddecay`.
    pub jmax: i32,
}

fn dyadic_deltas(lo: i32, hi: i32) -> Vec<f64> {
    (lo..=hi).map(|e| 2f64.powi(-e)).collect()
}

impl ExperimentConfig {
    /// Defaults: d = 2 on a 256^2 grid of unit spacing, analytic kernel, seed 0.
    pub fn new(subcommand: Subcommand) -> Self {
        let (kmin, kmax) = match subcommand {
            Subcommand::Decay => (-12, 4),
            Subcommand::Strong => (-3, 3),
            Subcommand::Banddecay => (0, 16),
            _ => (0, 4),
        };
        Self {
            subcommand,
            d: 2,
            n: 256,
            box_length: 256.0,
            deltas: if subcommand == Subcommand::Decay { dyadic_deltas(2, 8) } else { dyadic_deltas(2, 7) },
            ps: vec![4.0 / 3.0, 2.0, 4.0],
            kmin,
            kmax,
            lambda_points: 32,
            trials: if subcommand == Subcommand::Atoms { 10 } else { 20 },
            seed: 0,
            kernel: KernelMode::Analytic,
            jmax: 6,
        }
    }

    pub fn grid(&self) -> Result<GridSpec> {
        GridSpec::new(self.d, self.n, self.box_length)
    }

    fn range(&self) -> Result<DilationRange> {
        match self.subcommand {
            Subcommand::Strong => DilationRange::anisotropic(vec![self.kmin; self.d], vec![self.kmax; self.d]),
            _ => DilationRange::isotropic(self.kmin, self.kmax),
        }
    }

    /// Checks every parameter, and every annulus the sweep will use, before any compute.
    pub fn validate(&self) -> Result<()> {
        if !(2..=MAX_DIM).contains(&self.d) {
            return Err(Error::Dimension(self.d));
        }
        if self.deltas.is_empty() {
            return Err(Error::Config("empty delta list".into()));
        }
        if let Some(&bad) = self.deltas.iter().find(|&&x| !(x > 0.0 && x < 0.5)) {
            return Err(Error::Delta(bad));
        }
        if self.ps.is_empty() {
            return Err(Error::Config("empty p list".into()));
        }
        if let Some(&bad) = self.ps.iter().find(|&&p| !(p >= 1.0 && p.is_finite())) {
            return Err(Error::Exponent(bad));
        }
        if self.kmin > self.kmax {
            return Err(Error::EmptyRange);
        }
        if self.lambda_points == 0 {
            return Err(Error::Config("lambda grid needs at least one point".into()));
        }
        if self.trials == 0 {
            return Err(Error::Config("trials must be positive".into()));
        }
        if self.subcommand == Subcommand::Banddecay && self.jmax < 2 {
            return Err(Error::Config(format!("jmax must be at least 2 to fit a slope, got {}", self.jmax)));
        }
        if self.subcommand == Subcommand::Decay {
            return Ok(());
        }
        let grid = self.grid()?;
        if matches!(self.subcommand, Subcommand::Atoms) {
            return Ok(());
        }
        let avg = Averager::with_capacity(grid, self.kernel, 0);
        let dilations = self.range()?.dilations(self.d)?;
        for &delta in &self.deltas {
            for k in &dilations {
                avg.validate(&AnnulusSpec::new(self.d, delta, k.clone())?)?;
            }
        }
        Ok(())
    }

    /// Canonical one-line echo, including the toolkit version.
    pub fn echo(&self) -> String {
        let list = |v: &[f64]| v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(";");
        format!(
            "subcommand={} d={} n={} box={} delta={} p={} kmin={} kmax={} lambda_points={} trials={} seed={} kernel={} jmax={} version={}",
            self.subcommand.name(),
            self.d,
            self.n,
            self.box_length,
            list(&self.deltas),
            list(&self.ps),
            self.kmin,
            self.kmax,
            self.lambda_points,
            self.trials,
            self.seed,
            kernel_name(self.kernel),
            self.jmax,
            env!("CARGO_PKG_VERSION"),
        )
    }
}

/// A typed CSV parameter; rows sort by these values, not by their text.
#[derive(Debug, Clone)]
pub enum Param {
    Int(i64),
    Real(f64),
    Text(String),
}

impl Param {
    fn rank(&self) -> u8 {
        match self {
            Param::Int(_) => 0,
            Param::Real(_) => 1,
            Param::Text(_) => 2,
        }
    }

    pub fn as_f64(&self) -> Option<f64> {
        match self {
            Param::Int(v) => Some(*v as f64),
            Param::Real(v) => Some(*v),
            Param::Text(_) => None,
        }
    }

    pub fn as_str(&self) -> Option<&str> {
        match self {
            Param::Text(s) => Some(s),
            _ => None,
        }
    }
}

impl Ord for Param {
    fn cmp(&self, other: &Self) -> Ordering {
        match (self, other) {
            (Param::Int(a), Param::Int(b)) => a.cmp(b),
            (Param::Real(a), Param::Real(b)) => a.total_cmp(b),
            (Param::Text(a), Param::Text(b)) => a.cmp(b),
            _ => self.rank().cmp(&other.rank()),
        }
    }
}

impl PartialOrd for Param {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl PartialEq for Param {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Param {}

impl fmt::Display for Param {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Param::Int(v) => write!(f, "{v}"),
            Param::Real(v) => write!(f, "{v}"),
            Param::Text(s) => f.write_str(s),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Row {
    pub params: Vec<Param>,
    pub metric: String,
    pub value: f64,
}

fn row(params: Vec<Param>, metric: &str, value: f64) -> Row {
    Row { params, metric: metric.to_string(), value }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepReport {
    pub config: String,
    pub columns: Vec<String>,
    pub rows: Vec<Row>,
}

impl SweepReport {
    fn new(cfg: &ExperimentConfig, columns: &[&str], mut rows: Vec<Row>) -> Self {
        rows.sort_by(|a, b| a.params.cmp(&b.params).then_with(|| a.metric.cmp(&b.metric)));
        Self { config: cfg.echo(), columns: columns.iter().map(|c| c.to_string()).collect(), rows }
    }

    /// Rows carrying `metric`.
    pub fn metric<'a>(&'a self, metric: &'a str) -> impl Iterator<Item = &'a Row> + 'a {
        self.rows.iter().filter(move |r| r.metric == metric)
    }

    pub fn to_csv(&self) -> String {
        let mut out = format!("# config: {}\n{},metric,value\n", self.config, self.columns.join(","));
        for r in &self.rows {
            for p in &r.params {
                write!(out, "{p},").unwrap();
            }
            writeln!(out, "{},{}", r.metric, r.value).unwrap();
        }
        out
    }

    /// Writes the CSV through a sibling temporary file and a rename, so a
    /// reader never sees a partial report.
    pub fn write(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let name = path
            .file_name()
            .ok_or_else(|| Error::Config(format!("output path {} has no file name", path.display())))?;
        let tmp = path.with_file_name(format!(".{}.{}.tmp", name.to_string_lossy(), std::process::id()));
        let result = (|| {
            let mut file = fs::File::create(&tmp)?;
            file.write_all(self.to_csv().as_bytes())?;
            file.sync_all()?;
            fs::rename(&tmp, path)
        })();
        if result.is_err() {
            let _ = fs::remove_file(&tmp);
        }
        Ok(result?)
    }
}

pub fn run_experiment(cfg: &ExperimentConfig) -> Result<SweepReport> {
    cfg.validate()?;
    match cfg.subcommand {
        Subcommand::Decay => run_decay(cfg),
        Subcommand::Norms | Subcommand::Strong => run_norms(cfg),
        Subcommand::Weaktype => run_weaktype(cfg),
        Subcommand::Atoms => run_atoms(cfg),
        Subcommand::Banddecay => run_banddecay(cfg),
    }
}

/// Radii of the envelope sweep: `[1, 512]` in steps of 1/32.
const ENVELOPE_STEPS: usize = 511 * 32;

/// Sup-ratios of the three decay envelopes of the normalised annulus transform
/// over `rho` in `[1, 512]`: `(A, B, interpolated)`.
pub fn decay_envelopes(d: usize, delta: f64) -> Result<(f64, f64, f64)> {
    let measure = annulus_measure(d, delta)?;
    let (ea, eb, ei) = ((d as f64 - 1.0) / 2.0, (d as f64 + 1.0) / 2.0, d as f64 / 2.0);
    let (mut a, mut b, mut c) = (0.0f64, 0.0f64, 0.0f64);
    for i in 0..=ENVELOPE_STEPS {
        let rho = 1.0 + i as f64 / 32.0;
        let chi = annulus_fourier(d, delta, rho)?.abs();
        let w = 1.0 + 2.0 * PI * rho;
        a = a.max(w.powf(ea) * chi / measure);
        b = b.max(w.powf(eb) * chi);
        c = c.max(delta.sqrt() * w.powf(ei) * chi / measure);
    }
    Ok((a, b, c))
}

/// `min{1, 2^{j(d-1)/2}, delta^{-1/2} 2^{jd/2}}`.
pub fn three_regime_bound(d: usize, delta: f64, j: i32) -> f64 {
    let j = j as f64;
    let d = d as f64;
    1f64.min(2f64.powf(j * (d - 1.0) / 2.0)).min(2f64.powf(j * d / 2.0) / delta.sqrt())
}

/// `sup_rho |phi_hat(2^j rho) chi_hat(rho)| / |C^delta|` over the window support
/// `[2^{-j-1}, 2^{-j+1}]`, sampled at spacing at most 1/32.
pub fn band_multiplier_sup(d: usize, delta: f64, j: i32) -> Result<f64> {
    let measure = annulus_measure(d, delta)?;
    let (lo, hi) = (2f64.powi(-j - 1), 2f64.powi(-j + 1));
    let steps = (((hi - lo) * 32.0).ceil() as usize).max(4096);
    let scale = 2f64.powi(j);
    let mut sup = 0.0f64;
    for i in 0..=steps {
        let rho = lo + (hi - lo) * i as f64 / steps as f64;
        let w = phi_hat(scale * rho);
        if w > 0.0 {
            sup = sup.max(w * annulus_fourier(d, delta, rho)?.abs() / measure);
        }
    }
    Ok(sup)
}

fn run_decay(cfg: &ExperimentConfig) -> Result<SweepReport> {
    let d = cfg.d;
    let per_delta = cfg
        .deltas
        .par_iter()
        .map(|&delta| {
            let key = |j: Param| vec![Param::Int(d as i64), Param::Real(delta), j];
            let (a, b, c) = decay_envelopes(d, delta)?;
            let all = || Param::Text(String::new());
            let mut rows = vec![
                row(key(all()), "envelope_a", a),
                row(key(all()), "envelope_b", b),
                row(key(all()), "envelope_interpolated", c),
            ];
            for j in cfg.kmin..=cfg.kmax {
                let sup = band_multiplier_sup(d, delta, j)?;
                let bound = three_regime_bound(d, delta, j);
                rows.push(row(key(Param::Int(j as i64)), "band_sup", sup));
                rows.push(row(key(Param::Int(j as i64)), "band_bound", bound));
                rows.push(row(key(Param::Int(j as i64)), "band_ratio", sup / bound));
            }
            Ok(rows)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(SweepReport::new(cfg, &["d", "delta", "j"], per_delta.concat()))
}

fn inputs(cfg: &ExperimentConfig, grid: &GridSpec, classes: &[InputClass]) -> Vec<(InputClass, u64, Field)> {
    let jobs: Vec<(InputClass, u64)> =
        classes.iter().flat_map(|&c| (0..cfg.trials).map(move |t| (c, t))).collect();
    jobs.into_par_iter().map(|(c, t)| (c, t, c.generate(grid, cfg.seed, t))).collect()
}

fn max_label() -> Param {
    Param::Text("max".into())
}

fn run_norms(cfg: &ExperimentConfig) -> Result<SweepReport> {
    let grid = cfg.grid()?;
    let range = cfg.range()?;
    let strong = cfg.subcommand == Subcommand::Strong;
    let capacity = range.dilations(cfg.d)?.len();
    let fields = inputs(cfg, &grid, &[InputClass::BandLimited, InputClass::CubeBump]);
    let mut rows = Vec::new();
    for &delta in &cfg.deltas {
        let avg = Averager::with_capacity(grid, cfg.kernel, capacity);
        let ratios = fields
            .par_iter()
            .map(|(class, trial, f)| {
                let m = if strong {
                    strong_max_with(&avg, f, delta, &range)?
                } else {
                    lacunary_max_with(&avg, f, delta, &range)?
                };
                let r = cfg
                    .ps
                    .iter()
                    .map(|&p| Ok(lp_norm(&m, p)? / lp_norm(f, p)?))
                    .collect::<Result<Vec<f64>>>()?;
                Ok((*class, *trial, r))
            })
            .collect::<Result<Vec<_>>>()?;
        for (i, &p) in cfg.ps.iter().enumerate() {
            for class in [InputClass::BandLimited, InputClass::CubeBump] {
                let key = |t: Param| vec![Param::Real(delta), Param::Real(p), Param::Text(class.name().into()), t];
                let mut top = 0.0f64;
                for (_, trial, r) in ratios.iter().filter(|(c, _, _)| *c == class) {
                    top = top.max(r[i]);
                    rows.push(row(key(Param::Int(*trial as i64)), "norm_ratio", r[i]));
                }
                rows.push(row(key(max_label()), "norm_ratio", top));
            }
        }
    }
    Ok(SweepReport::new(cfg, &["delta", "p", "class", "trial"], rows))
}

/// Geometric grid of `points` levels spanning `[1e-3, 1] * top`.
pub fn lambda_grid(top: f64, points: usize) -> Vec<f64> {
    if points <= 1 {
        return vec![1e-3 * top];
    }
    (0..points).map(|i| top * 10f64.powf(-3.0 + 3.0 * i as f64 / (points - 1) as f64)).collect()
}

/// `sup_lambda lambda |{m > lambda}|` over the level grid of `m`.
pub fn weak_type_sup(m: &Field, points: usize) -> f64 {
    lambda_grid(m.max_value(), points)
        .into_iter()
        .map(|l| l * level_measure(m, l))
        .fold(0.0, f64::max)
}

fn run_weaktype(cfg: &ExperimentConfig) -> Result<SweepReport> {
    let grid = cfg.grid()?;
    let range = cfg.range()?;
    let fam = BumpFamily::covering(&grid);
    let atoms = inputs(cfg, &grid, &[InputClass::CubeBump]);
    let h1 = atoms.par_iter().map(|(_, _, a)| h1_norm(a, &fam)).collect::<Result<Vec<f64>>>()?;
    let mut rows = Vec::new();
    for &delta in &cfg.deltas {
        let avg = Averager::with_capacity(grid, cfg.kernel, range.dilations(cfg.d)?.len());
        let ratios = atoms
            .par_iter()
            .zip(&h1)
            .map(|((_, trial, a), &h)| {
                let m = lacunary_max_with(&avg, a, delta, &range)?;
                Ok((*trial, weak_type_sup(&m, cfg.lambda_points) / h))
            })
            .collect::<Result<Vec<_>>>()?;
        let mut top = 0.0f64;
        for (trial, r) in ratios {
            top = top.max(r);
            rows.push(row(vec![Param::Real(delta), Param::Int(trial as i64)], "weak_ratio", r));
        }
        rows.push(row(vec![Param::Real(delta), max_label()], "weak_ratio", top));
    }
    Ok(SweepReport::new(cfg, &["delta", "trial"], rows))
}

/// Level used for the stopping-time checks of the `atoms` sweep.
pub const ATOM_LAMBDA: f64 = 1.0;

fn run_atoms(cfg: &ExperimentConfig) -> Result<SweepReport> {
    let grid = cfg.grid()?;
    let fam = BumpFamily::covering(&grid);
    let fields = inputs(cfg, &grid, &[InputClass::BandLimited]);
    let per_trial = fields
        .par_iter()
        .map(|(_, trial, f)| {
            let sys = build_level_system(f, &fam)?;
            let atoms = build_atoms(&sys, f, &fam)?;
            let rep = verify_decomposition(&atoms, f, &fam)?;
            let tilde = (0..sys.levels().len())
                .map(|i| sys.omega_tilde_measure(i) / sys.omega_measure(i))
                .fold(0.0, f64::max);
            let (mut checks, mut failures) = (0usize, 0usize);
            for a in &atoms.atoms {
                for &delta in &cfg.deltas {
                    for regime in [Regime::AnnulusThick, Regime::AnnulusThin] {
                        let st = stopping_time(a, ATOM_LAMBDA, delta, regime)?;
                        checks += 1;
                        if !stopping_time_is_minimal(a, ATOM_LAMBDA, delta, regime, st) {
                            failures += 1;
                        }
                    }
                }
            }
            let key = || vec![Param::Int(*trial as i64)];
            Ok(vec![
                row(key(), "residual", rep.residual),
                row(key(), "support_violations", rep.support_violations as f64),
                row(key(), "max_support_tail", rep.max_support_tail),
                row(key(), "orphans", rep.orphans as f64),
                row(key(), "atom_count", rep.atom_count as f64),
                row(key(), "h1_norm", rep.h1_norm),
                row(key(), "atom_norm_constant", rep.atom_norm_constant),
                row(key(), "piece_norm_constant", rep.piece_norm_constant),
                row(key(), "tilde_ratio", tilde),
                row(key(), "stopping_checks", checks as f64),
                row(key(), "stopping_failures", failures as f64),
            ])
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(SweepReport::new(cfg, &["trial"], per_trial.concat()))
}

/// Least-squares slope of `ys` against `xs`.
pub fn least_squares_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    sxy / sxx
}

fn run_banddecay(cfg: &ExperimentConfig) -> Result<SweepReport> {
    let grid = cfg.grid()?;
    let range = cfg.range()?;
    let capacity = range.dilations(cfg.d)?.len();
    let fields = inputs(cfg, &grid, &[InputClass::BandLimited]);
    let mut rows = Vec::new();
    for &delta in &cfg.deltas {
        // sigma_k does not depend on j, so one cache serves every band.
        let avg = Averager::with_capacity(grid, cfg.kernel, capacity);
        let mut xs = Vec::new();
        let mut ys = Vec::new();
        for j in 1..=cfg.jmax {
            let jvec = vec![j; cfg.d];
            let norm = fields
                .par_iter()
                .map(|(_, _, f)| Ok(lp_norm(&band_max(&avg, f, &jvec, delta, &range)?, 2.0)? / lp_norm(f, 2.0)?))
                .collect::<Result<Vec<f64>>>()?
                .into_iter()
                .fold(0.0, f64::max);
            let key = vec![Param::Real(delta), Param::Int(j as i64)];
            rows.push(row(key.clone(), "norm", norm));
            rows.push(row(key, "log2_norm", norm.log2()));
            xs.push(j as f64);
            ys.push(norm.log2());
        }
        rows.push(row(vec![Param::Real(delta), Param::Text("fit".into())], "slope", least_squares_slope(&xs, &ys)));
    }
    Ok(SweepReport::new(cfg, &["delta", "j"], rows))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small(sub: Subcommand) -> ExperimentConfig {
        ExperimentConfig {
            n: 64,
            box_length: 64.0,
            deltas: vec![0.25, 0.0625],
            ps: vec![2.0],
            trials: 2,
            seed: 3,
            lambda_points: 8,
            ..ExperimentConfig::new(sub)
        }
    }

    #[test]
    fn subcommand_names_round_trip() {
        for s in Subcommand::ALL {
            assert_eq!(s.name().parse::<Subcommand>().unwrap(), s);
        }
        assert!("plot".parse::<Subcommand>().is_err());
        assert_eq!(parse_kernel("raster:4").unwrap(), KernelMode::Raster { samples_per_axis: 4 });
        assert!(parse_kernel("raster:0").is_err());
        assert_eq!(kernel_name(parse_kernel("analytic").unwrap()), "analytic");
    }

    #[test]
    fn validation_fails_fast() {
        let mut cfg = small(Subcommand::Norms);
        cfg.deltas = vec![0.25, 0.6];
        assert!(matches!(run_experiment(&cfg), Err(Error::Delta(d)) if d == 0.6));
        let mut cfg = small(Subcommand::Norms);
        cfg.ps = vec![f64::INFINITY];
        assert!(matches!(cfg.validate(), Err(Error::Exponent(_))));
        // A raster kernel cannot hold a radius-16 annulus in a 64-box.
        let mut cfg = small(Subcommand::Norms);
        cfg.kernel = KernelMode::Raster { samples_per_axis: 64 };
        cfg.kmax = 4;
        assert!(matches!(cfg.validate(), Err(Error::AnnulusTooLarge { .. })));
        cfg.kmax = 2;
        cfg.kmin = 2;
        cfg.deltas = vec![0.25];
        cfg.validate().unwrap();
    }

    #[test]
    fn constant_field_is_a_fixed_point() {
        let g = GridSpec::new(2, 64, 64.0).unwrap();
        let c = Field::constant(g, 3.0);
        let avg = Averager::new(g, KernelMode::Analytic);
        let m = lacunary_max_with(&avg, &c, 0.125, &DilationRange::isotropic(0, 3).unwrap()).unwrap();
        for p in [4.0 / 3.0, 2.0, 4.0] {
            let r = lp_norm(&m, p).unwrap() / lp_norm(&c, p).unwrap();
            assert!((r - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn weak_type_ignores_levels_above_the_maximum() {
        let g = GridSpec::new(1, 8, 8.0).unwrap();
        let m = Field::new(g, vec![0.0, 1.0, 2.0, 4.0, 0.5, 0.0, 0.0, 0.0]).unwrap();
        assert_eq!(level_measure(&m, 4.0), 0.0);
        let levels = lambda_grid(4.0, 5);
        assert!((levels[0] - 4e-3).abs() < 1e-15 && (levels[4] - 4.0).abs() < 1e-12);
        let expect = levels.iter().map(|&l| l * level_measure(&m, l)).fold(0.0, f64::max);
        assert_eq!(weak_type_sup(&m, 5), expect);
    }

    #[test]
    fn slope_of_a_line() {
        let xs = [1.0, 2.0, 3.0, 4.0];
        let ys: Vec<f64> = xs.iter().map(|x| 0.5 - 0.75 * x).collect();
        assert!((least_squares_slope(&xs, &ys) + 0.75).abs() < 1e-14);
    }

    #[test]
    fn params_sort_by_value() {
        let mut v = vec![Param::Text("max".into()), Param::Int(10), Param::Int(2), Param::Real(0.5)];
        v.sort();
        assert_eq!(v, vec![Param::Int(2), Param::Int(10), Param::Real(0.5), Param::Text("max".into())]);
    }

    #[test]
    fn reports_are_deterministic_and_sorted() {
        for sub in [Subcommand::Norms, Subcommand::Weaktype] {
            let cfg = small(sub);
            let a = run_experiment(&cfg).unwrap();
            let b = run_experiment(&cfg).unwrap();
            assert_eq!(a.to_csv(), b.to_csv());
            assert!(a.to_csv().starts_with("# config: subcommand="));
            assert!(a.rows.windows(2).all(|w| w[0].params <= w[1].params));
        }
    }

    #[test]
    fn report_write_is_atomic() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("out.csv");
        let report = SweepReport::new(&small(Subcommand::Atoms), &["trial"], vec![row(vec![Param::Int(0)], "x", 1.5)]);
        report.write(&path).unwrap();
        assert_eq!(fs::read_to_string(&path).unwrap(), report.to_csv());
        assert_eq!(fs::read_dir(dir.path()).unwrap().count(), 1);
        assert!(report.write(dir.path().join("missing/out.csv")).is_err());
    }
}
