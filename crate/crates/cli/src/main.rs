use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Context;
use clap::error::ErrorKind;
use clap::{CommandFactory, Parser};
use deltasphere::experiments::{parse_kernel, run_experiment, ExperimentConfig, Subcommand};
use deltasphere::spectral::KernelMode;
use deltasphere::Error;

/// Parameter sweeps for lacunary maximal averages over thin spherical shells.
/// Each run writes one CSV report; rows are sorted, so reruns are byte-identical.
#[derive(Debug, Parser)]
#[command(name = "deltasphere", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, clap::Subcommand)]
enum Command {
    /// Decay envelopes of the annulus transform and the band multiplier bound (--kmin/--kmax give the band scales)
    Decay(Args),
    /// Ratios ||M_lac f||_p / ||f||_p for random band-limited fields and cube bumps
    Norms(Args),
    /// Same ratios for the strong maximal function over the box [kmin, kmax]^d
    Strong(Args),
    /// sup_lambda lambda |{M_lac a > lambda}| / ||a||_H1 for random cube bumps
    Weaktype(Args),
    /// Atomic decomposition checks for random band-limited fields
    Atoms(Args),
    /// L^2 norm of the band maximal operators against the band index, with fitted slope
    Banddecay(Args),
}

#[derive(Debug, clap::Args)]
struct Args {
    /// Dimension, 2 to 4 [default: 2]
    #[arg(long, value_parser = parse_dim)]
    d: Option<usize>,
    /// Samples per axis, a power of two >= 4 [default: 256]
    #[arg(long, value_parser = parse_n)]
    n: Option<usize>,
    /// Side length of the periodic box [default: n]
    #[arg(long = "box", allow_negative_numbers = true, value_parser = parse_box)]
    box_length: Option<f64>,
    /// Comma-separated shell thicknesses in (0, 1/2) [default: 2^-2..2^-7, 2^-8 for decay]
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true, value_parser = parse_delta)]
    delta: Vec<f64>,
    /// Comma-separated finite exponents p >= 1 [default: 4/3,2,4]
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true, value_parser = parse_p)]
    p: Vec<f64>,
    /// Smallest dilation exponent
    #[arg(long, allow_negative_numbers = true)]
    kmin: Option<i32>,
    /// Largest dilation exponent
    #[arg(long, allow_negative_numbers = true)]
    kmax: Option<i32>,
    /// Points of the geometric lambda grid [default: 32]
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    lambda_points: Option<u64>,
    /// Random inputs per class [default: 20, 10 for atoms]
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    trials: Option<u64>,
    /// Seed of the input generator [default: 0]
    #[arg(long)]
    seed: Option<u64>,
    /// Averaging kernel: analytic, raster or raster:S [default: analytic]
    #[arg(long, value_parser = parse_kernel_arg)]
    kernel: Option<KernelMode>,
    /// Largest diagonal band index for banddecay [default: 6]
    #[arg(long, allow_negative_numbers = true)]
    jmax: Option<i32>,
    /// Output CSV path; stdout when absent
    #[arg(long)]
    out: Option<PathBuf>,
}

fn parse_dim(s: &str) -> Result<usize, String> {
    let d: usize = s.parse().map_err(|e| format!("{e}"))?;
    if (2..=4).contains(&d) {
        Ok(d)
    } else {
        Err("dimension must lie in [2, 4]".into())
    }
}

fn parse_n(s: &str) -> Result<usize, String> {
    let n: usize = s.parse().map_err(|e| format!("{e}"))?;
    if n >= 4 && n.is_power_of_two() {
        Ok(n)
    } else {
        Err("must be a power of two >= 4".into())
    }
}

fn parse_box(s: &str) -> Result<f64, String> {
    let l: f64 = s.parse().map_err(|e| format!("{e}"))?;
    if l > 0.0 && l.is_finite() {
        Ok(l)
    } else {
        Err("must be positive and finite".into())
    }
}

fn parse_delta(s: &str) -> Result<f64, String> {
    let x: f64 = s.parse().map_err(|e| format!("{e}"))?;
    if x > 0.0 && x < 0.5 {
        Ok(x)
    } else {
        Err("delta must lie in (0, 1/2)".into())
    }
}

fn parse_p(s: &str) -> Result<f64, String> {
    let p: f64 = s.parse().map_err(|e| format!("{e}"))?;
    if p >= 1.0 && p.is_finite() {
        Ok(p)
    } else {
        Err("p must be finite and >= 1".into())
    }
}

fn parse_kernel_arg(s: &str) -> Result<KernelMode, String> {
    parse_kernel(s).map_err(|e| e.to_string())
}

impl Command {
    fn split(self) -> (Subcommand, Args) {
        match self {
            Command::Decay(a) => (Subcommand::Decay, a),
            Command::Norms(a) => (Subcommand::Norms, a),
            Command::Strong(a) => (Subcommand::Strong, a),
            Command::Weaktype(a) => (Subcommand::Weaktype, a),
            Command::Atoms(a) => (Subcommand::Atoms, a),
            Command::Banddecay(a) => (Subcommand::Banddecay, a),
        }
    }
}

fn config(sub: Subcommand, args: &Args) -> ExperimentConfig {
    let mut cfg = ExperimentConfig::new(sub);
    if let Some(d) = args.d {
        cfg.d = d;
    }
    if let Some(n) = args.n {
        cfg.n = n;
        cfg.box_length = n as f64;
    }
    if let Some(l) = args.box_length {
        cfg.box_length = l;
    }
    if !args.delta.is_empty() {
        cfg.deltas = args.delta.clone();
    }
    if !args.p.is_empty() {
        cfg.ps = args.p.clone();
    }
    cfg.kmin = args.kmin.unwrap_or(cfg.kmin);
    cfg.kmax = args.kmax.unwrap_or(cfg.kmax);
    cfg.lambda_points = args.lambda_points.map_or(cfg.lambda_points, |v| v as usize);
    cfg.trials = args.trials.unwrap_or(cfg.trials);
    cfg.seed = args.seed.unwrap_or(cfg.seed);
    cfg.kernel = args.kernel.unwrap_or(cfg.kernel);
    cfg.jmax = args.jmax.unwrap_or(cfg.jmax);
    cfg
}

/// Flags responsible for a configuration rejected after parsing.
fn culprit(e: &Error) -> &'static str {
    match e {
        Error::Delta(_) => "--delta",
        Error::Exponent(_) => "--p",
        Error::Dimension(_) => "--d",
        Error::NotPowerOfTwo(_) => "--n",
        Error::BoxLength(_) => "--box",
        Error::EmptyRange => "--kmin/--kmax",
        Error::AnnulusTooLarge { .. } => "--kmax/--box",
        Error::UnderResolved { .. } => "--kmin/--delta/--kernel",
        _ => "--jmax/--lambda-points/--trials",
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (sub, args) = cli.command.split();
    let cfg = config(sub, &args);
    if let Err(e) = cfg.validate() {
        Cli::command().error(ErrorKind::ValueValidation, format!("invalid value for {}: {e}", culprit(&e))).exit();
    }
    match execute(&cfg, args.out.as_ref()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}

fn execute(cfg: &ExperimentConfig, out: Option<&PathBuf>) -> anyhow::Result<()> {
    let report = run_experiment(cfg)?;
    match out {
        Some(path) => report.write(path).with_context(|| format!("writing {}", path.display()))?,
        None => std::io::stdout().lock().write_all(report.to_csv().as_bytes())?,
    }
    Ok(())
}
