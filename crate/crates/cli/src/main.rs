use std::fmt::Write as _;
use std::fs;
use std::io::{self, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use blocksparse::experiments::{self, ExperimentConfig};
use blocksparse::{
    block_sparsity, estimate_block_sparsity, project, project_materialized, read_signal, recovery_error_bound,
    sample_isotropic_vector, EstimateReport, NoiseFamily, NoiseModel, RandomStream, StableSpec,
};
use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Parser)]
#[command(name = "blocksparse", version, about = "Estimate block sparsity from stable random projections")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Measure a signal file twice (index 1 and index alpha) and estimate k_alpha.
    Estimate(EstimateArgs),
    /// Write noisy stable projections of a signal file.
    Measure(MeasureArgs),
    /// Draw isotropic symmetric stable vectors, one per line.
    SampleStable(SampleArgs),
    /// Run a Monte Carlo study from a key=value config file.
    Experiment(ExperimentArgs),
    /// Evaluate the mixed l2/l1 recovery error bound.
    Bound(BoundArgs),
}

#[derive(Args)]
struct NoiseArgs {
    #[arg(long, default_value_t = 0.0)]
    sigma: f64,
    /// gaussian, laplace, uniform or t:<nu>.
    #[arg(long, default_value = "gaussian")]
    noise: String,
}

impl NoiseArgs {
    fn model(&self) -> Result<NoiseModel> {
        let family: NoiseFamily = self.noise.parse()?;
        Ok(NoiseModel::new(family, self.sigma)?)
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Kv,
    Csv,
}

#[derive(Args)]
struct EstimateArgs {
    #[arg(long)]
    signal: PathBuf,
    #[arg(long, default_value_t = 2.0)]
    alpha: f64,
    #[arg(long, default_value_t = 1.0)]
    gamma1: f64,
    #[arg(long, default_value_t = 1.0)]
    gamma_alpha: f64,
    #[command(flatten)]
    noise: NoiseArgs,
    #[arg(long, default_value_t = 500)]
    n1: usize,
    #[arg(long, default_value_t = 500)]
    n_alpha: usize,
    #[arg(long, default_value_t = 1.0)]
    eta0: f64,
    #[arg(long, default_value_t = 0.05)]
    beta: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Also print the exact k_alpha of the signal.
    #[arg(long)]
    truth: bool,
    #[arg(long, value_enum, default_value_t = Format::Kv)]
    format: Format,
}

#[derive(Args)]
struct MeasureArgs {
    #[arg(long)]
    signal: PathBuf,
    #[arg(long, default_value_t = 1.0)]
    alpha: f64,
    #[arg(long, default_value_t = 1.0)]
    gamma: f64,
    #[arg(long)]
    n: usize,
    #[command(flatten)]
    noise: NoiseArgs,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Measurements file; standard output when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Also write the measurement matrix as CSV, one row per measurement.
    #[arg(long)]
    matrix: Option<PathBuf>,
}

#[derive(Args)]
struct SampleArgs {
    #[arg(long)]
    alpha: f64,
    #[arg(long, default_value_t = 1.0)]
    gamma: f64,
    #[arg(long, default_value_t = 1)]
    dim: usize,
    #[arg(long)]
    count: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Args)]
struct ExperimentArgs {
    #[arg(long)]
    config: PathBuf,
    /// Output directory for the CSV files and manifest.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct BoundArgs {
    #[arg(long)]
    k2: f64,
    #[arg(long)]
    d: usize,
    #[arg(long = "signal-length")]
    n: usize,
    #[arg(long)]
    m: usize,
    #[arg(long, default_value_t = 0.0)]
    delta: f64,
    #[arg(long, default_value_t = 1.0)]
    x_l2: f64,
    #[arg(long, default_value_t = 1.0)]
    kappa2: f64,
    #[arg(long, default_value_t = 1.0)]
    kappa3: f64,
}

fn estimate(args: &EstimateArgs, out: &mut impl Write) -> Result<()> {
    let noise = args.noise.model()?;
    if args.n1 == 0 || args.n_alpha == 0 {
        anyhow::bail!(blocksparse::Error::Parameter("n1 and n-alpha must be positive".into()));
    }
    StableSpec::new(1, args.alpha, args.gamma_alpha)?;
    StableSpec::new(1, 1.0, args.gamma1)?;
    let x = read_signal(&args.signal).with_context(|| format!("reading {}", args.signal.display()))?;
    let stream = RandomStream::new(args.seed, 0);
    let y1 = project(&x, 1.0, args.gamma1, args.n1, &noise, &stream.child(1))?;
    let ya = project(&x, args.alpha, args.gamma_alpha, args.n_alpha, &noise, &stream.child(2))?;
    let est = estimate_block_sparsity(&y1, &ya, args.eta0, args.beta)?;
    let truth = if args.truth { Some(block_sparsity(&x, args.alpha)?) } else { None };
    let report = EstimateReport::new(&est, args.seed, truth);
    let text = match args.format {
        Format::Kv => report.to_key_value(),
        Format::Csv => report.to_csv(),
    };
    out.write_all(text.as_bytes())?;
    Ok(())
}

fn measure(args: &MeasureArgs, out: &mut impl Write) -> Result<()> {
    let noise = args.noise.model()?;
    let x = read_signal(&args.signal).with_context(|| format!("reading {}", args.signal.display()))?;
    let stream = RandomStream::new(args.seed, 0);
    let set = match &args.matrix {
        Some(path) => {
            let (rows, set) = project_materialized(&x, args.alpha, args.gamma, args.n, &noise, &stream)?;
            let mut csv = String::new();
            for row in rows {
                let cells: Vec<String> = row.iter().map(f64::to_string).collect();
                let _ = writeln!(csv, "{}", cells.join(","));
            }
            fs::write(path, csv).with_context(|| format!("writing {}", path.display()))?;
            set
        }
        None => project(&x, args.alpha, args.gamma, args.n, &noise, &stream)?,
    };
    let mut text = String::with_capacity(24 * set.len());
    for v in &set.y {
        let _ = writeln!(text, "{v}");
    }
    match &args.out {
        Some(path) => fs::write(path, text).with_context(|| format!("writing {}", path.display()))?,
        None => out.write_all(text.as_bytes())?,
    }
    Ok(())
}

fn sample_stable(args: &SampleArgs, out: &mut impl Write) -> Result<()> {
    let spec = StableSpec::new(args.dim, args.alpha, args.gamma)?;
    let mut rng = RandomStream::new(args.seed, 0).rng();
    let mut text = String::new();
    for _ in 0..args.count {
        let cells: Vec<String> = sample_isotropic_vector(&spec, &mut rng).iter().map(f64::to_string).collect();
        let _ = writeln!(text, "{}", cells.join(","));
    }
    out.write_all(text.as_bytes())?;
    Ok(())
}

fn experiment(args: &ExperimentArgs, out: &mut impl Write) -> Result<()> {
    let text = fs::read_to_string(&args.config).with_context(|| format!("reading {}", args.config.display()))?;
    let cfg = ExperimentConfig::parse(&text).with_context(|| format!("in {}", args.config.display()))?;
    let result = experiments::run(&cfg)?;
    for path in experiments::write_outputs(&result, &cfg, &args.out)? {
        writeln!(out, "{}", path.display())?;
    }
    Ok(())
}

fn bound(args: &BoundArgs, out: &mut impl Write) -> Result<()> {
    let b = recovery_error_bound(args.k2, args.d, args.n, args.m, args.delta, args.x_l2, args.kappa2, args.kappa3)?;
    writeln!(out, "{b}")?;
    Ok(())
}

/// 3 for failures caused by the data, 2 for everything else.
fn exit_code(err: &anyhow::Error) -> u8 {
    let degenerate = err
        .chain()
        .any(|e| e.downcast_ref::<blocksparse::Error>().is_some_and(blocksparse::Error::is_degenerate));
    if degenerate {
        3
    } else {
        2
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let stdout = io::stdout();
    let mut out = stdout.lock();
    let result = match &cli.command {
        Command::Estimate(a) => estimate(a, &mut out),
        Command::Measure(a) => measure(a, &mut out),
        Command::SampleStable(a) => sample_stable(a, &mut out),
        Command::Experiment(a) => experiment(a, &mut out),
        Command::Bound(a) => bound(a, &mut out),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(exit_code(&err))
        }
    }
}
