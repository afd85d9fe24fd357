//! `opshrink` command-line front end.
//!
//! Exit codes: 0 success, 1 internal failure, 2 input/output problems,
//! 3 invalid configuration or arguments.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use opshrink::asymptotics::{component_from_sigma, AspectRatio};
use opshrink::denoiser::{denoise, DenoiseReport, DEFAULT_DETECTION_TOLERANCE};
use opshrink::io::{read_matrix, write_matrix, MatrixFormat};
use opshrink::shrinker::{gd_loss, optimal_loss, optimal_q_from_sigma, BlockParams, ShrinkerKind};
use opshrink::sim::experiments::{parse_config, parse_grid, run_experiment, ExperimentConfig};
use opshrink::sim::{write_curve_table, FactorLaw};
use opshrink::{DataMatrix, Error, Result};

const EXIT_INTERNAL: u8 = 1;
const EXIT_IO: u8 = 2;
const EXIT_CONFIG: u8 = 3;

#[derive(Debug, Parser)]
#[command(
    name = "opshrink",
    version,
    about = "Operator-norm optimal singular value shrinkage"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Denoise a matrix read from disk and write the estimate in the same format.
    Denoise(DenoiseArgs),
    /// Print the limiting quantities for one observed singular value as a CSV row:
    /// sigma,gamma,detectable,t,c,c_tilde,q_optimal,loss_optimal,loss_gd
    Asymptotics(AsymptoticsArgs),
    /// Optimal and q = t shrinkers and their losses over a sigma grid.
    Curves(CurvesArgs),
    /// Optimal-to-baseline error ratio along t = gamma^(1/4) + 0.05.
    RatioSweep(RatioSweepArgs),
    /// Errors of the best linear predictor and both shrinkers as n grows.
    BlpConvergence(BlpArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum FormatArg {
    Csv,
    Bin,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ShrinkerArg {
    Optimal,
    OracleT,
    None,
    Hard,
}

impl From<ShrinkerArg> for ShrinkerKind {
    fn from(s: ShrinkerArg) -> Self {
        match s {
            ShrinkerArg::Optimal => ShrinkerKind::Optimal,
            ShrinkerArg::OracleT => ShrinkerKind::OracleTruth,
            ShrinkerArg::None => ShrinkerKind::NoShrink,
            ShrinkerArg::Hard => ShrinkerKind::HardThreshold,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum FactorLawArg {
    Gaussian,
    Rademacher,
}

impl From<FactorLawArg> for FactorLaw {
    fn from(f: FactorLawArg) -> Self {
        match f {
            FactorLawArg::Gaussian => FactorLaw::Gaussian,
            FactorLawArg::Rademacher => FactorLaw::Rademacher,
        }
    }
}

#[derive(Debug, Args)]
struct DenoiseArgs {
    /// Input matrix, one row per line (CSV) or OPSK binary.
    input: PathBuf,
    /// Output path for the estimate.
    output: PathBuf,
    /// Shrinkage rule.
    #[arg(long, value_enum, default_value_t = ShrinkerArg::Optimal)]
    shrinker: ShrinkerArg,
    /// Noise standard deviation times sqrt(n), in data units.
    #[arg(long, default_value_t = 1.0)]
    noise_scale: f64,
    /// Relative slack above the bulk edge before a component counts as signal.
    #[arg(long, default_value_t = DEFAULT_DETECTION_TOLERANCE)]
    tolerance: f64,
    /// Matrix file format for input and output.
    #[arg(long, value_enum, default_value_t = FormatArg::Csv)]
    format: FormatArg,
    /// The CSV input starts with a header row; it is copied to the output.
    #[arg(long)]
    header: bool,
    /// Write a key=value report of the estimate to this path.
    #[arg(long)]
    report: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct AsymptoticsArgs {
    /// Observed singular value, in noise units.
    #[arg(long)]
    sigma: f64,
    /// Aspect ratio p/n.
    #[arg(long)]
    gamma: f64,
}

#[derive(Debug, Args)]
struct CommonExperimentArgs {
    /// Output CSV path.
    #[arg(long)]
    out: PathBuf,
    /// Flat key=value file; command-line flags override its settings.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Master seed [default: 20200604].
    #[arg(long)]
    seed: Option<u64>,
    /// Comma-separated grid overriding the experiment default.
    #[arg(long)]
    grid: Option<String>,
}

#[derive(Debug, Args)]
struct SimulationArgs {
    /// Law of the right factor scores.
    #[arg(long, value_enum)]
    factor_law: Option<FactorLawArg>,
    /// Use canonical basis vectors instead of random signal directions.
    #[arg(long)]
    deterministic_signal: bool,
}

#[derive(Debug, Args)]
struct CurvesArgs {
    #[command(flatten)]
    common: CommonExperimentArgs,
    /// Aspect ratio p/n [default: 0.5]. Default sigma grid: 100 points from edge + 0.01 in steps of 0.04.
    #[arg(long)]
    gamma: Option<f64>,
}

#[derive(Debug, Args)]
struct RatioSweepArgs {
    #[command(flatten)]
    common: CommonExperimentArgs,
    #[command(flatten)]
    sim: SimulationArgs,
    /// Monte Carlo replicates per gamma; 0 writes the analytic columns only [default: 0].
    #[arg(long)]
    replicates: Option<usize>,
    /// Rows of the simulated matrices; n = round(p / gamma) [default: 50].
    #[arg(long)]
    p: Option<usize>,
}

#[derive(Debug, Args)]
struct BlpArgs {
    #[command(flatten)]
    common: CommonExperimentArgs,
    #[command(flatten)]
    sim: SimulationArgs,
    /// Replicates per n [default: 200, or 4000 with --paper-scale].
    #[arg(long)]
    replicates: Option<usize>,
    /// Rows of the simulated matrices [default: 50, or 100 with --paper-scale].
    #[arg(long)]
    p: Option<usize>,
    /// Spike strength [default: 1.1].
    #[arg(long)]
    t: Option<f64>,
    /// Start from p = 100 and 4000 replicates instead of the desk-scale defaults.
    #[arg(long)]
    paper_scale: bool,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(EXIT_CONFIG)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("opshrink: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}

fn exit_code(e: &Error) -> u8 {
    match e {
        _ if e.is_io() => EXIT_IO,
        Error::Internal(_) | Error::Linalg(_) => EXIT_INTERNAL,
        _ => EXIT_CONFIG,
    }
}

fn run(command: Command) -> Result<()> {
    match command {
        Command::Denoise(args) => cmd_denoise(&args),
        Command::Asymptotics(args) => {
            println!("{}", asymptotics_row(args.sigma, args.gamma)?);
            Ok(())
        }
        Command::Curves(args) => {
            let mut cfg = ExperimentConfig::shrinker_curves();
            apply_common(&mut cfg, &args.common)?;
            if let Some(g) = args.gamma {
                cfg.gamma = g;
            }
            run_and_write(&cfg, &args.common.out)
        }
        Command::RatioSweep(args) => {
            let mut cfg = ExperimentConfig::ratio_sweep();
            apply_common(&mut cfg, &args.common)?;
            apply_simulation(&mut cfg, &args.sim);
            if let Some(r) = args.replicates {
                cfg.replicates = r;
            }
            if let Some(p) = args.p {
                cfg.p = p;
            }
            run_and_write(&cfg, &args.common.out)
        }
        Command::BlpConvergence(args) => {
            let mut cfg = if args.paper_scale {
                ExperimentConfig::blp_convergence_full_scale()
            } else {
                ExperimentConfig::blp_convergence()
            };
            apply_common(&mut cfg, &args.common)?;
            apply_simulation(&mut cfg, &args.sim);
            if let Some(r) = args.replicates {
                cfg.replicates = r;
            }
            if let Some(p) = args.p {
                cfg.p = p;
            }
            if let Some(t) = args.t {
                cfg.strength = t;
            }
            run_and_write(&cfg, &args.common.out)
        }
    }
}

/// Config file first, then explicit flags.
fn apply_common(cfg: &mut ExperimentConfig, args: &CommonExperimentArgs) -> Result<()> {
    if let Some(path) = &args.config {
        let text = fs::read_to_string(path).map_err(|e| Error::Io {
            path: path.clone(),
            source: e,
        })?;
        for (k, v) in parse_config(&text)? {
            cfg.set(&k, &v)
                .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        }
    }
    if let Some(seed) = args.seed {
        cfg.seed = seed;
    }
    if let Some(grid) = &args.grid {
        cfg.grid = Some(parse_grid(grid)?);
    }
    Ok(())
}

fn apply_simulation(cfg: &mut ExperimentConfig, args: &SimulationArgs) {
    if let Some(law) = args.factor_law {
        cfg.factor_law = law.into();
    }
    if args.deterministic_signal {
        cfg.deterministic_signal = true;
    }
}

fn run_and_write(cfg: &ExperimentConfig, out: &Path) -> Result<()> {
    let table = run_experiment(cfg)?;
    write_curve_table(&table, out)
}

fn asymptotics_row(sigma: f64, gamma: f64) -> Result<String> {
    if !sigma.is_finite() || !gamma.is_finite() {
        return Err(Error::Domain(format!(
            "sigma and gamma must be finite, got {sigma} and {gamma}"
        )));
    }
    let gamma = AspectRatio::new(gamma)?;
    let a = component_from_sigma(sigma, gamma)?;
    let q = optimal_q_from_sigma(sigma, gamma)?;
    let (loss_optimal, loss_gd) = if a.detectable {
        let b = BlockParams::from_asymptotics(&a)?;
        (optimal_loss(&b), gd_loss(&b))
    } else {
        (0.0, 0.0)
    };
    Ok(format!(
        "{sigma},{},{},{},{},{},{q},{loss_optimal},{loss_gd}",
        gamma.value(),
        a.detectable,
        a.t,
        a.c,
        a.c_tilde
    ))
}

fn cmd_denoise(args: &DenoiseArgs) -> Result<()> {
    let format = match args.format {
        FormatArg::Csv => MatrixFormat::Csv {
            header: args.header,
        },
        FormatArg::Bin => MatrixFormat::Binary,
    };
    if args.header && format == MatrixFormat::Binary {
        return Err(Error::Config("--header applies to CSV input only".into()));
    }
    let loaded = read_matrix(&args.input, format)?;
    let y = DataMatrix::new(loaded.values, args.noise_scale)?;
    let (estimate, report) = denoise(&y, &args.shrinker.into(), args.tolerance)?;

    let mut written = Vec::new();
    let result = (|| {
        write_atomically(&args.output, |tmp| {
            write_matrix(tmp, estimate.values(), format, loaded.header.as_deref())
        })?;
        written.push(args.output.clone());
        if let Some(path) = &args.report {
            let text = render_report(&report, y.nrows(), y.ncols(), args.tolerance);
            write_atomically(path, |tmp| {
                fs::write(tmp, text.as_bytes()).map_err(|e| Error::Io {
                    path: tmp.to_path_buf(),
                    source: e,
                })
            })?;
        }
        Ok(())
    })();
    if result.is_err() {
        for path in &written {
            let _ = fs::remove_file(path);
        }
    }
    result
}

/// Writes via a sibling `.partial` file that is renamed into place.
fn write_atomically(path: &Path, write: impl FnOnce(&Path) -> Result<()>) -> Result<()> {
    let mut name = path
        .file_name()
        .map(|n| n.to_os_string())
        .unwrap_or_default();
    name.push(".partial");
    let tmp = path.with_file_name(name);
    let result = write(&tmp).and_then(|()| {
        fs::rename(&tmp, path).map_err(|e| Error::Io {
            path: path.to_path_buf(),
            source: e,
        })
    });
    if result.is_err() {
        let _ = fs::remove_file(&tmp);
    }
    result
}

fn render_report(report: &DenoiseReport, p: usize, n: usize, tolerance: f64) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "shrinker={}", report.shrinker);
    let _ = writeln!(out, "rows={p}");
    let _ = writeln!(out, "cols={n}");
    let _ = writeln!(out, "gamma={}", report.gamma_used);
    let _ = writeln!(out, "noise_scale={}", report.noise_scale);
    let _ = writeln!(out, "tolerance={tolerance}");
    let _ = writeln!(out, "detected_rank={}", report.detected_rank);
    let _ = writeln!(out, "predicted_loss={}", report.predicted_loss);
    for (k, c) in report.per_component.iter().enumerate() {
        let k = k + 1;
        let _ = writeln!(out, "component.{k}.sigma={}", c.sigma_observed);
        let _ = writeln!(out, "component.{k}.t_hat={}", c.t_hat);
        let _ = writeln!(out, "component.{k}.c={}", c.c_hat);
        let _ = writeln!(out, "component.{k}.c_tilde={}", c.c_tilde_hat);
        let _ = writeln!(out, "component.{k}.q={}", c.q_applied);
    }
    out
}
