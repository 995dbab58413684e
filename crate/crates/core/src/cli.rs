//! The `lrdwave` command line: `simulate`, `estimate`, `montecarlo` and
//! `gamma`.
//!
//! Exit codes: 0 success, 2 usage, 3 numerical failure, 4 I/O failure.

use std::ffi::OsString;
use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::estimation::{estimate, EstimatorConfig, GammaSource};
use crate::harness::{self, McConfig, ProcessId};
use crate::reference::{default_bandwidth, fexp_estimate, local_whittle};
use crate::synthesis::io::{read_series, write_csv, write_series};
use crate::synthesis::{generate, Density, Innovation, ProcessModel};
use crate::wavelet::sigma2_grid;

/// Series below this length leave the stage-one scale grid too thin.
pub const MIN_ESTIMATE_LEN: usize = 500;

#[derive(Debug, Parser)]
#[command(name = "lrdwave", version, about = "Adaptive wavelet estimation of the long-memory parameter")]
pub struct Cli {
    /// Worker threads for parallel sections.
    #[arg(long, global = true, env = "LRDWAVE_THREADS")]
    pub threads: Option<usize>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a series and write it as CSV or binary.
    Simulate(SimulateArgs),
    /// Estimate d from a series file and print a JSON report.
    Estimate(EstimateArgs),
    /// Run a Monte-Carlo ensemble from a JSON configuration.
    Montecarlo(MonteCarloArgs),
    /// Tabulate σ²_d(ℓ) over a grid of d and ℓ as CSV.
    Gamma(GammaArgs),
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum ProcessArg {
    Fgn,
    Farima,
    F3,
    Garma,
    Flat,
    Mfarima,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum InnovationArg {
    Gaussian,
    Uniform,
    Burr,
    Cauchy,
}

impl From<InnovationArg> for Innovation {
    fn from(v: InnovationArg) -> Self {
        match v {
            InnovationArg::Gaussian => Innovation::Gaussian,
            InnovationArg::Uniform => Innovation::Uniform,
            InnovationArg::Burr => Innovation::Burr,
            InnovationArg::Cauchy => Innovation::Cauchy,
        }
    }
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[arg(long, value_enum, conflicts_with_all = ["model", "benchmark"], required_unless_present_any = ["model", "benchmark"])]
    pub process: Option<ProcessArg>,
    /// A benchmark id such as X2 or TREND.
    #[arg(long, conflicts_with = "model")]
    pub benchmark: Option<String>,
    /// JSON file holding a process model.
    #[arg(long)]
    pub model: Option<PathBuf>,
    /// Memory parameter.
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    pub d: f64,
    /// Hurst index for fgn; defaults to d + 1/2.
    #[arg(long)]
    pub hurst: Option<f64>,
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub ar: Vec<f64>,
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub ma: Vec<f64>,
    #[arg(long, value_enum, default_value = "gaussian")]
    pub innovation: InnovationArg,
    /// Correction exponent for f3.
    #[arg(long, default_value_t = 1.0)]
    pub d_prime: f64,
    /// Add the trend 1 − 2t/n.
    #[arg(long)]
    pub trend: bool,
    /// Add sin(πt/6).
    #[arg(long)]
    pub seasonal: bool,
    #[arg(long)]
    pub n: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Output file; `.bin`, `.f64` or `.dat` selects binary. CSV to stdout when absent.
    #[arg(long, short)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum EstimatorArg {
    Wavelet,
    Lw,
    Fexp,
}

#[derive(Debug, Args)]
pub struct EstimateArgs {
    /// Series file, CSV or binary by extension.
    pub input: PathBuf,
    #[arg(long, value_enum, default_value = "wavelet")]
    pub estimator: EstimatorArg,
    /// Level of the goodness-of-fit test.
    #[arg(long, default_value_t = 0.95)]
    pub level: f64,
    /// Bound on the stage-two regression size.
    #[arg(long)]
    pub ell2_cap: Option<usize>,
    /// Local Whittle bandwidth; N/30 when absent.
    #[arg(long)]
    pub bandwidth: Option<usize>,
    /// FEXP penalty weight.
    #[arg(long, default_value_t = 2.0)]
    pub kappa: f64,
    /// Write the stage-two (log a, log T) points as CSV.
    #[arg(long)]
    pub emit_variogram: Option<PathBuf>,
    /// JSON destination; stdout when absent.
    #[arg(long, short)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct MonteCarloArgs {
    /// JSON configuration; defaults apply to missing keys and to a missing file.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// 25 replications at N = 1000.
    #[arg(long)]
    pub quick: bool,
    /// Restrict to these processes, e.g. `X1,X2`.
    #[arg(long, value_delimiter = ',')]
    pub only: Vec<String>,
    #[arg(long)]
    pub replications: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Parent of the run directory.
    #[arg(long, default_value = "runs")]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct GammaArgs {
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true,
          default_value = "0,0.05,0.1,0.15,0.2,0.25,0.3,0.35,0.4,0.45")]
    pub d: Vec<f64>,
    #[arg(long, value_delimiter = ',', default_value = "10,20,50,100,200,500")]
    pub ell: Vec<usize>,
    /// CSV destination; stdout when absent.
    #[arg(long, short)]
    pub output: Option<PathBuf>,
}

/// Exit status for a failed command.
pub fn exit_code(e: &Error) -> i32 {
    if e.is_io() {
        4
    } else if e.is_numeric() {
        3
    } else {
        2
    }
}

fn emit(output: Option<&Path>, text: &str) -> Result<()> {
    match output {
        Some(p) => fs::write(p, text)?,
        None => io::stdout().lock().write_all(text.as_bytes())?,
    }
    Ok(())
}

pub fn simulate_model(args: &SimulateArgs) -> Result<ProcessModel> {
    let base = if let Some(path) = &args.model {
        serde_json::from_str(&fs::read_to_string(path)?)?
    } else if let Some(id) = &args.benchmark {
        id.parse::<ProcessId>()?.model(args.d)
    } else {
        let d = args.d;
        match args.process.expect("clap enforces a process") {
            ProcessArg::Fgn => ProcessModel::fgn(args.hurst.unwrap_or(d + 0.5)),
            ProcessArg::Farima => ProcessModel::Farima {
                d,
                ar: args.ar.clone(),
                ma: args.ma.clone(),
                innovation: args.innovation.into(),
            },
            ProcessArg::F3 => ProcessModel::Spectral {
                density: Density::F3 { d_prime: args.d_prime },
                d,
            },
            ProcessArg::Garma => ProcessModel::Spectral { density: Density::Garma, d },
            ProcessArg::Flat => ProcessModel::Spectral { density: Density::Flat, d },
            ProcessArg::Mfarima => ProcessModel::Mfarima {
                d_first: 0.1,
                d_second: 0.4,
            },
        }
    };
    let model = if args.trend || args.seasonal {
        ProcessModel::Contaminated {
            base: Box::new(base),
            trend: args.trend,
            seasonal: args.seasonal,
        }
    } else {
        base
    };
    model.validate()?;
    Ok(model)
}

pub fn cmd_simulate(args: &SimulateArgs) -> Result<()> {
    let model = simulate_model(args)?;
    let ts = generate(&model, args.n, args.seed)?;
    match &args.output {
        Some(p) => write_series(p, &ts.values),
        None => write_csv(io::stdout().lock(), &ts.values),
    }
}

/// The JSON report for one estimator run on `x`.
pub fn estimate_report(x: &[f64], args: &EstimateArgs) -> Result<Value> {
    let n = x.len();
    match args.estimator {
        EstimatorArg::Wavelet => {
            if n < MIN_ESTIMATE_LEN {
                return Err(Error::invalid(format!("wavelet estimation needs at least {MIN_ESTIMATE_LEN} points, got {n}")));
            }
            let config = EstimatorConfig {
                level: args.level,
                ell2_cap: args.ell2_cap,
                ..EstimatorConfig::default()
            };
            let report = estimate(x, &config, GammaSource::Exact)?;
            if let Some(path) = &args.emit_variogram {
                let mut w = csv::Writer::from_path(path)?;
                w.write_record(["log_a", "log_t"])?;
                for (a, lt) in report.scales.iter().zip(&report.log_t_values) {
                    w.write_record([(*a as f64).ln().to_string(), lt.to_string()])?;
                }
                w.flush()?;
            }
            let mut value = serde_json::to_value(&report)?;
            value["estimator"] = json!("WAVELET_PGLS");
            value["gof_accepted"] = json!(report.gof_accepted());
            Ok(value)
        }
        EstimatorArg::Lw => {
            let m = args.bandwidth.unwrap_or_else(|| default_bandwidth(n));
            let d = local_whittle(x, m)?;
            Ok(json!({ "estimator": "LOCAL_WHITTLE", "n": n, "d": d, "bandwidth": m }))
        }
        EstimatorArg::Fexp => {
            let fit = fexp_estimate(x, args.kappa)?;
            Ok(json!({
                "estimator": "FEXP",
                "n": n,
                "d": fit.d,
                "order": fit.order,
                "kappa": args.kappa,
                "criterion": fit.criterion,
            }))
        }
    }
}

pub fn cmd_estimate(args: &EstimateArgs) -> Result<()> {
    if args.emit_variogram.is_some() && args.estimator != EstimatorArg::Wavelet {
        return Err(Error::invalid("--emit-variogram applies to the wavelet estimator only"));
    }
    let x = read_series(&args.input)?;
    let report = estimate_report(&x, args)?;
    emit(args.output.as_deref(), &(serde_json::to_string_pretty(&report)? + "\n"))
}

pub fn montecarlo_config(args: &MonteCarloArgs) -> Result<McConfig> {
    let mut config = match &args.config {
        Some(p) => serde_json::from_str(&fs::read_to_string(p)?)?,
        None => McConfig::default(),
    };
    if args.quick {
        let quick = McConfig::quick();
        config.replications = quick.replications;
        config.n_values = quick.n_values;
    }
    if !args.only.is_empty() {
        let only = args.only.iter().map(|s| s.parse()).collect::<Result<Vec<ProcessId>>>()?;
        config.processes = only;
    }
    if let Some(r) = args.replications {
        config.replications = r;
    }
    if let Some(s) = args.seed {
        config.base_seed = s;
    }
    config.validate()?;
    Ok(config)
}

pub fn cmd_montecarlo(args: &MonteCarloArgs) -> Result<PathBuf> {
    let config = montecarlo_config(args)?;
    let total = config.cells().len();
    let mut done = 0;
    let summary = harness::run_with_progress(&config, |cell| {
        done += 1;
        eprintln!(
            "[{done}/{total}] {} d={} N={} ({:.1}s)",
            cell.cell.process,
            cell.cell.d.map(|d| d.to_string()).unwrap_or_else(|| "-".into()),
            cell.cell.n,
            cell.wall_seconds
        );
    })?;
    let paths = harness::write_run(&summary, &args.out)?;
    eprint!("{}", harness::render_table(&summary));
    println!("{}", paths.dir.display());
    Ok(paths.dir)
}

pub fn cmd_gamma(args: &GammaArgs) -> Result<()> {
    if let Some(d) = args.d.iter().find(|d| !(**d < 0.5 && **d > -0.5)) {
        return Err(Error::invalid(format!("d must lie in (−1/2, 1/2), got {d}")));
    }
    if let Some(l) = args.ell.iter().find(|l| **l < 2) {
        return Err(Error::invalid(format!("ℓ must be at least 2, got {l}")));
    }
    let rows = sigma2_grid(&args.d, &args.ell)?;
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["d", "ell", "sigma2"])?;
    for (d, ell, s2) in rows {
        w.write_record([d.to_string(), ell.to_string(), format!("{s2:.10e}")])?;
    }
    let bytes = w.into_inner().map_err(|e| io::Error::other(e.to_string()))?;
    emit(args.output.as_deref(), &String::from_utf8(bytes).expect("utf-8"))
}

pub fn run(cli: &Cli) -> Result<()> {
    if let Some(t) = cli.threads {
        if t == 0 {
            return Err(Error::invalid("--threads must be at least 1"));
        }
        // Fails only if a pool already exists, which leaves the old size in place.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(t).build_global();
    }
    match &cli.command {
        Command::Simulate(a) => cmd_simulate(a),
        Command::Estimate(a) => cmd_estimate(a),
        Command::Montecarlo(a) => cmd_montecarlo(a).map(|_| ()),
        Command::Gamma(a) => cmd_gamma(a),
    }
}

/// Parses `args`, runs the command, reports errors on stderr and returns
/// the exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    match run(&cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}
