//! The `qmarket` command line.
//!
//! Settings come from flags and an optional flat `key = value` file given
//! by `--config`; a flag always beats the file. Every command is a pure
//! function of its settings and input files, so reruns produce identical
//! bytes.

mod commands;
mod config;

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

pub use commands::{auto_grid, Artifact};
pub use config::ConfigFile;

use crate::decay::DEFAULT_VOLATILITY_WINDOW;
use crate::error::{Error, Result};
use crate::potential::{IntradayMode, Weighting};
use crate::solver::{ForecastMode, ModelParams};

pub const DEFAULT_GRID_K: usize = 200;
pub const DEFAULT_MIN_PROMINENCE: f64 = 0.2;

#[derive(Debug, Parser)]
#[command(name = "qmarket", version, about = "Quantum-well price forecasts from EOD volume")]
pub struct Cli {
    #[command(flatten)]
    pub common: CommonArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Validate the input and report rotation period, turnover and decay rate.
    Ingest,
    /// Write held-shares and potential profiles.
    Potential,
    /// Write eigenstates, energies and the forecast density.
    Forecast,
    /// Barrier, breakout, tunneling and migration analyses.
    Analyze {
        #[command(subcommand)]
        what: AnalyzeCommand,
    },
    /// Generate a reproducible synthetic EOD series.
    Synth(SynthArgs),
}

#[derive(Debug, Subcommand)]
pub enum AnalyzeCommand {
    Barriers,
    Breakout,
    Tunnel(TunnelArgs),
    Migrate(MigrateArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum DecayChoice {
    Const,
    Vol,
    Gauss,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum IntradayChoice {
    Close,
    Uniform,
    Gauss,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum WeightingChoice {
    Count,
    Price,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ForecastChoice {
    Ground,
    Boltzmann,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, ValueEnum)]
pub enum Format {
    #[default]
    Csv,
    Json,
}

impl Format {
    pub fn ext(self) -> &'static str {
        match self {
            Format::Csv => "csv",
            Format::Json => "json",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ProcessChoice {
    Channel,
    Trend,
    Bimodal,
}

#[derive(Debug, Clone, Default, Args)]
pub struct CommonArgs {
    /// Flat `key = value` settings file; flags override it.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// EOD CSV with header `date,open,high,low,close,volume`.
    #[arg(long, global = true)]
    pub input: Option<PathBuf>,
    /// Use a `price,value` potential file instead of building one from --input.
    #[arg(long, global = true)]
    pub potential: Option<PathBuf>,
    #[arg(long, global = true)]
    pub free_float: Option<f64>,
    #[arg(long, global = true)]
    pub grid_k: Option<usize>,
    #[arg(long, global = true)]
    pub grid_min: Option<f64>,
    #[arg(long, global = true)]
    pub grid_max: Option<f64>,
    #[arg(long, global = true, value_enum)]
    pub decay: Option<DecayChoice>,
    /// Constant decay rate; derived from turnover when omitted.
    #[arg(long, global = true)]
    pub lambda: Option<f64>,
    #[arg(long, global = true)]
    pub g_a: Option<f64>,
    #[arg(long, global = true)]
    pub g_b: Option<f64>,
    #[arg(long, global = true)]
    pub vol_window: Option<usize>,
    #[arg(long, global = true)]
    pub sigma_hold: Option<f64>,
    /// Days of history to accumulate; the rotation period when omitted.
    #[arg(long, global = true)]
    pub horizon: Option<usize>,
    #[arg(long, global = true, value_enum)]
    pub intraday: Option<IntradayChoice>,
    #[arg(long, global = true, value_enum)]
    pub weighting: Option<WeightingChoice>,
    /// Extra bins on each side summed into each potential value.
    #[arg(long, global = true)]
    pub neighbors: Option<usize>,
    #[arg(long, global = true)]
    pub hbar: Option<f64>,
    #[arg(long, global = true)]
    pub mass: Option<f64>,
    #[arg(long, global = true)]
    pub potential_scale: Option<f64>,
    #[arg(long, global = true)]
    pub states: Option<usize>,
    #[arg(long, global = true, value_enum)]
    pub forecast: Option<ForecastChoice>,
    #[arg(long, global = true)]
    pub temperature: Option<f64>,
    #[arg(long, global = true)]
    pub min_prominence: Option<f64>,
    /// Output directory; the main artifact goes to stdout when omitted.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, Default, Args)]
pub struct TunnelArgs {
    #[arg(long)]
    pub e_min: Option<f64>,
    #[arg(long)]
    pub e_max: Option<f64>,
    #[arg(long)]
    pub steps: Option<usize>,
    /// First bin of the scattering region.
    #[arg(long)]
    pub region_start: Option<usize>,
    /// Last bin of the scattering region, inclusive.
    #[arg(long)]
    pub region_end: Option<usize>,
}

#[derive(Debug, Clone, Default, Args)]
pub struct MigrateArgs {
    #[arg(long)]
    pub steps: Option<usize>,
    #[arg(long)]
    pub build_rate: Option<f64>,
    #[arg(long)]
    pub decay_rate: Option<f64>,
}

#[derive(Debug, Clone, Default, Args)]
pub struct SynthArgs {
    #[arg(long, value_enum)]
    pub process: Option<ProcessChoice>,
    #[arg(long)]
    pub days: Option<usize>,
    #[arg(long)]
    pub lower: Option<f64>,
    #[arg(long)]
    pub upper: Option<f64>,
    #[arg(long)]
    pub start: Option<f64>,
    #[arg(long)]
    pub drift: Option<f64>,
    #[arg(long)]
    pub vol: Option<f64>,
    /// Comma-separated peak prices for the bimodal process.
    #[arg(long)]
    pub peaks: Option<String>,
    #[arg(long)]
    pub weights: Option<String>,
    #[arg(long)]
    pub volume_mean: Option<f64>,
    #[arg(long)]
    pub volume_spread: Option<f64>,
}

/// Settings after merging flags, config file and defaults.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub input: Option<PathBuf>,
    pub potential: Option<PathBuf>,
    pub free_float: Option<f64>,
    pub grid_k: usize,
    pub grid_bounds: Option<(f64, f64)>,
    pub decay: DecayChoice,
    pub lambda: Option<f64>,
    pub g: Option<(f64, f64)>,
    pub vol_window: usize,
    pub sigma_hold: Option<f64>,
    pub horizon: Option<usize>,
    pub intraday: IntradayMode,
    pub weighting: Weighting,
    pub neighbors: usize,
    pub params: ModelParams,
    pub states: usize,
    pub forecast: ForecastMode,
    pub min_prominence: f64,
    pub out: Option<PathBuf>,
    pub format: Format,
    pub seed: u64,
}

const KNOWN_KEYS: &[&str] = &[
    "input", "potential", "free-float", "grid-k", "grid-min", "grid-max", "decay", "lambda", "g-a", "g-b",
    "vol-window", "sigma-hold", "horizon", "intraday", "weighting", "neighbors", "hbar", "mass",
    "potential-scale", "states", "forecast", "temperature", "min-prominence", "out", "format", "seed",
    "e-min", "e-max", "steps", "region-start", "region-end", "build-rate", "decay-rate", "process", "days",
    "lower", "upper", "start", "drift", "vol", "peaks", "weights", "volume-mean", "volume-spread",
];

fn pick_enum<T: ValueEnum>(cfg: &ConfigFile, flag: Option<T>, key: &str) -> Result<Option<T>> {
    if flag.is_some() {
        return Ok(flag);
    }
    cfg.get_raw(key)
        .map(|s| T::from_str(s, false).map_err(|_| Error::param(format!("config `{key} = {s}`: unknown value"))))
        .transpose()
}

impl RunConfig {
    pub fn resolve(args: &CommonArgs, cfg: &ConfigFile) -> Result<Self> {
        if let Some(key) = cfg.keys().find(|k| !KNOWN_KEYS.contains(k)) {
            return Err(Error::param(format!("unknown config key `{key}`")));
        }
        let grid_k = cfg.pick(args.grid_k, "grid-k")?.unwrap_or(DEFAULT_GRID_K);
        if grid_k < 2 {
            return Err(Error::param(format!("grid-k must be >= 2 (got {grid_k})")));
        }
        let grid_bounds = match (cfg.pick(args.grid_min, "grid-min")?, cfg.pick(args.grid_max, "grid-max")?) {
            (Some(lo), Some(hi)) if lo.is_finite() && hi.is_finite() && lo < hi => Some((lo, hi)),
            (None, None) => None,
            (lo, hi) => {
                return Err(Error::param(format!(
                    "grid-min and grid-max must be given together with min < max (got {lo:?}, {hi:?})"
                )))
            }
        };
        let free_float = cfg.pick(args.free_float, "free-float")?;
        if let Some(ff) = free_float {
            if !(ff.is_finite() && ff > 0.0) {
                return Err(Error::param(format!("free-float must be > 0 (got {ff})")));
            }
        }
        let decay = pick_enum(cfg, args.decay, "decay")?.unwrap_or(DecayChoice::Const);
        let lambda = cfg.pick(args.lambda, "lambda")?;
        if let Some(l) = lambda {
            if !(l.is_finite() && l >= 0.0) {
                return Err(Error::param(format!("lambda must be >= 0 (got {l})")));
            }
        }
        let g = match (cfg.pick(args.g_a, "g-a")?, cfg.pick(args.g_b, "g-b")?) {
            (Some(a), Some(b)) => Some((a, b)),
            (None, None) => None,
            _ => return Err(Error::param("g-a and g-b must be given together")),
        };
        let vol_window = cfg.pick(args.vol_window, "vol-window")?.unwrap_or(DEFAULT_VOLATILITY_WINDOW);
        if vol_window < 2 {
            return Err(Error::param("vol-window must be >= 2"));
        }
        let sigma_hold = cfg.pick(args.sigma_hold, "sigma-hold")?;
        if let Some(s) = sigma_hold {
            if !(s.is_finite() && s > 0.0) {
                return Err(Error::param(format!("sigma-hold must be > 0 (got {s})")));
            }
        }
        let intraday = match pick_enum(cfg, args.intraday, "intraday")? {
            Some(IntradayChoice::Close) => IntradayMode::ClosePoint,
            Some(IntradayChoice::Uniform) => IntradayMode::Uniform,
            Some(IntradayChoice::Gauss) | None => IntradayMode::TruncatedGaussian,
        };
        let weighting = match pick_enum(cfg, args.weighting, "weighting")? {
            Some(WeightingChoice::Price) => Weighting::AsWritten,
            Some(WeightingChoice::Count) | None => Weighting::PureCount,
        };
        let defaults = ModelParams::default();
        let params = ModelParams {
            hbar_eff: cfg.pick(args.hbar, "hbar")?.unwrap_or(defaults.hbar_eff),
            mass: cfg.pick(args.mass, "mass")?.unwrap_or(defaults.mass),
            potential_scale: cfg.pick(args.potential_scale, "potential-scale")?.unwrap_or(defaults.potential_scale),
        };
        params.validate()?;
        let states = cfg.pick(args.states, "states")?.unwrap_or(1);
        if states == 0 || states > grid_k {
            return Err(Error::param(format!("states must lie in 1..={grid_k} (got {states})")));
        }
        let temperature = cfg.pick(args.temperature, "temperature")?;
        let forecast = match pick_enum(cfg, args.forecast, "forecast")? {
            Some(ForecastChoice::Boltzmann) => {
                let t = temperature.ok_or_else(|| Error::param("boltzmann forecast needs --temperature"))?;
                if !(t.is_finite() && t > 0.0) {
                    return Err(Error::param(format!("temperature must be > 0 (got {t})")));
                }
                ForecastMode::BoltzmannMixture { temperature: t }
            }
            Some(ForecastChoice::Ground) | None => ForecastMode::GroundState,
        };
        let min_prominence = cfg.pick(args.min_prominence, "min-prominence")?.unwrap_or(DEFAULT_MIN_PROMINENCE);
        if !(min_prominence > 0.0 && min_prominence <= 1.0) {
            return Err(Error::param(format!("min-prominence must lie in (0, 1] (got {min_prominence})")));
        }
        Ok(RunConfig {
            input: cfg.pick(args.input.clone(), "input")?,
            potential: cfg.pick(args.potential.clone(), "potential")?,
            free_float,
            grid_k,
            grid_bounds,
            decay,
            lambda,
            g,
            vol_window,
            sigma_hold,
            horizon: cfg.pick(args.horizon, "horizon")?,
            intraday,
            weighting,
            neighbors: cfg.pick(args.neighbors, "neighbors")?.unwrap_or(0),
            params,
            states,
            forecast,
            min_prominence,
            out: cfg.pick(args.out.clone(), "out")?,
            format: pick_enum(cfg, args.format, "format")?.unwrap_or_default(),
            seed: cfg.pick(args.seed, "seed")?.unwrap_or(0),
        })
    }
}

/// Runs a parsed command line and returns the artifacts it produced,
/// primary artifact first.
pub fn execute(cli: &Cli) -> Result<(RunConfig, Vec<Artifact>)> {
    let file = match &cli.common.config {
        Some(path) => ConfigFile::load(path)?,
        None => ConfigFile::default(),
    };
    let config = RunConfig::resolve(&cli.common, &file)?;
    let artifacts = match &cli.command {
        Command::Ingest => commands::ingest(&config)?,
        Command::Potential => commands::potential(&config)?,
        Command::Forecast => commands::forecast(&config)?,
        Command::Analyze { what } => match what {
            AnalyzeCommand::Barriers => commands::barriers(&config)?,
            AnalyzeCommand::Breakout => commands::breakout(&config)?,
            AnalyzeCommand::Tunnel(t) => commands::tunnel(&config, t, &file)?,
            AnalyzeCommand::Migrate(m) => commands::migrate(&config, m, &file)?,
        },
        Command::Synth(s) => commands::synth(&config, s, &file)?,
    };
    Ok((config, artifacts))
}

fn write_outputs(config: &RunConfig, artifacts: &[Artifact]) -> Result<()> {
    match &config.out {
        Some(dir) => {
            std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
            for a in artifacts {
                crate::io::write_file(dir.join(&a.name), &a.contents)?;
            }
            Ok(())
        }
        None => {
            let mut stdout = std::io::stdout().lock();
            if let Some(first) = artifacts.first() {
                stdout
                    .write_all(first.contents.as_bytes())
                    .map_err(|e| Error::io("<stdout>", e))?;
            }
            Ok(())
        }
    }
}

fn wants_json<I: AsRef<std::ffi::OsStr>>(args: &[I]) -> bool {
    args.windows(2).any(|w| w[0].as_ref() == "--format" && w[1].as_ref() == "json")
        || args.iter().any(|a| a.as_ref() == "--format=json")
}

fn report_error(json: bool, code: &str, message: &str) {
    if json {
        let body = serde_json::json!({ "error_code": code, "message": message });
        eprintln!("{body}");
    } else {
        eprintln!("error [{code}]: {message}");
    }
}

/// Entry point used by the binary; returns the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let args: Vec<OsString> = args.into_iter().map(Into::into).collect();
    let cli = match Cli::try_parse_from(&args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                let _ = e.print();
                return 0;
            }
            if wants_json(&args) {
                report_error(true, "usage", e.to_string().trim());
            } else {
                let _ = e.print();
            }
            return 2;
        }
    };
    let outcome = execute(&cli).and_then(|(config, artifacts)| write_outputs(&config, &artifacts));
    match outcome {
        Ok(()) => 0,
        Err(e) => {
            let json = cli.common.format == Some(Format::Json) || wants_json(&args);
            report_error(json, e.code(), &e.to_string());
            1
        }
    }
}
