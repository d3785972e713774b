use std::fmt::Write as _;

use chrono::NaiveDate;
use serde::Serialize;

use super::{ConfigFile, DecayChoice, Format, MigrateArgs, ProcessChoice, RunConfig, SynthArgs, TunnelArgs};
use crate::analysis::{
    breakout_direction, center_of_mass, detect_barriers, run_migration, tunneling_sweep, MigrationRates,
};
use crate::decay::{calibrate_g, decay_constant, free_float_rotation_period, turnover_probability, DecayLaw};
use crate::error::{Error, Result};
use crate::grid::{build_price_grid, PriceGrid};
use crate::io;
use crate::market_data::{mean_daily_volume, read_eod_csv, to_csv, validate_series, MarketSeries};
use crate::potential::{accumulate_held_shares, potential_from_held_shares, HeldSharesProfile, PotentialProfile};
use crate::solver::{assemble_hamiltonian, forecast_density, solve_eigenpairs, ForecastDensity, ForecastMode};
use crate::synthetic::{generate_series, PriceProcess, SyntheticSpec, VolumeSpec};

/// One output file.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Artifact {
    pub name: String,
    pub contents: String,
}

fn artifact(stem: &str, format: Format, contents: String) -> Artifact {
    Artifact {
        name: format!("{stem}.{}", format.ext()),
        contents,
    }
}

/// `field,value` rows.
fn fields_csv(rows: &[(&str, String)]) -> String {
    let mut out = String::from("field,value\n");
    for (k, v) in rows {
        let _ = writeln!(out, "{k},{v}");
    }
    out
}

fn load_series(config: &RunConfig) -> Result<MarketSeries> {
    let input = config
        .input
        .as_ref()
        .ok_or_else(|| Error::param("--input is required"))?;
    let free_float = config
        .free_float
        .ok_or_else(|| Error::param("--free-float is required"))?;
    let series = validate_series(read_eod_csv(input)?, free_float)?;
    if series.is_empty() {
        return Err(Error::param(format!("{} has no bars", input.display())));
    }
    Ok(series)
}

fn horizon(config: &RunConfig, series: &MarketSeries) -> Result<usize> {
    match config.horizon {
        Some(t) => Ok(t),
        None => free_float_rotation_period(series),
    }
}

/// `[min low, max high]` of the last `window` bars, widened by one bin on
/// each side of a `k`-bin grid.
pub fn auto_grid(series: &MarketSeries, window: usize, k: usize) -> Result<PriceGrid> {
    if k < 3 {
        return Err(Error::param("automatic grid bounds need grid-k >= 3"));
    }
    let (mut lo, mut hi) = series
        .price_range(window)
        .ok_or_else(|| Error::param("no bars to size the grid"))?;
    if hi <= lo {
        let half = (lo.abs() * 5e-3).max(1e-6);
        lo -= half;
        hi += half;
    }
    // k bins of width w spanning [lo - w, hi + w]
    let pad = (hi - lo) / (k - 2) as f64;
    build_price_grid(lo - pad, hi + pad, k)
}

fn turnover_lambda(series: &MarketSeries, rotation: usize) -> Result<(f64, f64, f64)> {
    let v_m = mean_daily_volume(series, rotation.min(series.len()))?;
    let p = turnover_probability(v_m, series.free_float())?;
    Ok((v_m, p, decay_constant(p)?))
}

fn decay_law(config: &RunConfig, series: &MarketSeries, horizon: usize) -> Result<DecayLaw> {
    let law = match config.decay {
        DecayChoice::Const => DecayLaw::ConstantExponential {
            lambda: match config.lambda {
                Some(l) => l,
                None => turnover_lambda(series, horizon.max(1))?.2,
            },
        },
        DecayChoice::Vol => {
            let (a, b) = match config.g {
                Some(g) => g,
                None => calibrate_g(series, config.vol_window)?,
            };
            DecayLaw::VolatilityLinked {
                a,
                b,
                window: config.vol_window,
            }
        }
        DecayChoice::Gauss => DecayLaw::GaussianHolding {
            sigma_hold: config.sigma_hold.unwrap_or((horizon.max(1)) as f64 / 2.0),
        },
    };
    law.validate()?;
    Ok(law)
}

fn build_profiles(config: &RunConfig) -> Result<(HeldSharesProfile, PotentialProfile)> {
    let series = load_series(config)?;
    let horizon = horizon(config, &series)?;
    let grid = match config.grid_bounds {
        Some((lo, hi)) => build_price_grid(lo, hi, config.grid_k)?,
        None => auto_grid(&series, horizon + 1, config.grid_k)?,
    };
    let law = decay_law(config, &series, horizon)?;
    let held = accumulate_held_shares(&series, &grid, &law, config.intraday, Some(horizon))?;
    let potential = potential_from_held_shares(&held, config.weighting, config.neighbors)?;
    Ok((held, potential))
}

fn load_potential(config: &RunConfig) -> Result<PotentialProfile> {
    match &config.potential {
        Some(path) => io::read_potential_csv(path),
        None => Ok(build_profiles(config)?.1),
    }
}

fn density_for(config: &RunConfig, potential: &PotentialProfile) -> Result<ForecastDensity> {
    let m = match config.forecast {
        ForecastMode::GroundState => 1,
        ForecastMode::BoltzmannMixture { .. } => config.states,
    };
    let h = assemble_hamiltonian(&potential.grid, potential, &config.params)?;
    forecast_density(&solve_eigenpairs(&h, m)?, config.forecast)
}

#[derive(Serialize)]
struct IngestReport {
    bars: usize,
    first_date: NaiveDate,
    last_date: NaiveDate,
    free_float: f64,
    rotation_period: usize,
    mean_daily_volume: f64,
    turnover_probability: f64,
    lambda: f64,
}

pub(super) fn ingest(config: &RunConfig) -> Result<Vec<Artifact>> {
    let series = load_series(config)?;
    let rotation = free_float_rotation_period(&series)?;
    let (v_m, p, lambda) = turnover_lambda(&series, rotation)?;
    let bars = series.bars();
    let report = IngestReport {
        bars: bars.len(),
        first_date: bars[0].date,
        last_date: bars[bars.len() - 1].date,
        free_float: series.free_float(),
        rotation_period: rotation,
        mean_daily_volume: v_m,
        turnover_probability: p,
        lambda,
    };
    let contents = match config.format {
        Format::Json => io::to_json(&report)?,
        Format::Csv => fields_csv(&[
            ("bars", report.bars.to_string()),
            ("first_date", report.first_date.to_string()),
            ("last_date", report.last_date.to_string()),
            ("free_float", report.free_float.to_string()),
            ("rotation_period", report.rotation_period.to_string()),
            ("mean_daily_volume", report.mean_daily_volume.to_string()),
            ("turnover_probability", report.turnover_probability.to_string()),
            ("lambda", report.lambda.to_string()),
        ]),
    };
    Ok(vec![artifact("ingest", config.format, contents)])
}

pub(super) fn potential(config: &RunConfig) -> Result<Vec<Artifact>> {
    let (held, potential) = build_profiles(config)?;
    let f = config.format;
    Ok(match f {
        Format::Json => vec![
            artifact("potential", f, io::to_json(&potential)?),
            artifact("held_shares", f, io::to_json(&held)?),
        ],
        Format::Csv => vec![
            artifact("potential", f, io::profile_csv(&potential.grid, &potential.values)),
            artifact("held_shares", f, io::profile_csv(&held.grid, &held.held)),
        ],
    })
}

pub(super) fn forecast(config: &RunConfig) -> Result<Vec<Artifact>> {
    let potential = load_potential(config)?;
    let h = assemble_hamiltonian(&potential.grid, &potential, &config.params)?;
    let solution = solve_eigenpairs(&h, config.states)?;
    let density = forecast_density(&solution, config.forecast)?;
    let f = config.format;
    Ok(match f {
        Format::Json => vec![
            artifact("density", f, io::to_json(&density)?),
            artifact("solution", f, io::to_json(&solution)?),
        ],
        Format::Csv => {
            let mut states = String::from("price");
            for n in 1..=solution.states.len() {
                let _ = write!(states, ",psi_{n}");
            }
            states.push('\n');
            for (j, p) in solution.grid.centers().iter().enumerate() {
                let _ = write!(states, "{p}");
                for s in &solution.states {
                    let _ = write!(states, ",{}", s[j]);
                }
                states.push('\n');
            }
            vec![
                artifact("density", f, io::profile_csv(&density.grid, &density.mass)),
                artifact("energies", f, io::energies_csv(&solution.energies)),
                artifact("states", f, states),
            ]
        }
    })
}

pub(super) fn barriers(config: &RunConfig) -> Result<Vec<Artifact>> {
    let potential = load_potential(config)?;
    let set = detect_barriers(&potential, config.min_prominence)?;
    let contents = match config.format {
        Format::Json => io::to_json(&set)?,
        Format::Csv => {
            let mut out = String::from("price,prominence,bin\n");
            for b in &set.levels {
                let _ = writeln!(out, "{},{},{}", b.price, b.prominence, b.bin);
            }
            out
        }
    };
    Ok(vec![artifact("barriers", config.format, contents)])
}

pub(super) fn breakout(config: &RunConfig) -> Result<Vec<Artifact>> {
    let potential = load_potential(config)?;
    let set = detect_barriers(&potential, config.min_prominence)?;
    let density = density_for(config, &potential)?;
    let b = breakout_direction(&density, &set)?;
    let contents = match config.format {
        Format::Json => io::to_json(&b)?,
        Format::Csv => fields_csv(&[
            ("up", b.up.to_string()),
            ("down", b.down.to_string()),
            ("inside", b.inside.to_string()),
            ("lower_price", b.lower_price.to_string()),
            ("upper_price", b.upper_price.to_string()),
        ]),
    };
    Ok(vec![artifact("breakout", config.format, contents)])
}

pub(super) fn tunnel(config: &RunConfig, args: &TunnelArgs, file: &ConfigFile) -> Result<Vec<Artifact>> {
    let potential = load_potential(config)?;
    let k = potential.grid.k();
    let scale = if config.params.potential_scale > 0.0 {
        config.params.potential_scale
    } else {
        1.0
    };
    let e_min = file.pick(args.e_min, "e-min")?.unwrap_or(0.05 * scale);
    let e_max = file.pick(args.e_max, "e-max")?.unwrap_or(2.0 * scale);
    let steps = file.pick(args.steps, "steps")?.unwrap_or(40);
    let start = file.pick(args.region_start, "region-start")?.unwrap_or(0);
    let end = file.pick(args.region_end, "region-end")?.unwrap_or(k - 1);
    let sweep = tunneling_sweep(&potential, &config.params, e_min, e_max, steps, start..=end)?;
    let contents = match config.format {
        Format::Json => io::to_json(&sweep)?,
        Format::Csv => io::tunneling_csv(&sweep),
    };
    Ok(vec![artifact("tunneling", config.format, contents)])
}

#[derive(Serialize)]
struct Trajectory<'a> {
    grid: &'a PriceGrid,
    rates: MigrationRates,
    centers_of_mass: Vec<Option<f64>>,
    frames: Vec<&'a [f64]>,
}

pub(super) fn migrate(config: &RunConfig, args: &MigrateArgs, file: &ConfigFile) -> Result<Vec<Artifact>> {
    let potential = load_potential(config)?;
    let steps = file.pick(args.steps, "steps")?.unwrap_or(20);
    let rates = MigrationRates {
        build: file.pick(args.build_rate, "build-rate")?.unwrap_or(0.1),
        decay: file.pick(args.decay_rate, "decay-rate")?.unwrap_or(0.1),
    };
    let frames = run_migration(steps, &potential, &config.params, rates)?;
    let centers = potential.grid.centers();
    let contents = match config.format {
        Format::Json => io::to_json(&Trajectory {
            grid: &potential.grid,
            rates,
            centers_of_mass: frames.iter().map(|f| center_of_mass(centers, &f.values)).collect(),
            frames: frames.iter().map(|f| f.values.as_slice()).collect(),
        })?,
        Format::Csv => {
            let mut out = String::from("step,price,value\n");
            for (s, frame) in frames.iter().enumerate() {
                for (p, v) in centers.iter().zip(&frame.values) {
                    let _ = writeln!(out, "{s},{p},{v}");
                }
            }
            out
        }
    };
    Ok(vec![artifact("migration", config.format, contents)])
}

fn number_list(key: &str, text: &str) -> Result<Vec<f64>> {
    text.split(',')
        .map(|s| {
            s.trim()
                .parse::<f64>()
                .map_err(|e| Error::param(format!("{key}: `{s}`: {e}")))
        })
        .collect()
}

pub(super) fn synth(config: &RunConfig, args: &SynthArgs, file: &ConfigFile) -> Result<Vec<Artifact>> {
    let process = match super::pick_enum(file, args.process, "process")?.unwrap_or(ProcessChoice::Channel) {
        ProcessChoice::Channel => PriceProcess::SidewaysChannel {
            lower: file.pick(args.lower, "lower")?.unwrap_or(10.0),
            upper: file.pick(args.upper, "upper")?.unwrap_or(12.0),
        },
        ProcessChoice::Trend => PriceProcess::TrendingWalk {
            start: file.pick(args.start, "start")?.unwrap_or(10.0),
            drift: file.pick(args.drift, "drift")?.unwrap_or(0.0),
            vol: file.pick(args.vol, "vol")?.unwrap_or(0.02),
        },
        ProcessChoice::Bimodal => {
            let peaks = number_list("peaks", &file.pick(args.peaks.clone(), "peaks")?.unwrap_or_else(|| "10,14".into()))?;
            let weights = match file.pick(args.weights.clone(), "weights")? {
                Some(w) => number_list("weights", &w)?,
                None => vec![1.0; peaks.len()],
            };
            PriceProcess::BimodalAccumulation { peaks, weights }
        }
    };
    let defaults = VolumeSpec::default();
    let mut spec = SyntheticSpec::new(file.pick(args.days, "days")?.unwrap_or(250), process, config.seed);
    spec.volume = VolumeSpec {
        mean: file.pick(args.volume_mean, "volume-mean")?.unwrap_or(defaults.mean),
        spread: file.pick(args.volume_spread, "volume-spread")?.unwrap_or(defaults.spread),
    };
    if let Some(ff) = config.free_float {
        spec.free_float = ff;
    }
    let series = generate_series(&spec)?;
    let contents = match config.format {
        Format::Csv => to_csv(series.bars()),
        Format::Json => io::to_json(&series.bars())?,
    };
    Ok(vec![artifact("synthetic", config.format, contents)])
}
