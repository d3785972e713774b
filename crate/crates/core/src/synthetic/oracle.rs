use std::f64::consts::PI;

use crate::decay::DecayLaw;
use crate::error::{Error, Result};
use crate::grid::PriceGrid;
use crate::market_data::{EodBar, MarketSeries};
use crate::potential::{HeldSharesProfile, IntradayMode};
use crate::solver::ModelParams;

const GL_POINTS: usize = 20;
const GL_PANELS: usize = 4;

/// Gauss-Legendre nodes and weights on `[-1, 1]` by Newton iteration on
/// the Legendre polynomial.
fn gauss_legendre(n: usize) -> Vec<(f64, f64)> {
    (1..=n)
        .map(|i| {
            let mut x = (PI * (i as f64 - 0.25) / (n as f64 + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (mut p0, mut p1) = (1.0, x);
                for k in 2..=n {
                    let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                    p0 = p1;
                    p1 = p2;
                }
                dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
                let dx = p1 / dp;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            (x, 2.0 / ((1.0 - x * x) * dp * dp))
        })
        .collect()
}

fn integrate(f: &impl Fn(f64) -> f64, a: f64, b: f64, rule: &[(f64, f64)]) -> f64 {
    let panel = (b - a) / GL_PANELS as f64;
    (0..GL_PANELS)
        .map(|p| {
            let lo = a + p as f64 * panel;
            let mid = lo + 0.5 * panel;
            rule.iter().map(|(x, w)| w * f(mid + 0.5 * panel * x)).sum::<f64>() * 0.5 * panel
        })
        .sum()
}

/// Bin holding `price` found by scanning edges, `None` off the grid.
fn scan_bin(grid: &PriceGrid, price: f64) -> Option<usize> {
    (0..grid.k()).find(|&j| {
        let (lo, hi) = grid.bin_edges(j);
        price >= lo && (price < hi || (j + 1 == grid.k() && price <= hi))
    })
}

fn day_volume_in_bin(bar: &EodBar, grid: &PriceGrid, mode: IntradayMode, j: usize, rule: &[(f64, f64)]) -> f64 {
    let v = bar.volume as f64;
    let point = |price: f64| if scan_bin(grid, price) == Some(j) { v } else { 0.0 };
    if mode == IntradayMode::ClosePoint {
        return point(bar.close);
    }
    if bar.high <= bar.low {
        return point(bar.low);
    }
    let (lo, hi) = grid.bin_edges(j);
    let a = lo.max(bar.low);
    let b = hi.min(bar.high);
    if b <= a {
        return 0.0;
    }
    match mode {
        IntradayMode::Uniform => v * (b - a) / (bar.high - bar.low),
        _ => {
            let sd = (bar.high - bar.low) / 4.0;
            let density = |x: f64| (-0.5 * ((x - bar.close) / sd).powi(2)).exp();
            let z = integrate(&density, bar.low, bar.high, rule);
            v * integrate(&density, a, b, rule) / z
        }
    }
}

fn sample_std(xs: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    (xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1.0)).sqrt()
}

/// Held shares by direct day-by-bin summation.
pub fn brute_force_held_shares(
    series: &MarketSeries,
    grid: &PriceGrid,
    law: &DecayLaw,
    mode: IntradayMode,
    horizon: Option<usize>,
) -> Result<HeldSharesProfile> {
    let bars = series.bars();
    if bars.is_empty() {
        return Err(Error::param("empty series"));
    }
    let horizon = match horizon {
        Some(t) => t,
        None => {
            let mut acc = 0.0;
            let mut found = None;
            for t in 1..=bars.len() {
                acc += bars[bars.len() - t].volume as f64;
                if acc >= series.free_float() {
                    found = Some(t);
                    break;
                }
            }
            found.ok_or(Error::SeriesTooShort {
                total: acc,
                free_float: series.free_float(),
            })?
        }
    };
    let rule = gauss_legendre(GL_POINTS);
    let last = bars.len() - 1;
    let mut held = vec![0.0; grid.k()];
    let mut weighted_volume = 0.0;
    let mut on_grid = 0.0;
    for t in 0..=horizon.min(last) {
        let i = last - t;
        let bar = &bars[i];
        let t = t as f64;
        let weight = match *law {
            DecayLaw::ConstantExponential { lambda } => (-lambda * t).exp(),
            DecayLaw::GaussianHolding { sigma_hold } => (-(t * t) / (2.0 * sigma_hold * sigma_hold)).exp(),
            DecayLaw::VolatilityLinked { a, b, window } => {
                if i < window {
                    return Err(Error::param("not enough history for rolling volatility"));
                }
                let returns: Vec<f64> = (i + 1 - window..=i)
                    .map(|r| (bars[r].close / bars[r - 1].close).ln())
                    .collect();
                let lambda = a + b / sample_std(&returns);
                (-lambda * t).exp()
            }
        };
        let weight = if t == 0.0 { 1.0 } else { weight };
        weighted_volume += weight * bar.volume as f64;
        for (j, slot) in held.iter_mut().enumerate() {
            let x = weight * day_volume_in_bin(bar, grid, mode, j, &rule);
            *slot += x;
            on_grid += x;
        }
    }
    Ok(HeldSharesProfile {
        grid: grid.clone(),
        held,
        horizon,
        weighted_volume,
        dropped_volume: (weighted_volume - on_grid).max(0.0),
    })
}

/// `n^2 pi^2 hbar^2 / (2 m L^2)`.
pub fn analytic_flat_well_energy(n: usize, width: f64, params: &ModelParams) -> Result<f64> {
    if n == 0 || !(width.is_finite() && width > 0.0) {
        return Err(Error::param(format!("need n >= 1 and L > 0 (got {n}, {width})")));
    }
    params.validate()?;
    let n = n as f64;
    Ok(n * n * PI * PI * params.hbar_eff * params.hbar_eff / (2.0 * params.mass * width * width))
}

/// Closed-form transmission through a rectangular barrier of height `v0`
/// and `width` between flat zero-potential leads.
pub fn analytic_rectangular_barrier_t(energy: f64, v0: f64, width: f64, params: &ModelParams) -> Result<f64> {
    if !(energy > 0.0 && v0 > 0.0 && width >= 0.0) {
        return Err(Error::param("need E > 0, V0 > 0, width >= 0"));
    }
    if energy == v0 {
        return Err(Error::param("E = V0 needs the separate limiting formula"));
    }
    params.validate()?;
    let hb = params.hbar_eff;
    let q = (2.0 * params.mass * (v0 - energy).abs()).sqrt() / hb;
    let oscillation = if energy < v0 {
        (q * width).sinh().powi(2)
    } else {
        (q * width).sin().powi(2)
    };
    Ok(1.0 / (1.0 + v0 * v0 * oscillation / (4.0 * energy * (v0 - energy).abs())))
}
