//! Held-share accumulation on the price grid and the potential built from it.
//!
//! Each day's volume is spread over the bins its `[low, high]` range touches,
//! weighted by how much of it is presumed still held today, and summed per
//! bin. Accumulation starts from an empty (flat) profile `horizon` bars back,
//! which by default is the free-float rotation period.

use serde::{Deserialize, Serialize};

use crate::decay::{free_float_rotation_period, rolling_volatility, survival_weight, DecayLaw};
use crate::error::{Error, Result};
use crate::grid::PriceGrid;
use crate::market_data::{EodBar, MarketSeries};

/// How a day's volume is spread over the prices it traded at.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum IntradayMode {
    /// Everything at the close.
    ClosePoint,
    /// Evenly over `[low, high]`.
    Uniform,
    /// Gaussian centered on the close with standard deviation
    /// `(high - low) / 4`, truncated to `[low, high]`.
    #[default]
    TruncatedGaussian,
}

/// Per-bin share of one bar's volume.
#[derive(Debug, Clone, PartialEq)]
pub struct DayDistribution {
    pub volumes: Vec<f64>,
    /// Volume that fell outside the grid.
    pub dropped: f64,
}

pub fn distribute_intraday_volume(bar: &EodBar, grid: &PriceGrid, mode: IntradayMode) -> DayDistribution {
    let total = bar.volume as f64;
    let mut volumes = vec![0.0; grid.k()];
    let point = |price: f64, volumes: &mut Vec<f64>| match grid.bin_of(price) {
        Some(j) => {
            volumes[j] = total;
            0.0
        }
        None => total,
    };

    let dropped = if mode == IntradayMode::ClosePoint {
        point(bar.close, &mut volumes)
    } else if bar.high <= bar.low {
        point(bar.low, &mut volumes)
    } else {
        let lo = bar.low.max(grid.p_min());
        let hi = bar.high.min(grid.p_max());
        if lo > hi {
            total
        } else {
            let cdf = range_cdf(bar, mode);
            let first = grid.bin_of(lo).unwrap_or(0);
            let last = grid.bin_of(hi).unwrap_or(grid.k() - 1);
            let mut placed = 0.0;
            for (j, slot) in volumes.iter_mut().enumerate().take(last + 1).skip(first) {
                let (a, b) = grid.bin_edges(j);
                let (a, b) = (a.max(bar.low), b.min(bar.high));
                if b > a {
                    *slot = total * cdf(a, b);
                    placed += *slot;
                }
            }
            (total - placed).max(0.0)
        }
    };
    DayDistribution { volumes, dropped }
}

/// Probability mass of the day's price distribution on `[a, b]`, for
/// `low <= a < b <= high`.
fn range_cdf(bar: &EodBar, mode: IntradayMode) -> Box<dyn Fn(f64, f64) -> f64> {
    let (low, high) = (bar.low, bar.high);
    match mode {
        IntradayMode::TruncatedGaussian => {
            let mean = bar.close;
            let scale = (high - low) / 4.0 * std::f64::consts::SQRT_2;
            let below = move |x: f64| 0.5 * libm::erfc((mean - x) / scale);
            let above = move |x: f64| 0.5 * libm::erfc((x - mean) / scale);
            // difference whichever tail is small, so thin bins keep their digits
            let mass = move |a: f64, b: f64| {
                if a >= mean {
                    above(a) - above(b)
                } else if b <= mean {
                    below(b) - below(a)
                } else {
                    1.0 - below(a) - above(b)
                }
            };
            let z = mass(low, high);
            Box::new(move |a, b| mass(a, b) / z)
        }
        _ => {
            let span = high - low;
            Box::new(move |a, b| (b - a) / span)
        }
    }
}

/// Decay-weighted held shares per bin.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HeldSharesProfile {
    pub grid: PriceGrid,
    pub held: Vec<f64>,
    /// Accumulation horizon `T` in trading days.
    pub horizon: usize,
    /// Decay-weighted volume of every day in the window, on or off the grid.
    pub weighted_volume: f64,
    /// Part of `weighted_volume` that fell outside the grid.
    pub dropped_volume: f64,
}

impl HeldSharesProfile {
    pub fn dropped_fraction(&self) -> f64 {
        if self.weighted_volume > 0.0 {
            self.dropped_volume / self.weighted_volume
        } else {
            0.0
        }
    }
}

/// Accumulates held shares over the last `horizon` days.
///
/// The bar `t` days before the most recent one is weighted by the law's
/// survival weight at `t`, for `t = 0..=horizon`. Days before the start of
/// the series contribute nothing. Without an explicit horizon the free-float
/// rotation period is used.
pub fn accumulate_held_shares(
    series: &MarketSeries,
    grid: &PriceGrid,
    law: &DecayLaw,
    mode: IntradayMode,
    horizon: Option<usize>,
) -> Result<HeldSharesProfile> {
    if series.is_empty() {
        return Err(Error::param("empty series"));
    }
    law.validate()?;
    let horizon = match horizon {
        Some(t) => t,
        None => free_float_rotation_period(series)?,
    };
    let bars = series.bars();
    let last = bars.len() - 1;
    let first = last.saturating_sub(horizon);
    let window = &bars[first..];

    if !window
        .iter()
        .any(|b| b.high >= grid.p_min() && b.low <= grid.p_max())
    {
        return Err(Error::GridDisjoint);
    }

    let sigmas = match *law {
        DecayLaw::VolatilityLinked { window: w, .. } => Some(rolling_volatility(series, w)?),
        _ => None,
    };

    let mut weights = Vec::with_capacity(window.len());
    for idx in first..=last {
        let sigma = match &sigmas {
            Some(s) => Some(s[idx].ok_or_else(|| {
                Error::param(format!(
                    "not enough history for rolling volatility at {}",
                    bars[idx].date
                ))
            })?),
            None => None,
        };
        weights.push(survival_weight(law, (last - idx) as f64, sigma)?);
    }

    let days: Vec<DayDistribution> = window
        .iter()
        .map(|b| distribute_intraday_volume(b, grid, mode))
        .collect();

    // fixed order: bin, then day
    let held = (0..grid.k())
        .map(|j| {
            days.iter()
                .zip(&weights)
                .map(|(d, w)| d.volumes[j] * w)
                .sum()
        })
        .collect();
    let weighted_volume = window
        .iter()
        .zip(&weights)
        .map(|(b, w)| b.volume as f64 * w)
        .sum();
    let dropped_volume = days.iter().zip(&weights).map(|(d, w)| d.dropped * w).sum();

    Ok(HeldSharesProfile {
        grid: grid.clone(),
        held,
        horizon,
        weighted_volume,
        dropped_volume,
    })
}

/// Whether held shares are weighted by price when forming the potential.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Weighting {
    /// `V(p_j) ~ sum p * N(p)` over the window around `p_j`.
    AsWritten,
    /// `V(p_j) ~ sum N(p)` over the window around `p_j`.
    #[default]
    PureCount,
}

/// Potential on the grid, scaled so the largest entry is 1.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PotentialProfile {
    pub grid: PriceGrid,
    pub values: Vec<f64>,
    /// Divisor applied to the raw sums; 0 for an all-zero profile.
    pub normalization: f64,
}

impl PotentialProfile {
    /// Scales arbitrary non-negative values to max 1.
    pub fn from_raw(grid: PriceGrid, raw: Vec<f64>) -> Result<Self> {
        if raw.len() != grid.k() {
            return Err(Error::GridMismatch("potential values and grid"));
        }
        if raw.iter().any(|v| !(v.is_finite() && *v >= 0.0)) {
            return Err(Error::param("potential values must be finite and >= 0"));
        }
        let max = raw.iter().copied().fold(0.0, f64::max);
        let values = if max > 0.0 {
            raw.iter().map(|v| v / max).collect()
        } else {
            raw
        };
        Ok(PotentialProfile {
            grid,
            values,
            normalization: max,
        })
    }

    pub fn flat(grid: PriceGrid) -> Self {
        let values = vec![0.0; grid.k()];
        PotentialProfile {
            grid,
            values,
            normalization: 0.0,
        }
    }

    pub fn is_zero(&self) -> bool {
        self.normalization == 0.0
    }
}

/// Forms the potential from held shares, summing over `neighbors` bins on
/// each side of every bin (0 means the bin alone).
pub fn potential_from_held_shares(
    profile: &HeldSharesProfile,
    weighting: Weighting,
    neighbors: usize,
) -> Result<PotentialProfile> {
    let centers = profile.grid.centers();
    let k = centers.len();
    let term = |i: usize| match weighting {
        Weighting::AsWritten => centers[i] * profile.held[i],
        Weighting::PureCount => profile.held[i],
    };
    let raw = (0..k)
        .map(|j| {
            let lo = j.saturating_sub(neighbors);
            let hi = (j + neighbors).min(k - 1);
            (lo..=hi).map(term).sum()
        })
        .collect();
    PotentialProfile::from_raw(profile.grid.clone(), raw)
}
