use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

use super::Lcg64;
use crate::error::{Error, Result};
use crate::market_data::{validate_series, EodBar, MarketSeries};

/// Relative half-spread of a bimodal day's prices around its peak.
const BIMODAL_NOISE: f64 = 0.002;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "process", rename_all = "snake_case")]
pub enum PriceProcess {
    /// Reflected random walk confined to `[lower, upper]`.
    SidewaysChannel { lower: f64, upper: f64 },
    /// Geometric random walk with per-day log drift and volatility.
    TrendingWalk { start: f64, drift: f64, vol: f64 },
    /// Every day trades tightly around one of `peaks`, picked with
    /// probability proportional to `weights`.
    BimodalAccumulation { peaks: Vec<f64>, weights: Vec<f64> },
}

/// Daily volume drawn uniformly from `mean * [1 - spread, 1 + spread]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VolumeSpec {
    pub mean: f64,
    pub spread: f64,
}

impl Default for VolumeSpec {
    fn default() -> Self {
        VolumeSpec {
            mean: 100_000.0,
            spread: 0.5,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SyntheticSpec {
    pub days: usize,
    pub process: PriceProcess,
    pub volume: VolumeSpec,
    pub seed: u64,
    pub free_float: f64,
    pub start_date: NaiveDate,
}

impl SyntheticSpec {
    pub fn new(days: usize, process: PriceProcess, seed: u64) -> Self {
        SyntheticSpec {
            days,
            process,
            volume: VolumeSpec::default(),
            seed,
            free_float: 5_000_000.0,
            start_date: NaiveDate::from_ymd_opt(2020, 1, 1).expect("valid date"),
        }
    }

    fn validate(&self) -> Result<()> {
        if self.days == 0 {
            return Err(Error::param("days must be >= 1"));
        }
        if !(self.volume.mean.is_finite() && self.volume.mean >= 0.0)
            || !(0.0..=1.0).contains(&self.volume.spread)
        {
            return Err(Error::param("volume needs mean >= 0 and spread in [0, 1]"));
        }
        match &self.process {
            PriceProcess::SidewaysChannel { lower, upper } => {
                if !(*lower > 0.0 && upper > lower && upper.is_finite()) {
                    return Err(Error::param("channel needs 0 < lower < upper"));
                }
            }
            PriceProcess::TrendingWalk { start, drift, vol } => {
                if !(*start > 0.0 && start.is_finite() && drift.is_finite() && *vol >= 0.0 && vol.is_finite()) {
                    return Err(Error::param("trending walk needs start > 0, finite drift, vol >= 0"));
                }
            }
            PriceProcess::BimodalAccumulation { peaks, weights } => {
                if peaks.is_empty() || peaks.len() != weights.len() {
                    return Err(Error::param("bimodal process needs one weight per peak"));
                }
                if peaks.iter().any(|p| !(p.is_finite() && *p > 0.0))
                    || weights.iter().any(|w| !(w.is_finite() && *w >= 0.0))
                    || weights.iter().sum::<f64>() <= 0.0
                {
                    return Err(Error::param("bimodal peaks must be > 0 and weights >= 0 with positive sum"));
                }
            }
        }
        Ok(())
    }
}

fn round4(x: f64) -> f64 {
    libm::round(x * 1e4) / 1e4
}

/// Deterministic series for `spec`; identical specs give identical bars.
pub fn generate_series(spec: &SyntheticSpec) -> Result<MarketSeries> {
    spec.validate()?;
    let mut rng = Lcg64::new(spec.seed);
    let mut bars = Vec::with_capacity(spec.days);
    let mut state = match &spec.process {
        PriceProcess::SidewaysChannel { lower, upper } => 0.5 * (lower + upper),
        PriceProcess::TrendingWalk { start, .. } => *start,
        PriceProcess::BimodalAccumulation { peaks, .. } => peaks[0],
    };
    for day in 0..spec.days {
        let (open, high, low, close) = match &spec.process {
            PriceProcess::SidewaysChannel { lower, upper } => {
                let width = upper - lower;
                let open = state;
                let mut close = open + 0.05 * width * rng.next_normal();
                // reflect at the channel walls
                while close < *lower || close > *upper {
                    close = if close < *lower { 2.0 * lower - close } else { 2.0 * upper - close };
                }
                let high = (open.max(close) + 0.01 * width * rng.next_normal().abs()).min(*upper);
                let low = (open.min(close) - 0.01 * width * rng.next_normal().abs()).max(*lower);
                state = close;
                (open, high, low, close)
            }
            PriceProcess::TrendingWalk { drift, vol, .. } => {
                let open = state;
                let close = open * libm::exp(drift + vol * rng.next_normal());
                let high = open.max(close) * libm::exp(0.5 * vol * rng.next_normal().abs());
                let low = open.min(close) * libm::exp(-0.5 * vol * rng.next_normal().abs());
                state = close;
                (open, high, low, close)
            }
            PriceProcess::BimodalAccumulation { peaks, weights } => {
                let total: f64 = weights.iter().sum();
                let mut u = rng.next_f64() * total;
                let mut pick = peaks.len() - 1;
                for (i, w) in weights.iter().enumerate() {
                    if u < *w {
                        pick = i;
                        break;
                    }
                    u -= w;
                }
                let center = peaks[pick];
                let open = center * (1.0 + BIMODAL_NOISE * rng.next_normal());
                let close = center * (1.0 + BIMODAL_NOISE * rng.next_normal());
                let high = open.max(close) * (1.0 + 0.5 * BIMODAL_NOISE * rng.next_normal().abs());
                let low = open.min(close) * (1.0 - 0.5 * BIMODAL_NOISE * rng.next_normal().abs());
                (open, high, low, close)
            }
        };
        let v = spec.volume;
        let volume = libm::round(v.mean * (1.0 + v.spread * (2.0 * rng.next_f64() - 1.0))).max(0.0) as u64;
        // rounding is monotone, so the OHLC ordering survives it
        bars.push(EodBar {
            date: spec.start_date + chrono::Days::new(day as u64),
            open: round4(open),
            high: round4(high),
            low: round4(low),
            close: round4(close),
            volume,
        });
    }
    for (i, b) in bars.iter().enumerate() {
        if let Err(rule) = b.check() {
            return Err(Error::param(format!(
                "generated bar {i} violates {rule}; process parameters drive prices out of range"
            )));
        }
    }
    validate_series(bars, spec.free_float)
}
