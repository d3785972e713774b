//! End-of-day bars, CSV ingestion and the validated [`MarketSeries`].
//!
//! The accepted file layout is fixed: a `date,open,high,low,close,volume`
//! header followed by one row per trading day, ISO-8601 dates, `.` as the
//! decimal separator and either LF or CRLF line endings. Prices are expected
//! to be adjusted for corporate actions already.

use std::fmt::Write as _;
use std::io::Read;
use std::path::Path;

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const CSV_HEADER: [&str; 6] = ["date", "open", "high", "low", "close", "volume"];

const DATE_FORMAT: &str = "%Y-%m-%d";

/// One trading day.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EodBar {
    pub date: NaiveDate,
    pub open: f64,
    pub high: f64,
    pub low: f64,
    pub close: f64,
    pub volume: u64,
}

impl EodBar {
    /// Checks the OHLC ordering; returns the violated rule on failure.
    pub fn check(&self) -> std::result::Result<(), &'static str> {
        let prices = [self.open, self.high, self.low, self.close];
        if prices.iter().any(|p| !p.is_finite()) {
            return Err("non-finite price");
        }
        if prices.iter().any(|&p| p <= 0.0) {
            return Err("non-positive price");
        }
        if self.high < self.low {
            return Err("high < low");
        }
        if self.open < self.low || self.open > self.high {
            return Err("open outside [low, high]");
        }
        if self.close < self.low || self.close > self.high {
            return Err("close outside [low, high]");
        }
        Ok(())
    }
}

/// Date-ordered bars together with the instrument's free float.
#[derive(Debug, Clone, PartialEq)]
pub struct MarketSeries {
    bars: Vec<EodBar>,
    free_float: f64,
}

impl MarketSeries {
    pub fn bars(&self) -> &[EodBar] {
        &self.bars
    }

    pub fn free_float(&self) -> f64 {
        self.free_float
    }

    pub fn len(&self) -> usize {
        self.bars.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bars.is_empty()
    }

    pub fn total_volume(&self) -> f64 {
        self.bars.iter().map(|b| b.volume as f64).sum()
    }

    /// Lowest low and highest high over the last `window` bars.
    pub fn price_range(&self, window: usize) -> Option<(f64, f64)> {
        let start = self.bars.len().saturating_sub(window);
        let tail = &self.bars[start..];
        if tail.is_empty() {
            return None;
        }
        let lo = tail.iter().map(|b| b.low).fold(f64::INFINITY, f64::min);
        let hi = tail.iter().map(|b| b.high).fold(f64::NEG_INFINITY, f64::max);
        Some((lo, hi))
    }
}

/// Parses EOD rows from a CSV stream.
pub fn parse_eod_csv<R: Read>(input: R) -> Result<Vec<EodBar>> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(input);

    let mut bars = Vec::new();
    let mut record = csv::StringRecord::new();
    let mut seen_header = false;
    loop {
        let more = reader.read_record(&mut record).map_err(|e| {
            let line = e.position().map(|p| p.line()).unwrap_or(0);
            Error::Parse {
                line,
                message: e.to_string(),
            }
        })?;
        if !more {
            break;
        }
        let line = record.position().map(|p| p.line()).unwrap_or(0);
        if !seen_header {
            if record.iter().ne(CSV_HEADER.iter().copied()) {
                return Err(Error::Parse {
                    line,
                    message: format!("expected header `{}`", CSV_HEADER.join(",")),
                });
            }
            seen_header = true;
            continue;
        }
        let bar = parse_row(&record, line)?;
        if let Err(rule) = bar.check() {
            return Err(Error::InvalidBar {
                line,
                rule: rule.to_string(),
            });
        }
        bars.push(bar);
    }
    if !seen_header {
        return Err(Error::Parse {
            line: 1,
            message: "missing header".into(),
        });
    }
    Ok(bars)
}

pub fn read_eod_csv(path: impl AsRef<Path>) -> Result<Vec<EodBar>> {
    let path = path.as_ref();
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    parse_eod_csv(std::io::BufReader::new(file))
}

fn parse_row(record: &csv::StringRecord, line: u64) -> Result<EodBar> {
    let bad = |message: String| Error::Parse { line, message };
    if record.len() != CSV_HEADER.len() {
        return Err(bad(format!(
            "expected {} columns, found {}",
            CSV_HEADER.len(),
            record.len()
        )));
    }
    let date_str = &record[0];
    // chrono accepts unpadded fields; insist on the canonical 10-character form
    if date_str.len() != 10 {
        return Err(bad(format!("date `{date_str}` is not YYYY-MM-DD")));
    }
    let date = NaiveDate::parse_from_str(date_str, DATE_FORMAT)
        .map_err(|e| bad(format!("date `{date_str}`: {e}")))?;
    let price = |idx: usize| -> Result<f64> {
        record[idx]
            .parse::<f64>()
            .map_err(|e| bad(format!("{} `{}`: {e}", CSV_HEADER[idx], &record[idx])))
    };
    let volume = record[5]
        .parse::<u64>()
        .map_err(|e| bad(format!("volume `{}`: {e}", &record[5])))?;
    Ok(EodBar {
        date,
        open: price(1)?,
        high: price(2)?,
        low: price(3)?,
        close: price(4)?,
        volume,
    })
}

/// Renders bars in the same CSV layout [`parse_eod_csv`] reads.
pub fn to_csv(bars: &[EodBar]) -> String {
    let mut out = CSV_HEADER.join(",");
    out.push('\n');
    for b in bars {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{}",
            b.date.format(DATE_FORMAT),
            b.open,
            b.high,
            b.low,
            b.close,
            b.volume
        );
    }
    out
}

/// Sorts bars by date and attaches the free float.
pub fn validate_series(mut bars: Vec<EodBar>, free_float: f64) -> Result<MarketSeries> {
    if !(free_float.is_finite() && free_float > 0.0) {
        return Err(Error::param(format!("free float must be > 0 (got {free_float})")));
    }
    bars.sort_by_key(|b| b.date);
    if let Some(w) = bars.windows(2).find(|w| w[0].date == w[1].date) {
        return Err(Error::DuplicateDate(w[0].date));
    }
    Ok(MarketSeries { bars, free_float })
}

/// Mean volume of the last `window` bars.
pub fn mean_daily_volume(series: &MarketSeries, window: usize) -> Result<f64> {
    if window == 0 || window > series.len() {
        return Err(Error::param(format!(
            "volume window {window} outside 1..={}",
            series.len()
        )));
    }
    let tail = &series.bars[series.len() - window..];
    Ok(tail.iter().map(|b| b.volume as f64).sum::<f64>() / window as f64)
}
