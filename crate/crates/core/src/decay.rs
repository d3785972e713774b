//! Survival laws for traded share blocks.
//!
//! Shares that changed hands on a given day are assumed to be held, and then
//! to change hands again at a per-day rate, the way an excited population
//! decays. The rate comes from turnover: if a fraction `P` of the free float
//! trades on an average day, the per-day decay constant is `-ln(1 - P)`.
//!
//! Time is measured in trading days throughout.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::market_data::MarketSeries;

/// Default look-back, in bars, for the rolling volatility that drives
/// [`DecayLaw::VolatilityLinked`].
pub const DEFAULT_VOLATILITY_WINDOW: usize = 20;

/// How much of a day's volume is still held `t` trading days later.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "law", rename_all = "snake_case")]
pub enum DecayLaw {
    /// `exp(-lambda * t)`.
    ConstantExponential { lambda: f64 },
    /// `exp(-(a + b / sigma) * t)` where `sigma` is the day's rolling
    /// volatility of log returns over `window` bars.
    VolatilityLinked { a: f64, b: f64, window: usize },
    /// `exp(-(t / (sqrt(2) * sigma_hold))^2)`: holders keep their block for a
    /// while before selling, so the weight is flat at `t = 0`.
    GaussianHolding { sigma_hold: f64 },
}

impl DecayLaw {
    pub fn validate(&self) -> Result<()> {
        match *self {
            DecayLaw::ConstantExponential { lambda } => {
                if !(lambda.is_finite() && lambda >= 0.0) {
                    return Err(Error::param(format!("lambda must be >= 0 (got {lambda})")));
                }
            }
            DecayLaw::VolatilityLinked { a, b, window } => {
                if !(a.is_finite() && b.is_finite()) {
                    return Err(Error::param("volatility-linked coefficients must be finite"));
                }
                if window < 2 {
                    return Err(Error::param("volatility window must be >= 2"));
                }
            }
            DecayLaw::GaussianHolding { sigma_hold } => {
                if !(sigma_hold.is_finite() && sigma_hold > 0.0) {
                    return Err(Error::param(format!(
                        "sigma_hold must be > 0 (got {sigma_hold})"
                    )));
                }
            }
        }
        Ok(())
    }
}

/// Fraction of the free float that trades on an average day.
pub fn turnover_probability(mean_volume: f64, free_float: f64) -> Result<f64> {
    if !(free_float.is_finite() && free_float > 0.0) {
        return Err(Error::param(format!("free float must be > 0 (got {free_float})")));
    }
    if !(mean_volume.is_finite() && mean_volume >= 0.0) {
        return Err(Error::param(format!(
            "mean volume must be >= 0 (got {mean_volume})"
        )));
    }
    let p = mean_volume / free_float;
    if p >= 1.0 {
        return Err(Error::TurnoverSaturated(p));
    }
    Ok(p)
}

/// Per-day decay constant implied by turnover probability `p`.
pub fn decay_constant(p: f64) -> Result<f64> {
    if !(0.0..1.0).contains(&p) {
        return Err(Error::param(format!("probability must lie in [0, 1) (got {p})")));
    }
    // ln_1p keeps full precision for small p
    Ok(-(-p).ln_1p())
}

pub fn volatility_linked_lambda(sigma_daily: f64, a: f64, b: f64) -> Result<f64> {
    if !(sigma_daily.is_finite() && sigma_daily > 0.0) {
        return Err(Error::param(format!(
            "daily volatility must be > 0 (got {sigma_daily})"
        )));
    }
    let lambda = a + b / sigma_daily;
    if !(lambda >= 0.0) {
        return Err(Error::param(format!("negative decay rate {lambda}")));
    }
    Ok(lambda)
}

/// Weight in `[0, 1]` of volume traded `t` days ago.
///
/// `sigma_daily` is required for [`DecayLaw::VolatilityLinked`] and ignored
/// otherwise.
pub fn survival_weight(law: &DecayLaw, t: f64, sigma_daily: Option<f64>) -> Result<f64> {
    if !(t >= 0.0) {
        return Err(Error::param(format!("elapsed time must be >= 0 (got {t})")));
    }
    let w = match *law {
        DecayLaw::ConstantExponential { lambda } => {
            if !(lambda >= 0.0) {
                return Err(Error::param(format!("lambda must be >= 0 (got {lambda})")));
            }
            (-lambda * t).exp()
        }
        DecayLaw::VolatilityLinked { a, b, .. } => {
            let sigma = sigma_daily
                .ok_or_else(|| Error::param("volatility-linked decay needs a daily volatility"))?;
            (-volatility_linked_lambda(sigma, a, b)? * t).exp()
        }
        DecayLaw::GaussianHolding { sigma_hold } => {
            if !(sigma_hold > 0.0) {
                return Err(Error::param(format!(
                    "sigma_hold must be > 0 (got {sigma_hold})"
                )));
            }
            let z = t / (std::f64::consts::SQRT_2 * sigma_hold);
            (-z * z).exp()
        }
    };
    // exp(-0 * inf) is NaN; an infinite rate with t = 0 still means "just traded"
    Ok(if t == 0.0 { 1.0 } else { w })
}

/// Rolling sample standard deviation of log close-to-close returns.
///
/// Entry `i` covers the `window` returns ending at bar `i`, so it is `None`
/// for `i < window`.
pub fn rolling_volatility(series: &MarketSeries, window: usize) -> Result<Vec<Option<f64>>> {
    if window < 2 {
        return Err(Error::param("volatility window must be >= 2"));
    }
    let bars = series.bars();
    let returns: Vec<f64> = bars
        .windows(2)
        .map(|w| (w[1].close / w[0].close).ln())
        .collect();
    let mut out = vec![None; bars.len()];
    for (i, slot) in out.iter_mut().enumerate().skip(window) {
        // returns[i - 1] is the return into bar i
        let r = &returns[i - window..i];
        let mean = r.iter().sum::<f64>() / window as f64;
        let var = r.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (window - 1) as f64;
        *slot = Some(var.sqrt());
    }
    Ok(out)
}

/// Fits `lambda_i = a + b / sigma_i` by least squares over the series,
/// where `lambda_i` is the realized daily decay constant `-ln(1 - v_i / v_ff)`.
pub fn calibrate_g(series: &MarketSeries, window: usize) -> Result<(f64, f64)> {
    let sigmas = rolling_volatility(series, window)?;
    let ff = series.free_float();
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for (bar, sigma) in series.bars().iter().zip(&sigmas) {
        let Some(sigma) = *sigma else { continue };
        if sigma <= 0.0 {
            continue;
        }
        let p = turnover_probability(bar.volume as f64, ff)?;
        xs.push(1.0 / sigma);
        ys.push(decay_constant(p)?);
    }
    let n = xs.len() as f64;
    if xs.len() < 2 {
        return Err(Error::DegenerateRegression(format!(
            "{} usable days with positive volatility",
            xs.len()
        )));
    }
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    if sxx <= 1e-12 * n * mx * mx {
        return Err(Error::DegenerateRegression(
            "fewer than 2 distinct inverse volatilities".into(),
        ));
    }
    let b = sxy / sxx;
    Ok((my - b * mx, b))
}

/// Number of trailing trading days needed to trade a volume equal to the
/// free float.
pub fn free_float_rotation_period(series: &MarketSeries) -> Result<usize> {
    let ff = series.free_float();
    let mut acc = 0.0;
    for (n, bar) in series.bars().iter().rev().enumerate() {
        acc += bar.volume as f64;
        if acc >= ff {
            return Ok(n + 1);
        }
    }
    Err(Error::SeriesTooShort {
        total: acc,
        free_float: ff,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::market_data::{validate_series, EodBar};
    use chrono::NaiveDate;
    use proptest::prelude::*;
    use std::f64::consts::{LN_2, SQRT_2};

    fn series(closes: &[f64], volumes: &[u64], ff: f64) -> MarketSeries {
        let d0 = NaiveDate::from_ymd_opt(2021, 1, 1).unwrap();
        let bars = closes
            .iter()
            .zip(volumes)
            .enumerate()
            .map(|(i, (&c, &v))| EodBar {
                date: d0 + chrono::Days::new(i as u64),
                open: c,
                high: c,
                low: c,
                close: c,
                volume: v,
            })
            .collect();
        validate_series(bars, ff).unwrap()
    }

    #[test]
    fn turnover_examples() {
        assert_eq!(turnover_probability(500_000.0, 10_000_000.0).unwrap(), 0.05);
        assert_eq!(turnover_probability(0.0, 10.0).unwrap(), 0.0);
        assert!(matches!(
            turnover_probability(10.0, 10.0),
            Err(Error::TurnoverSaturated(_))
        ));
    }

    #[test]
    fn decay_constant_examples() {
        assert_eq!(decay_constant(0.0).unwrap(), 0.0);
        assert!((decay_constant(0.5).unwrap() - LN_2).abs() < 1e-15);
        assert!((decay_constant(1.0 - (-1.0f64).exp()).unwrap() - 1.0).abs() < 1e-15);
        assert!(decay_constant(1.0).is_err());
        assert!(decay_constant(-0.1).is_err());
    }

    #[test]
    fn survival_examples() {
        let c = DecayLaw::ConstantExponential { lambda: LN_2 };
        assert!((survival_weight(&c, 1.0, None).unwrap() - 0.5).abs() < 1e-15);
        let g = DecayLaw::GaussianHolding { sigma_hold: 3.0 };
        let w = survival_weight(&g, SQRT_2 * 3.0, None).unwrap();
        assert!((w - (-1.0f64).exp()).abs() < 1e-15);
        let v = DecayLaw::VolatilityLinked { a: 0.1, b: 0.01, window: 5 };
        for law in [c, g, v] {
            assert_eq!(survival_weight(&law, 0.0, Some(0.02)).unwrap(), 1.0);
        }
        assert!(survival_weight(&v, 1.0, None).is_err());
        assert!(survival_weight(&c, -1.0, None).is_err());
    }

    #[test]
    fn volatility_lambda_examples() {
        assert!((volatility_linked_lambda(0.02, 0.0, 0.1).unwrap() - 5.0).abs() < 1e-12);
        assert_eq!(volatility_linked_lambda(0.3, 0.7, 0.0).unwrap(), 0.7);
        assert!(volatility_linked_lambda(1.0, -1.0, 0.001).is_err());
        assert!(volatility_linked_lambda(0.0, 1.0, 1.0).is_err());
    }

    /// Closes whose rolling volatility varies; volumes are then chosen so
    /// that the realized decay constant follows `lambda_of(sigma)` exactly.
    fn generated(lambda_of: impl Fn(f64, usize) -> f64, window: usize) -> MarketSeries {
        let ff = 1e9;
        let mut closes = vec![100.0];
        for i in 1..400 {
            let amp = 0.005 + 0.02 * ((i as f64) * 0.05).sin().abs();
            let sign = if (i * 7919) % 3 == 0 { -1.0 } else { 1.0 };
            let last: f64 = *closes.last().unwrap();
            closes.push(last * (sign * amp).exp());
        }
        let vol_placeholder = vec![1u64; closes.len()];
        let s = series(&closes, &vol_placeholder, ff);
        let sig = rolling_volatility(&s, window).unwrap();
        let volumes: Vec<u64> = sig
            .iter()
            .enumerate()
            .map(|(i, s)| match s {
                Some(s) => (ff * (1.0 - (-lambda_of(*s, i)).exp())).round() as u64,
                None => 0,
            })
            .collect();
        series(&closes, &volumes, ff)
    }

    #[test]
    fn calibrate_recovers_linear_g() {
        let s = generated(|sigma, _| 0.01 + 0.05 / sigma, 10);
        let (a, b) = calibrate_g(&s, 10).unwrap();
        // volumes are integers; rounding a ~1e9 float free float perturbs lambda by ~1e-9
        assert!((a - 0.01).abs() < 1e-6, "a = {a}");
        assert!((b - 0.05).abs() < 1e-6, "b = {b}");
    }

    #[test]
    fn calibrate_independent_lambda_gives_flat_g() {
        let s = generated(|_, _| 0.2, 10);
        let (a, b) = calibrate_g(&s, 10).unwrap();
        assert!(b.abs() < 1e-6, "b = {b}");
        assert!((a - 0.2).abs() < 1e-6, "a = {a}");
    }

    #[test]
    fn calibrate_constant_volatility_is_degenerate() {
        let flat = series(&[10.0; 50], &[100; 50], 1e6);
        assert!(matches!(calibrate_g(&flat, 5), Err(Error::DegenerateRegression(_))));
        // alternating returns with an even window give the same sigma every day
        let closes: Vec<f64> = (0..60).map(|i| if i % 2 == 0 { 10.0 } else { 10.5 }).collect();
        let alt = series(&closes, &[100; 60], 1e6);
        assert!(matches!(calibrate_g(&alt, 4), Err(Error::DegenerateRegression(_))));
    }

    #[test]
    fn rotation_examples() {
        let s = series(&[1.0; 20], &[10; 20], 100.0);
        assert_eq!(free_float_rotation_period(&s).unwrap(), 10);
        let s = series(&[1.0; 3], &[5, 5, 40], 40.0);
        assert_eq!(free_float_rotation_period(&s).unwrap(), 1);
        let s = series(&[1.0; 3], &[5, 5, 5], 40.0);
        assert!(matches!(
            free_float_rotation_period(&s),
            Err(Error::SeriesTooShort { .. })
        ));
    }

    fn arb_law() -> impl Strategy<Value = DecayLaw> {
        prop_oneof![
            (0.0f64..5.0).prop_map(|lambda| DecayLaw::ConstantExponential { lambda }),
            (0.0f64..1.0, 0.0f64..0.1).prop_map(|(a, b)| DecayLaw::VolatilityLinked { a, b, window: 5 }),
            (0.1f64..50.0).prop_map(|sigma_hold| DecayLaw::GaussianHolding { sigma_hold }),
        ]
    }

    proptest! {
        #[test]
        fn survival_monotone(law in arb_law(), t in 0.0f64..100.0, dt in 0.0f64..10.0, sigma in 0.001f64..0.2) {
            let w0 = survival_weight(&law, t, Some(sigma)).unwrap();
            let w1 = survival_weight(&law, t + dt, Some(sigma)).unwrap();
            prop_assert!(w1 <= w0);
            prop_assert!((0.0..=1.0).contains(&w0));
        }

        #[test]
        fn decay_inverts_turnover(v in 0.0f64..1e6, extra in 1.0f64..1e7) {
            let f = v + extra;
            let p = turnover_probability(v, f).unwrap();
            let lambda = decay_constant(p).unwrap();
            prop_assert!(((-lambda).exp() - (1.0 - v / f)).abs() < 1e-15);
        }

        #[test]
        fn exponential_composes(lambda in 0.0f64..3.0, t1 in 0.0f64..20.0, t2 in 0.0f64..20.0) {
            let law = DecayLaw::ConstantExponential { lambda };
            let joint = survival_weight(&law, t1 + t2, None).unwrap();
            let split = survival_weight(&law, t1, None).unwrap() * survival_weight(&law, t2, None).unwrap();
            prop_assert!((joint - split).abs() <= 1e-12 * joint.max(f64::MIN_POSITIVE));
        }
    }
}
