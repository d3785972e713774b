use serde::{Deserialize, Serialize};

use super::BarrierSet;
use crate::error::{Error, Result};
use crate::solver::ForecastDensity;

/// Forecast mass above, below and inside a sideways channel.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Breakout {
    pub up: f64,
    pub down: f64,
    pub inside: f64,
    pub lower_price: f64,
    pub upper_price: f64,
}

/// Splits the density at the lowest and highest barrier. Bins strictly
/// between or on the barriers count as inside.
pub fn breakout_direction(density: &ForecastDensity, barriers: &BarrierSet) -> Result<Breakout> {
    if barriers.len() < 2 {
        return Err(Error::NoChannel(barriers.len()));
    }
    let lower = barriers.levels[0];
    let upper = barriers.levels[barriers.len() - 1];
    if upper.bin >= density.mass.len() {
        return Err(Error::GridMismatch("barriers and density"));
    }
    let m = &density.mass;
    let down: f64 = m[..lower.bin].iter().sum();
    let up: f64 = m[upper.bin + 1..].iter().sum();
    let inside: f64 = m[lower.bin..=upper.bin].iter().sum();
    Ok(Breakout {
        up,
        down,
        inside,
        lower_price: lower.price,
        upper_price: upper.price,
    })
}
