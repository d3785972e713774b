use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::potential::PotentialProfile;
use crate::solver::{ground_state_density, ForecastDensity, ModelParams};

/// Per-step rates of the constructor/destructor update: where the forecast
/// density is high new potential builds up, and the old potential decays.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MigrationRates {
    pub build: f64,
    pub decay: f64,
}

impl MigrationRates {
    fn validate(&self) -> Result<()> {
        for (name, r) in [("build", self.build), ("decay", self.decay)] {
            if !(0.0..=1.0).contains(&r) {
                return Err(Error::param(format!("{name} rate must lie in [0, 1] (got {r})")));
            }
        }
        Ok(())
    }
}

/// `V' = (1 - decay) V + build * mass / max(mass)`, rescaled to max 1.
pub fn trend_migration_step(
    potential: &PotentialProfile,
    density: &ForecastDensity,
    rates: MigrationRates,
) -> Result<PotentialProfile> {
    rates.validate()?;
    potential.grid.ensure_same(&density.grid, "potential and density")?;
    if rates.build == 0.0 && rates.decay == 0.0 {
        return Ok(potential.clone());
    }
    let max_mass = density.mass.iter().copied().fold(0.0, f64::max);
    let raw = potential
        .values
        .iter()
        .zip(&density.mass)
        .map(|(v, m)| {
            let built = if max_mass > 0.0 { m / max_mass } else { 0.0 };
            (1.0 - rates.decay) * v + rates.build * built
        })
        .collect();
    PotentialProfile::from_raw(potential.grid.clone(), raw)
}

/// Iterates ground-state forecast and migration step; the returned
/// trajectory starts with `initial` and has `steps + 1` frames.
pub fn run_migration(
    steps: usize,
    initial: &PotentialProfile,
    params: &ModelParams,
    rates: MigrationRates,
) -> Result<Vec<PotentialProfile>> {
    if steps == 0 {
        return Err(Error::param("migration needs at least one step"));
    }
    rates.validate()?;
    let mut frames = Vec::with_capacity(steps + 1);
    frames.push(initial.clone());
    for _ in 0..steps {
        let current = frames.last().expect("non-empty");
        let density = ground_state_density(current, params)?;
        let next = trend_migration_step(current, &density, rates)?;
        frames.push(next);
    }
    Ok(frames)
}

/// Value-weighted mean price of a non-negative profile; `None` if it is all
/// zero.
pub fn center_of_mass(centers: &[f64], weights: &[f64]) -> Option<f64> {
    let total: f64 = weights.iter().sum();
    if total > 0.0 {
        Some(centers.iter().zip(weights).map(|(p, w)| p * w).sum::<f64>() / total)
    } else {
        None
    }
}
