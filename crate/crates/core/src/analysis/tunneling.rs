//! Transmission through a stretch of the potential, treating every bin as a
//! slab of constant potential.
//!
//! Each slab maps `(psi, psi')` at its left face to its right face with a
//! real unimodular matrix, so the product over the region conserves flux by
//! construction. Plane waves in the two asymptotic leads then fix the
//! reflection and transmission amplitudes.

use std::ops::RangeInclusive;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::potential::PotentialProfile;
use crate::solver::ModelParams;

const FLUX_TOLERANCE: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TunnelingResult {
    pub transmission: f64,
    pub reflection: f64,
    pub energy: f64,
}

/// `[[a, b], [c, d]]` acting on `(psi, psi')`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SlabMatrix(pub [[f64; 2]; 2]);

impl SlabMatrix {
    const IDENTITY: SlabMatrix = SlabMatrix([[1.0, 0.0], [0.0, 1.0]]);

    /// Propagation across width `d` where `psi'' = -q psi`, `q = 2m(E - V)/hbar^2`.
    pub fn slab(q: f64, d: f64) -> Self {
        if q > 0.0 {
            let k = q.sqrt();
            let (s, c) = (k * d).sin_cos();
            SlabMatrix([[c, s / k], [-k * s, c]])
        } else if q < 0.0 {
            let kappa = (-q).sqrt();
            let (s, c) = ((kappa * d).sinh(), (kappa * d).cosh());
            SlabMatrix([[c, s / kappa], [kappa * s, c]])
        } else {
            SlabMatrix([[1.0, d], [0.0, 1.0]])
        }
    }

    pub fn det(&self) -> f64 {
        let m = self.0;
        m[0][0] * m[1][1] - m[0][1] * m[1][0]
    }

    /// `self * rhs`: apply `rhs` first.
    pub fn then_after(&self, rhs: &SlabMatrix) -> SlabMatrix {
        let (a, b) = (self.0, rhs.0);
        let mut out = [[0.0; 2]; 2];
        for (i, row) in out.iter_mut().enumerate() {
            for (j, cell) in row.iter_mut().enumerate() {
                *cell = a[i][0] * b[0][j] + a[i][1] * b[1][j];
            }
        }
        SlabMatrix(out)
    }
}

fn check_region(potential: &PotentialProfile, region: &RangeInclusive<usize>) -> Result<()> {
    if region.is_empty() || *region.end() >= potential.values.len() {
        return Err(Error::param(format!(
            "region {}..={} outside grid of {} bins",
            region.start(),
            region.end(),
            potential.values.len()
        )));
    }
    Ok(())
}

/// One matrix per bin of `region`, in order from low to high price.
pub fn slab_transfer_matrices(
    potential: &PotentialProfile,
    params: &ModelParams,
    energy: f64,
    region: RangeInclusive<usize>,
) -> Result<Vec<SlabMatrix>> {
    params.validate()?;
    check_region(potential, &region)?;
    let d = potential.grid.spacing();
    let factor = 2.0 * params.mass / (params.hbar_eff * params.hbar_eff);
    Ok(region
        .map(|j| SlabMatrix::slab(factor * (energy - params.potential_scale * potential.values[j]), d))
        .collect())
}

/// Transmission and reflection probabilities for a particle of `energy`
/// incident from the low-price side of `region`.
///
/// Outside the region the potential is taken to stay at the level of the
/// region's first and last bins.
pub fn transmission_reflection(
    potential: &PotentialProfile,
    params: &ModelParams,
    energy: f64,
    region: RangeInclusive<usize>,
) -> Result<TunnelingResult> {
    if !(energy.is_finite() && energy > 0.0) {
        return Err(Error::param(format!("energy must be > 0 (got {energy})")));
    }
    let slabs = slab_transfer_matrices(potential, params, energy, region.clone())?;
    let left = params.potential_scale * potential.values[*region.start()];
    let right = params.potential_scale * potential.values[*region.end()];
    if energy == left || energy == right {
        return Err(Error::param(format!(
            "energy {energy} coincides with an asymptotic level"
        )));
    }
    let (open_left, open_right) = (energy > left, energy > right);
    if !open_left && !open_right {
        return Err(Error::NoOpenChannel { energy, left, right });
    }
    if open_left != open_right {
        // one lead is evanescent: nothing propagates away on that side
        return Ok(TunnelingResult {
            transmission: 0.0,
            reflection: 1.0,
            energy,
        });
    }

    let total = slabs
        .iter()
        .fold(SlabMatrix::IDENTITY, |acc, s| s.then_after(&acc))
        .0;
    let factor = 2.0 * params.mass / (params.hbar_eff * params.hbar_eff);
    let k_left = (factor * (energy - left)).sqrt();
    let k_right = (factor * (energy - right)).sqrt();
    let i = Complex64::i();

    // left: psi = e^{ikx} + r e^{-ikx}; right: psi = t e^{ik'x}
    let alpha = total[0][0] + i * k_left * total[0][1];
    let beta = total[0][0] - i * k_left * total[0][1];
    let gamma = total[1][0] + i * k_left * total[1][1];
    let delta = total[1][0] - i * k_left * total[1][1];
    let r = (gamma - i * k_right * alpha) / (i * k_right * beta - delta);
    let t = alpha + r * beta;

    let transmission = k_right / k_left * t.norm_sqr();
    let reflection = r.norm_sqr();
    if !(transmission.is_finite() && reflection.is_finite())
        || (transmission + reflection - 1.0).abs() > FLUX_TOLERANCE
    {
        return Err(Error::NoConvergence(format!(
            "transfer matrix lost flux at energy {energy}: T + R = {}",
            transmission + reflection
        )));
    }
    Ok(TunnelingResult {
        transmission,
        reflection,
        energy,
    })
}

/// `transmission_reflection` at `steps` evenly spaced energies in `[e_min, e_max]`.
pub fn tunneling_sweep(
    potential: &PotentialProfile,
    params: &ModelParams,
    e_min: f64,
    e_max: f64,
    steps: usize,
    region: RangeInclusive<usize>,
) -> Result<Vec<TunnelingResult>> {
    if steps == 0 || !(e_min > 0.0) || !(e_max >= e_min) {
        return Err(Error::param(format!(
            "sweep needs 0 < e_min <= e_max and steps >= 1 (got {e_min}, {e_max}, {steps})"
        )));
    }
    (0..steps)
        .map(|s| {
            let e = if steps == 1 {
                e_min
            } else {
                e_min + (e_max - e_min) * s as f64 / (steps - 1) as f64
            };
            transmission_reflection(potential, params, e, region.clone())
        })
        .collect()
}
