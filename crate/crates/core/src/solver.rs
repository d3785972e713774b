//! Infinite-well Schrödinger problem on the price grid.
//!
//! The stationary equation `-(hbar^2 / 2m) psi'' + s * V psi = E psi` is
//! discretized with second-order central differences on the bin centers,
//! `h = 2 * epsilon`. The walls sit exactly at `p_min` and `p_max`, half a
//! bin outside the first and last centers; the Dirichlet condition is imposed
//! there through an antisymmetric ghost value (`psi_ghost = -psi_edge`),
//! which keeps the scheme second-order accurate up to the walls.
//!
//! Only the combination `potential_scale * mass * L^2 / hbar^2` shapes the
//! wave functions; the individual parameters just set the energy unit.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::PriceGrid;
use crate::potential::PotentialProfile;
use crate::tridiag::SymTridiagonal;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    pub hbar_eff: f64,
    pub mass: f64,
    /// Energy assigned to the normalized potential's maximum.
    pub potential_scale: f64,
}

impl Default for ModelParams {
    fn default() -> Self {
        ModelParams {
            hbar_eff: 1.0,
            mass: 1.0,
            potential_scale: 1.0,
        }
    }
}

impl ModelParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.hbar_eff.is_finite() && self.hbar_eff > 0.0) {
            return Err(Error::param(format!("hbar_eff must be > 0 (got {})", self.hbar_eff)));
        }
        if !(self.mass.is_finite() && self.mass > 0.0) {
            return Err(Error::param(format!("mass must be > 0 (got {})", self.mass)));
        }
        if !(self.potential_scale.is_finite() && self.potential_scale >= 0.0) {
            return Err(Error::param(format!(
                "potential_scale must be >= 0 (got {})",
                self.potential_scale
            )));
        }
        Ok(())
    }

    /// `hbar^2 / (2m)`, the coefficient of `-psi''`.
    pub fn kinetic_coefficient(&self) -> f64 {
        self.hbar_eff * self.hbar_eff / (2.0 * self.mass)
    }
}

/// Discretized Hamiltonian together with the grid and parameters it was
/// built from.
#[derive(Debug, Clone, PartialEq)]
pub struct Hamiltonian {
    pub grid: PriceGrid,
    pub params: ModelParams,
    pub matrix: SymTridiagonal,
}

pub fn assemble_hamiltonian(
    grid: &PriceGrid,
    potential: &PotentialProfile,
    params: &ModelParams,
) -> Result<Hamiltonian> {
    params.validate()?;
    grid.ensure_same(&potential.grid, "hamiltonian grid and potential")?;
    let k = grid.k();
    let h = grid.spacing();
    let coupling = params.kinetic_coefficient() / (h * h);
    let diag = (0..k)
        .map(|j| {
            let wall = if j == 0 || j + 1 == k { coupling } else { 0.0 };
            2.0 * coupling + wall + params.potential_scale * potential.values[j]
        })
        .collect();
    let off = vec![-coupling; k - 1];
    Ok(Hamiltonian {
        grid: grid.clone(),
        params: *params,
        matrix: SymTridiagonal::new(diag, off)?,
    })
}

/// Lowest eigenstates; each state is normalized so `sum psi^2 * h = 1` and
/// its first non-negligible component is positive.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EigenSolution {
    pub grid: PriceGrid,
    pub params: ModelParams,
    pub energies: Vec<f64>,
    pub states: Vec<Vec<f64>>,
}

pub fn solve_eigenpairs(hamiltonian: &Hamiltonian, m: usize) -> Result<EigenSolution> {
    let k = hamiltonian.grid.k();
    if m == 0 || m > k {
        return Err(Error::param(format!("number of states must be in 1..={k} (got {m})")));
    }
    let (energies, vectors) = hamiltonian.matrix.lowest_eigenpairs(m)?;
    let scale = 1.0 / hamiltonian.grid.spacing().sqrt();
    let states = vectors
        .into_iter()
        .map(|mut v| {
            let peak = v.iter().fold(0.0f64, |m, x| m.max(x.abs()));
            let sign = v
                .iter()
                .find(|x| x.abs() > 1e-12 * peak)
                .map_or(1.0, |x| x.signum());
            v.iter_mut().for_each(|x| *x *= sign * scale);
            v
        })
        .collect();
    Ok(EigenSolution {
        grid: hamiltonian.grid.clone(),
        params: hamiltonian.params,
        energies,
        states,
    })
}

/// Which eigenstates make up the forecast.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum ForecastMode {
    #[default]
    GroundState,
    /// Thermal mixture with weights `exp(-E_n / temperature)`.
    BoltzmannMixture { temperature: f64 },
}

/// Probability of the price ending in each bin.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ForecastDensity {
    pub grid: PriceGrid,
    pub mass: Vec<f64>,
    pub mode: ForecastMode,
}

impl ForecastDensity {
    pub fn argmax(&self) -> usize {
        argmax(&self.mass)
    }

    /// Mass-weighted mean price.
    pub fn mean_price(&self) -> f64 {
        self.grid
            .centers()
            .iter()
            .zip(&self.mass)
            .map(|(p, m)| p * m)
            .sum()
    }
}

pub(crate) fn argmax(v: &[f64]) -> usize {
    v.iter()
        .enumerate()
        .fold((0, f64::NEG_INFINITY), |(bi, bv), (i, &x)| if x > bv { (i, x) } else { (bi, bv) })
        .0
}

pub fn forecast_density(solution: &EigenSolution, mode: ForecastMode) -> Result<ForecastDensity> {
    if solution.states.is_empty() {
        return Err(Error::param("eigen solution has no states"));
    }
    let h = solution.grid.spacing();
    let k = solution.grid.k();
    let weights = match mode {
        ForecastMode::GroundState => vec![1.0],
        ForecastMode::BoltzmannMixture { temperature } => {
            if !(temperature > 0.0) {
                return Err(Error::param(format!(
                    "temperature must be > 0 (got {temperature})"
                )));
            }
            let e0 = solution.energies[0];
            let raw: Vec<f64> = solution
                .energies
                .iter()
                .map(|e| (-(e - e0) / temperature).exp())
                .collect();
            let z: f64 = raw.iter().sum();
            raw.into_iter().map(|w| w / z).collect()
        }
    };
    let mut mass = vec![0.0; k];
    for (w, state) in weights.iter().zip(&solution.states) {
        for (m, psi) in mass.iter_mut().zip(state) {
            *m += w * psi * psi * h;
        }
    }
    // states are normalized to ~1e-15; renormalize so the total is exact to rounding
    let total: f64 = mass.iter().sum();
    mass.iter_mut().for_each(|m| *m /= total);
    Ok(ForecastDensity {
        grid: solution.grid.clone(),
        mass,
        mode,
    })
}

/// Assembles, solves and returns the ground-state density in one step.
pub fn ground_state_density(potential: &PotentialProfile, params: &ModelParams) -> Result<ForecastDensity> {
    let h = assemble_hamiltonian(&potential.grid, potential, params)?;
    let sol = solve_eigenpairs(&h, 1)?;
    forecast_density(&sol, ForecastMode::GroundState)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::build_price_grid;
    use std::f64::consts::PI;

    fn flat(k: usize, lo: f64, hi: f64) -> PotentialProfile {
        PotentialProfile::flat(build_price_grid(lo, hi, k).unwrap())
    }

    fn sign_changes(v: &[f64]) -> usize {
        let peak = v.iter().fold(0.0f64, |m, x| m.max(x.abs()));
        let signs: Vec<f64> = v.iter().filter(|x| x.abs() > 1e-9 * peak).map(|x| x.signum()).collect();
        signs.windows(2).filter(|w| w[0] != w[1]).count()
    }

    #[test]
    fn hamiltonian_entries() {
        // k = 3 on a width-0.75 well gives h = 0.25, so hbar^2/(2 m h^2) = 8
        let v = flat(3, 0.0, 0.75);
        let h = assemble_hamiltonian(&v.grid, &v, &ModelParams::default()).unwrap();
        assert_eq!(h.matrix.diag(), &[24.0, 16.0, 24.0]);
        assert_eq!(h.matrix.off(), &[-8.0, -8.0]);
    }

    #[test]
    fn zero_scale_ignores_potential() {
        let g = build_price_grid(0.0, 1.0, 10).unwrap();
        let bumpy = PotentialProfile::from_raw(g.clone(), (0..10).map(|i| (i * 7 % 5) as f64).collect()).unwrap();
        let p = ModelParams { potential_scale: 0.0, ..Default::default() };
        let a = assemble_hamiltonian(&g, &bumpy, &p).unwrap();
        let b = assemble_hamiltonian(&g, &PotentialProfile::flat(g.clone()), &p).unwrap();
        assert_eq!(a.matrix, b.matrix);
    }

    #[test]
    fn symmetric_potential_gives_reversal_symmetric_matrix() {
        let g = build_price_grid(0.0, 1.0, 9).unwrap();
        let raw = vec![0.0, 1.0, 2.0, 3.0, 4.0, 3.0, 2.0, 1.0, 0.0];
        let v = PotentialProfile::from_raw(g.clone(), raw).unwrap();
        let h = assemble_hamiltonian(&g, &v, &ModelParams::default()).unwrap();
        let d = h.matrix.diag();
        assert!(d.iter().zip(d.iter().rev()).all(|(a, b)| a == b));
    }

    #[test]
    fn grid_mismatch_rejected() {
        let v = flat(10, 0.0, 1.0);
        let other = build_price_grid(0.0, 2.0, 10).unwrap();
        assert!(matches!(
            assemble_hamiltonian(&other, &v, &ModelParams::default()),
            Err(Error::GridMismatch(_))
        ));
    }

    #[test]
    fn flat_well_spectrum() {
        let v = flat(1000, 0.0, 1.0);
        let h = assemble_hamiltonian(&v.grid, &v, &ModelParams::default()).unwrap();
        let sol = solve_eigenpairs(&h, 5).unwrap();
        let e1 = PI * PI / 2.0;
        assert!((sol.energies[0] - e1).abs() / e1 < 5e-3);
        for n in 1..=5 {
            let ratio = sol.energies[n - 1] / sol.energies[0];
            assert!((ratio / (n * n) as f64 - 1.0).abs() < 5e-3);
            assert_eq!(sign_changes(&sol.states[n - 1]), n - 1);
        }
    }

    #[test]
    fn flat_well_ground_state_is_sine_squared() {
        let v = flat(200, 3.0, 7.0);
        let d = ground_state_density(&v, &ModelParams::default()).unwrap();
        let h = v.grid.spacing();
        for (p, m) in v.grid.centers().iter().zip(&d.mass) {
            let expected = 2.0 / 4.0 * (PI * (p - 3.0) / 4.0).sin().powi(2) * h;
            assert!((m - expected).abs() < 1e-12, "{m} vs {expected}");
        }
        assert!((d.argmax() as i64 - 99).abs() <= 1);
    }

    #[test]
    fn sign_convention() {
        let v = flat(50, 0.0, 1.0);
        let h = assemble_hamiltonian(&v.grid, &v, &ModelParams::default()).unwrap();
        let sol = solve_eigenpairs(&h, 4).unwrap();
        for s in &sol.states {
            assert!(s[0] > 0.0);
        }
    }

    #[test]
    fn boltzmann_limits() {
        let g = build_price_grid(0.0, 1.0, 100).unwrap();
        let raw: Vec<f64> = g.centers().iter().map(|p| (-(p - 0.3f64).powi(2) / 0.01).exp()).collect();
        let v = PotentialProfile::from_raw(g.clone(), raw).unwrap();
        let p = ModelParams { potential_scale: 50.0, ..Default::default() };
        let sol = solve_eigenpairs(&assemble_hamiltonian(&g, &v, &p).unwrap(), 6).unwrap();
        let ground = forecast_density(&sol, ForecastMode::GroundState).unwrap();
        let cold = forecast_density(&sol, ForecastMode::BoltzmannMixture { temperature: 1e-6 }).unwrap();
        for (a, b) in ground.mass.iter().zip(&cold.mass) {
            assert!((a - b).abs() < 1e-9);
        }
        let hot = forecast_density(&sol, ForecastMode::BoltzmannMixture { temperature: 100.0 }).unwrap();
        assert!((hot.mass.iter().sum::<f64>() - 1.0).abs() < 1e-10);
        assert!(forecast_density(&sol, ForecastMode::BoltzmannMixture { temperature: 0.0 }).is_err());
    }

    #[test]
    fn bad_state_counts() {
        let v = flat(10, 0.0, 1.0);
        let h = assemble_hamiltonian(&v.grid, &v, &ModelParams::default()).unwrap();
        assert!(solve_eigenpairs(&h, 0).is_err());
        assert!(solve_eigenpairs(&h, 11).is_err());
        assert_eq!(solve_eigenpairs(&h, 10).unwrap().states.len(), 10);
    }

    #[test]
    fn invalid_params() {
        let v = flat(10, 0.0, 1.0);
        for p in [
            ModelParams { hbar_eff: 0.0, ..Default::default() },
            ModelParams { mass: -1.0, ..Default::default() },
            ModelParams { potential_scale: -0.1, ..Default::default() },
        ] {
            assert!(assemble_hamiltonian(&v.grid, &v, &p).is_err());
        }
    }
}
