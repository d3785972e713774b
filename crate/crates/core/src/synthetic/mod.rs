//! Seeded synthetic market data plus brute-force and closed-form oracles.
//!
//! The oracles here deliberately share no accumulation, distribution or
//! eigen code with the modules they check: `brute_force_held_shares` walks
//! days and bins with its own bin search, its own rolling volatility and
//! Gauss-Legendre quadrature in place of the error function.

mod generator;
mod oracle;
mod rng;

pub use generator::{generate_series, PriceProcess, SyntheticSpec, VolumeSpec};
pub use oracle::{analytic_flat_well_energy, analytic_rectangular_barrier_t, brute_force_held_shares};
pub use rng::Lcg64;
