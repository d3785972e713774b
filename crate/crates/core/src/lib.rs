//! Price forecasts from a particle in an infinite potential well.
//!
//! Historical end-of-day volume is turned into a potential over a price
//! grid: each day's volume is spread across the prices it traded at and
//! decays as the shares change hands again. The stationary Schrödinger
//! equation in a well spanning the grid then yields eigenstates whose
//! squared amplitudes are read as price distributions. Peaks of the
//! potential act as support and resistance levels.
//!
//! The pipeline, module by module:
//!
//! 1. [`market_data`]: parse and validate EOD bars.
//! 2. [`decay`]: turnover, decay constants and survival weights.
//! 3. [`potential`]: held shares per price bin and the normalized potential.
//! 4. [`solver`]: finite-difference Hamiltonian, eigenstates, forecast density.
//! 5. [`analysis`]: barriers, breakout odds, tunneling, potential migration.
//!
//! [`synthetic`] generates reproducible test series and holds the
//! independent oracles the test suite checks against; [`cli`] wires it all
//! into the `qmarket` binary.
//!
//! ```
//! use quantum_market::grid::build_price_grid;
//! use quantum_market::potential::PotentialProfile;
//! use quantum_market::solver::{ground_state_density, ModelParams};
//!
//! let grid = build_price_grid(10.0, 20.0, 100).unwrap();
//! let well = PotentialProfile::flat(grid);
//! let density = ground_state_density(&well, &ModelParams::default()).unwrap();
//! // an empty well peaks in the middle
//! assert!((density.argmax() as i64 - 49).abs() <= 1);
//! ```

// `!(x > 0.0)` style checks are deliberate: they also reject NaN
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analysis;
pub mod cli;
pub mod decay;
pub mod error;
pub mod grid;
pub mod io;
pub mod market_data;
pub mod potential;
pub mod solver;
pub mod synthetic;
pub mod tridiag;

pub use error::{Error, Result};

// Every code block in the guide runs as a doctest.
#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/intro.md")]
    mod intro {}
    #[doc = include_str!("../../../book/src/market-data.md")]
    mod market_data {}
    #[doc = include_str!("../../../book/src/decay.md")]
    mod decay {}
    #[doc = include_str!("../../../book/src/potential.md")]
    mod potential {}
    #[doc = include_str!("../../../book/src/solver.md")]
    mod solver {}
    #[doc = include_str!("../../../book/src/analysis.md")]
    mod analysis {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
    #[doc = include_str!("../../../README.md")]
    mod readme {}
}
