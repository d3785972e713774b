//! Technical-analysis patterns read off the potential and the forecast
//! density: support/resistance barriers, the direction a sideways channel is
//! likely to break, tunneling through a trend line and the drift of the
//! potential under its own forecast.

mod barriers;
mod breakout;
mod migration;
mod tunneling;

pub use barriers::{detect_barriers, Barrier, BarrierSet};
pub use breakout::{breakout_direction, Breakout};
pub use migration::{center_of_mass, run_migration, trend_migration_step, MigrationRates};
pub use tunneling::{
    slab_transfer_matrices, transmission_reflection, tunneling_sweep, SlabMatrix, TunnelingResult,
};
