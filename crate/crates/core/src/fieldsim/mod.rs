//! Exact simulation: fractional Brownian motion, stationary fields on
//! lattices, and the strong-dependence mixture field.

pub mod circulant;
mod dump;
mod fbm;
mod field;

pub use dump::{read_gfld, write_gfld};
pub use fbm::{fgn_autocovariance, simulate_fbm, FbmPath, FbmSimulator};
pub use field::{
    lattice_len, max_on_subgrid, max_on_subgrid_raw, mixture_shift, simulate_field, simulate_strong_field,
    FieldSample, FieldSimulator, DEFAULT_MAX_LATTICE_POINTS,
};
