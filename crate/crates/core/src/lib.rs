//! Joint behaviour of the continuous maximum and the grid-sampled maximum of
//! homogeneous Gaussian random fields on ℝ².
//!
//! * [`model`]: covariance family, horizons, grid regimes, ρ(T).
//! * [`fieldsim`]: exact fBm and lattice field simulation by circulant embedding.
//! * [`pickands`]: Monte Carlo estimates of Pickands-type constants.
//! * [`limits`]: normalising constants and the limiting joint distributions.
//! * [`experiments`]: Monte Carlo checks of simulation against the limits.

pub mod error;
pub mod experiments;
pub mod fieldsim;
pub mod limits;
pub mod model;
pub mod parallel;
pub mod pickands;
pub mod quadrature;
pub mod report;
pub mod rng;
pub mod special;

pub use error::{Error, Result};
pub use model::{covariance, CovarianceModel, Family, GridSpec, Horizon, Regime};
