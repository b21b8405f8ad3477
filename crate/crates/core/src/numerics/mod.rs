//! Quadrature, small symmetric-matrix algebra and reproducible Monte Carlo.

pub mod matrix;
pub mod montecarlo;
pub mod quadrature;

pub use matrix::{det_small, InfoMatrix};
pub use montecarlo::{mc_mean, mc_mean_vec, mc_samples, stream_rng, MCEstimate};
pub use quadrature::{
    integrate, integrate_line_vec, integrate_unit_vec, integrate_vec, QuadratureSpec,
};
