//! Direct sampling reconstruction for the Radon transform.
//!
//! The index function
//!
//! ```text
//! I(z) = d_n R*(H)(z) / n(z),   H(theta, tau) = h sum_j K(t_j - tau) Rf(theta, t_j)
//! ```
//!
//! correlates measured projections with a precomputed kernel
//! `K = (-Delta)^gamma R(eta)` of a smoothed power-law probe `eta`, back
//! projects the result and divides by the index of the domain indicator.
//! The fractional Laplacian only ever touches the probe, never the data.
//!
//! Around it the crate provides phantoms, a discrete Radon transform and its
//! dual, a filtered back projection baseline, noise models, error metrics,
//! probe spectra and the variance curve, plus a driver for the numerical
//! experiments.

pub mod analysis;
pub mod dsm;
pub mod error;
pub mod fbp;
pub mod grid;
pub mod io;
pub mod metrics;
pub mod noise;
pub mod phantom;
pub mod probe;
pub mod quadrature;
pub mod radon;
pub mod repro;
pub mod specfun;

pub use error::{Error, Result};
pub use grid::{AngleSet, Directions, GridGeometry, ImageGrid, Sinogram, TAxis};
