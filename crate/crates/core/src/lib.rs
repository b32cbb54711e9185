//! Numerical laboratory for two-dimensional radial scatterers with
//! zero-energy p-resonances.
//!
//! The crate builds the operator families (round well, delta ring, Robin
//! disc, free Laplacian), checks their closed-form resonance conditions,
//! realizes the per-mode resolvent, fits its low-frequency expansion,
//! evaluates the zero-energy time profile by contour quadrature and
//! evolves the wave equation by two independent methods so the
//! `u = u_d + u_z + u_r` decomposition can be measured.

pub mod cli;
pub mod config;
pub mod contour;
pub mod error;
pub mod linalg;
pub mod lowfreq;
pub mod models;
pub mod quad;
pub mod radial;
pub mod specfun;
pub mod verify;
pub mod wave;

pub use error::{Error, Result};
pub use num_complex::Complex64;
