//! Per-mode wave evolution `u(t) = sin(t sqrt(P))/sqrt(P) f`, solved in the
//! time domain and through the spectral measure, plus the
//! `u = u_d + u_z + u_r` bookkeeping and decay-law fits.

mod fd;
mod fit;
mod spectral;
mod split;

pub use fd::{evolve_fd, FdOperator, FdOptions};
pub use fit::{fit_decay, DecayFit, DecayLaw};
pub use spectral::{evolve_spectral, SpectralOptions};
pub use split::{decompose, pointwise_fit, zero_eigenstate, BoundAmplitude, DecaySplit, SplitInputs, ZeroEigenstate};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::models::RadialModel;
use crate::radial::RadialGrid;

/// Models count as tuned to threshold when the normalized zero-energy
/// mismatch is below this.
pub const THRESHOLD_TOL: f64 = 1e-9;

/// Whether `mode` of `model` has a zero-energy state (resonance or
/// eigenvalue).
pub fn at_threshold(model: &RadialModel, mode: i32) -> bool {
    mode != 0 && !matches!(model, RadialModel::Free) && crate::models::zero_energy_mismatch(model, mode).abs() <= THRESHOLD_TOL
}

/// Initial velocity `f` sampled on a radial grid; zero beyond the last node.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RadialSamples {
    pub grid: RadialGrid,
    pub values: Vec<f64>,
}

impl RadialSamples {
    /// Samples `f` on the model-aligned grid of spacing `h` out to `r_max`.
    pub fn from_fn<F: Fn(f64) -> f64>(model: &RadialModel, r_max: f64, h: f64, f: F) -> Result<Self> {
        let grid = RadialGrid::aligned(model, r_max, h)?;
        let values = grid.sample(f);
        Ok(Self { grid, values })
    }

    pub fn new(grid: RadialGrid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.n {
            return Err(Error::Grid("samples do not match the grid".into()));
        }
        Ok(Self { grid, values })
    }

    /// Radius of the last nonzero sample.
    pub fn support_end(&self) -> f64 {
        let k = self.values.iter().rposition(|v| *v != 0.0).unwrap_or(0);
        self.grid.r(k)
    }

    pub fn is_zero(&self) -> bool {
        self.values.iter().all(|v| *v == 0.0)
    }

    /// `int f g r dr` for `g` on the same grid.
    pub fn pairing(&self, g: &[f64], interface: Option<f64>) -> f64 {
        let v: Vec<num_complex::Complex64> = self
            .values
            .iter()
            .zip(g)
            .map(|(a, b)| num_complex::Complex64::new(a * b, 0.0))
            .collect();
        self.grid.integrate_weighted(&v, interface).re
    }

    pub fn norm(&self, interface: Option<f64>) -> f64 {
        self.pairing(&self.values, interface).sqrt()
    }
}

/// Observer time series of one evolution.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WaveField {
    pub mode: i32,
    pub r_grid: RadialGrid,
    pub times: Vec<f64>,
    pub observers: Vec<f64>,
    /// `values[i][j]` is `u(observers[i], times[j])`.
    pub values: Vec<Vec<f64>>,
    pub cfl: f64,
    /// Conserved discrete energy per recorded step (finite-difference runs
    /// with energy tracking only).
    pub energy: Vec<f64>,
}

impl WaveField {
    pub fn series(&self, observer: usize) -> &[f64] {
        &self.values[observer]
    }

    /// Largest `|u|` over all observers and times.
    pub fn scale(&self) -> f64 {
        self.values.iter().flatten().fold(0.0, |m, v| m.max(v.abs()))
    }
}
