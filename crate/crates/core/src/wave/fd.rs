//! Time-domain solver: vertex-centred finite volumes in `r` with
//! fourth-order modified-equation leapfrog in `t`.

use serde::{Deserialize, Serialize};

use super::{RadialSamples, WaveField};
use crate::error::{Error, Result};
use crate::models::RadialModel;
use crate::radial::RadialGrid;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FdOptions {
    /// Courant number `dt / h`, at most 0.9.
    pub cfl: f64,
    /// Spacing of recorded samples; 0 records every step.
    pub sample_dt: f64,
    /// Record the conserved discrete energy. Disables the shrinking of the
    /// active region behind the observers' backward light cone.
    pub track_energy: bool,
    /// Retune the discrete coupling of threshold models (see
    /// [`FdOperator::at_threshold`]).
    pub tune_threshold: bool,
}

impl Default for FdOptions {
    fn default() -> Self {
        Self { cfl: 0.5, sample_dt: 0.1, track_energy: false, tune_threshold: true }
    }
}

/// The discrete operator `A = W^{-1} K` on the nodes of a grid, with `K`
/// symmetric tridiagonal and `W` the dual-cell areas `int r dr`. The last
/// node is a Dirichlet wall; for `m != 0` on a grid through the origin so
/// is node 0.
#[derive(Clone, Debug, PartialEq)]
pub struct FdOperator {
    pub grid: RadialGrid,
    /// First unknown (1 when `u(0) = 0` is imposed).
    pub first: usize,
    pub weights: Vec<f64>,
    pub diag: Vec<f64>,
    /// `off[k] = K[k][k+1]`.
    pub off: Vec<f64>,
    m2: f64,
    /// Outermost node carrying the coupling.
    coupled: usize,
}

impl FdOperator {
    pub fn new(model: &RadialModel, mode: i32, grid: RadialGrid) -> Result<Self> {
        Self::with_coupling(model, mode, grid, 1.0)
    }

    /// As [`FdOperator::new`] with the coupling of the model (`a^2` of the
    /// well, `a` of the ring, `sigma` of the disc) multiplied by `scale`.
    pub fn with_coupling(model: &RadialModel, mode: i32, grid: RadialGrid, scale: f64) -> Result<Self> {
        let n = grid.n;
        if n < 4 {
            return Err(Error::Grid("fewer than four nodes".into()));
        }
        let h = grid.h;
        let r0 = grid.r0;
        if (r0 - model.inner_radius()).abs() > 1e-12 {
            return Err(Error::Grid(format!("grid starts at {r0}, model at {}", model.inner_radius())));
        }
        let interface_node = match model {
            RadialModel::RoundWell { radius, .. } | RadialModel::DeltaRing { radius, .. } => Some(
                grid.node_of(*radius)
                    .ok_or_else(|| Error::Grid(format!("interface r = {radius} is not a node of spacing {h}")))?,
            ),
            _ => None,
        };
        let m2 = (mode as f64).powi(2);
        let first = usize::from(r0 == 0.0 && mode != 0);
        let weights: Vec<f64> = (0..n)
            .map(|k| match k {
                0 if r0 == 0.0 => h * h / 8.0,
                0 => 0.5 * h * (r0 + 0.25 * h),
                _ => grid.r(k) * h,
            })
            .collect();
        let flux: Vec<f64> = (0..n - 1).map(|k| (grid.r(k) + 0.5 * h) / h).collect();
        let mut diag = vec![0.0; n];
        let mut off = vec![0.0; n - 1];
        for k in 0..n {
            let r = grid.r(k);
            let mut d = flux.get(k).copied().unwrap_or(0.0) + if k > 0 { flux[k - 1] } else { 0.0 };
            if r > 0.0 {
                d += weights[k] * m2 / (r * r);
            }
            match *model {
                RadialModel::RoundWell { a, radius } => {
                    let inside = match interface_node {
                        Some(ki) if k == ki => 0.5 * h * radius - 0.125 * h * h,
                        Some(ki) if k < ki => weights[k],
                        _ => 0.0,
                    };
                    d -= scale * a * a * inside;
                }
                RadialModel::DeltaRing { a, radius } if Some(k) == interface_node => d += scale * a * radius,
                RadialModel::RobinDisc { rho, sigma } if k == 0 => d -= scale * sigma * rho,
                _ => {}
            }
            diag[k] = d;
        }
        for k in 0..n - 1 {
            off[k] = -flux[k];
        }
        if first == 1 {
            off[0] = 0.0;
            diag[0] = 1.0;
        }
        Ok(Self { grid, first, weights, diag, off, m2, coupled: interface_node.unwrap_or(0) })
    }

    /// Operator whose coupling is retuned so that the discrete problem sits
    /// exactly at threshold. Second-order differencing otherwise detunes a
    /// threshold model by `O(h^2)`, which changes the late-time law once
    /// `t` exceeds roughly `1/h`. Returns the operator and the scale used.
    pub fn at_threshold(model: &RadialModel, mode: i32, grid: RadialGrid) -> Result<(Self, f64)> {
        if mode == 0 || matches!(model, RadialModel::Free) {
            return Err(Error::Grid("threshold tuning needs a coupled model and m != 0".into()));
        }
        let mismatch = |s: f64| -> Result<f64> { Self::with_coupling(model, mode, grid, s)?.zero_energy_mismatch() };
        let (mut s0, mut s1) = (1.0, 1.0 + 1e-3);
        let (mut f0, mut f1) = (mismatch(s0)?, mismatch(s1)?);
        for _ in 0..50 {
            if f1.abs() <= 1e-14 || f1 == f0 {
                break;
            }
            let s2 = s1 - f1 * (s1 - s0) / (f1 - f0);
            (s0, f0) = (s1, f1);
            s1 = s2;
            f1 = mismatch(s1)?;
        }
        if !(f1.abs() <= 1e-12) || !(s1 - 1.0).abs().lt(&0.1) {
            return Err(Error::Grid(format!("could not tune the discrete coupling to threshold (mismatch {f1:.2e})")));
        }
        Ok((Self::with_coupling(model, mode, grid, s1)?, s1))
    }

    /// Normalized discrete Wronskian between the zero-energy solution that
    /// is regular at the inner boundary and the recessive exterior one.
    /// Vanishes when the discrete problem has a threshold state.
    pub fn zero_energy_mismatch(&self) -> Result<f64> {
        let grid = &self.grid;
        let h = grid.h;
        let coupled = self.coupled;
        let k0 = coupled + 2 + (1.0 / h).ceil() as usize;
        if k0 + 1 >= self.last() {
            return Err(Error::Grid("grid too short to match the zero-energy solution".into()));
        }
        // forward from the inner boundary
        let mut u = vec![0.0; k0 + 2];
        u[self.first] = 1.0;
        for k in self.first..=k0 {
            let back = if k > self.first { self.off[k - 1] * u[k - 1] } else { 0.0 };
            u[k + 1] = -(self.diag[k] * u[k] + back) / self.off[k];
        }
        // backward from far out, where the recessive solution is r^{-|m|}
        let m = self.m2.sqrt();
        let r = |k: usize| grid.r0 + k as f64 * h;
        let flux = |k: usize| (r(k) + 0.5 * h) / h;
        let free_diag = |k: usize| flux(k) + flux(k - 1) + r(k) * h * m * m / (r(k) * r(k));
        let far = k0 + 1 + ((100.0 * r(k0) - r(k0)) / h).ceil() as usize;
        let (mut v_hi, mut v) = (r(far + 1).powf(-m), r(far).powf(-m));
        let mut k = far;
        while k > k0 {
            let v_lo = (free_diag(k) * v - flux(k) * v_hi) / flux(k - 1);
            v_hi = v;
            v = v_lo;
            k -= 1;
            let norm = v.abs();
            v /= norm;
            v_hi /= norm;
        }
        let (a, b) = (u[k0], u[k0 + 1]);
        Ok((a * v_hi - b * v) / ((a * a + b * b).sqrt() * (v * v + v_hi * v_hi).sqrt()))
    }

    /// Index of the Dirichlet wall.
    pub fn last(&self) -> usize {
        self.grid.n - 1
    }

    /// `out[k] = (A u)[k]` for `k in lo..=hi`, treating `u` as zero at
    /// constrained nodes.
    pub fn apply_range(&self, u: &[f64], out: &mut [f64], lo: usize, hi: usize) {
        let last = self.last();
        for k in lo..=hi {
            let mut s = self.diag[k] * u[k];
            if k > self.first {
                s += self.off[k - 1] * u[k - 1];
            }
            if k + 1 < last {
                s += self.off[k] * u[k + 1];
            }
            out[k] = s / self.weights[k];
        }
    }

    pub fn apply(&self, u: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; u.len()];
        self.apply_range(u, &mut out, self.first, self.last() - 1);
        out
    }

    /// Diagonal and off-diagonal of `S = W^{1/2} A W^{-1/2}` on the unknowns
    /// `first..last`.
    pub fn symmetric(&self) -> (Vec<f64>, Vec<f64>) {
        let idx: Vec<usize> = (self.first..self.last()).collect();
        let d = idx.iter().map(|&k| self.diag[k] / self.weights[k]).collect();
        let o = idx
            .windows(2)
            .map(|p| self.off[p[0]] / (self.weights[p[0]] * self.weights[p[1]]).sqrt())
            .collect();
        (d, o)
    }

    /// Gershgorin bound on the spectrum of `S`: `(lowest, highest)`.
    pub fn spectral_bounds(&self) -> (f64, f64) {
        let (d, o) = self.symmetric();
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for k in 0..d.len() {
            let rad = if k > 0 { o[k - 1].abs() } else { 0.0 } + o.get(k).map_or(0.0, |v| v.abs());
            lo = lo.min(d[k] - rad);
            hi = hi.max(d[k] + rad);
        }
        (lo, hi)
    }
}

/// Solves `(d_t^2 + P) u = 0`, `u(0) = 0`, `u_t(0) = f` up to `t_final` on a
/// grid whose hard wall lies beyond `r_support + r_obs + t_final + 2`.
pub fn evolve_fd(
    model: &RadialModel,
    mode: i32,
    f: &RadialSamples,
    t_final: f64,
    observers: &[f64],
    opts: &FdOptions,
) -> Result<WaveField> {
    if !(opts.cfl > 0.0 && opts.cfl <= 0.9) {
        return Err(Error::Stability(format!("courant number {} outside (0, 0.9]", opts.cfl)));
    }
    if !(t_final > 0.0 && t_final.is_finite()) || observers.is_empty() {
        return Err(Error::Grid("need a positive final time and at least one observer".into()));
    }
    let h = f.grid.h;
    if (f.grid.r0 - model.inner_radius()).abs() > 1e-12 {
        return Err(Error::Grid("data grid does not start at the model's inner radius".into()));
    }
    let r_obs = observers.iter().fold(0.0f64, |m, r| m.max(*r));
    let wall = f.support_end().max(f.grid.r0) + r_obs + t_final + 2.0;
    let grid = RadialGrid::aligned(model, f.grid.r0 + ((wall - f.grid.r0) / h).ceil() * h + 3.0 * h, h)?;
    let op = if opts.tune_threshold && super::at_threshold(model, mode) {
        FdOperator::at_threshold(model, mode, grid)?.0
    } else {
        FdOperator::new(model, mode, grid)?
    };
    let last = op.last();
    let obs_nodes = observers
        .iter()
        .map(|&r| {
            grid.node_of(r)
                .filter(|&k| k < last)
                .ok_or_else(|| Error::Grid(format!("observer r = {r} is not a grid node")))
        })
        .collect::<Result<Vec<_>>>()?;

    let steps = (t_final / (opts.cfl * h)).ceil() as usize;
    let dt = t_final / steps as f64;
    let (_, mu_max) = op.spectral_bounds();
    if dt * dt * mu_max >= 12.0 {
        return Err(Error::Stability(format!("dt^2 mu_max = {} reaches the limit 12", dt * dt * mu_max)));
    }
    let stride = ((opts.sample_dt / dt + 1e-9).floor() as usize).max(1);

    let n = grid.n;
    let mut u_prev = vec![0.0; n];
    let mut u = vec![0.0; n];
    let mut v = vec![0.0; n];
    let mut z = vec![0.0; n];
    let mut fv = vec![0.0; n];
    let lo = op.first;
    for (k, val) in f.values.iter().enumerate().take(last) {
        if k >= lo {
            fv[k] = *val;
        }
    }
    let k_src = fv.iter().rposition(|x| *x != 0.0).unwrap_or(lo);

    // u(dt) = dt f - dt^3/6 A f + dt^5/120 A^2 f
    op.apply_range(&fv, &mut v, lo, last - 1);
    op.apply_range(&v, &mut z, lo, last - 1);
    let (dt2, dt3, dt5) = (dt * dt, dt.powi(3), dt.powi(5));
    for k in lo..last {
        u[k] = dt * fv[k] - dt3 / 6.0 * v[k] + dt5 / 120.0 * z[k];
    }

    let mut times = vec![0.0];
    let mut values: Vec<Vec<f64>> = obs_nodes.iter().map(|_| vec![0.0]).collect();
    let mut energy = Vec::new();
    let weights = &op.weights;
    if opts.track_energy {
        energy.push((lo..last).map(|k| weights[k] * (u[k] / dt).powi(2)).sum());
    }
    let record = |step: usize, u: &[f64], times: &mut Vec<f64>, values: &mut Vec<Vec<f64>>| {
        times.push(step as f64 * dt);
        for (series, &k) in values.iter_mut().zip(&obs_nodes) {
            series.push(u[k]);
        }
    };
    if stride == 1 || steps == 1 {
        record(1, &u, &mut times, &mut values);
    }

    let back_node = |t: f64| -> usize {
        let r = r_obs + (t_final - t) + 2.0;
        (((r - grid.r0) / h).ceil() as usize + 4).min(last - 1)
    };
    let c4 = dt2 * dt2 / 12.0;
    for step in 1..steps {
        let front = (k_src + 2 * step + 4).min(last - 1);
        let hi = if opts.track_energy { front } else { front.min(back_node(step as f64 * dt)) };
        let hv = (hi + 1).min(last - 1);
        op.apply_range(&u, &mut v, lo, hv);
        if hv < last - 1 {
            v[hv + 1] = 0.0;
        }
        op.apply_range(&v, &mut z, lo, hi);
        for k in lo..=hi {
            let next = 2.0 * u[k] - u_prev[k] - dt2 * v[k] + c4 * z[k];
            u_prev[k] = next;
        }
        std::mem::swap(&mut u, &mut u_prev);
        let s = step + 1;
        if s % stride == 0 || s == steps {
            record(s, &u, &mut times, &mut values);
            if opts.track_energy {
                // E = |(u^{n+1} - u^n)/dt|^2 + <u^{n+1}, (A - dt^2 A^2/12) u^n>
                let e: f64 = (lo..=hi)
                    .map(|k| weights[k] * (((u[k] - u_prev[k]) / dt).powi(2) + u[k] * (v[k] - dt2 / 12.0 * z[k])))
                    .sum();
                energy.push(e);
            }
        }
    }
    Ok(WaveField {
        mode,
        r_grid: grid,
        times,
        observers: observers.to_vec(),
        values,
        cfl: dt / h,
        energy,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bump(r: f64, lo: f64, hi: f64) -> f64 {
        if r <= lo || r >= hi {
            0.0
        } else {
            let s = (r - lo) / (hi - lo);
            (std::f64::consts::PI * s).sin().powi(4)
        }
    }

    #[test]
    fn operator_is_symmetric_in_the_cell_weights() {
        let model = RadialModel::round_well(2.0, 1.0).unwrap();
        for mode in [0, 1, 3] {
            let grid = RadialGrid::aligned(&model, 5.0, 0.1).unwrap();
            let op = FdOperator::new(&model, mode, grid).unwrap();
            let x: Vec<f64> = (0..grid.n).map(|k| if k >= op.first && k < op.last() { (k as f64 * 0.37).sin() } else { 0.0 }).collect();
            let y: Vec<f64> = (0..grid.n).map(|k| if k >= op.first && k < op.last() { (k as f64 * 0.11).cos() } else { 0.0 }).collect();
            let (ax, ay) = (op.apply(&x), op.apply(&y));
            let dot = |a: &[f64], b: &[f64]| (0..grid.n).map(|k| op.weights[k] * a[k] * b[k]).sum::<f64>();
            assert!((dot(&ax, &y) - dot(&x, &ay)).abs() < 1e-10 * dot(&ax, &y).abs().max(1.0));
        }
    }

    #[test]
    fn operator_is_second_order_on_smooth_functions() {
        // -Delta of r^2 e^{-r^2} in mode 2 is smooth; compare at r = 1.
        let u = |r: f64| r * r * (-r * r).exp();
        let lap = |r: f64| {
            let (d1, d2) = (
                (2.0 * r - 2.0 * r.powi(3)) * (-r * r).exp(),
                (2.0 - 10.0 * r * r + 4.0 * r.powi(4)) * (-r * r).exp(),
            );
            -(d2 + d1 / r) + 4.0 * u(r) / (r * r)
        };
        let mut errs = Vec::new();
        for h in [0.05, 0.025] {
            let grid = RadialGrid::aligned(&RadialModel::Free, 8.0, h).unwrap();
            let op = FdOperator::new(&RadialModel::Free, 2, grid).unwrap();
            let au = op.apply(&grid.sample(u));
            let k = grid.node_of(1.0).unwrap();
            errs.push((au[k] - lap(1.0)).abs());
        }
        let ratio = errs[0] / errs[1];
        assert!(ratio > 3.5 && ratio < 4.5, "{errs:?}");
    }

    #[test]
    fn free_energy_is_conserved() {
        let model = RadialModel::Free;
        let f = RadialSamples::from_fn(&model, 5.0, 0.05, |r| bump(r, 2.0, 3.0)).unwrap();
        let opts = FdOptions { track_energy: true, sample_dt: 1.0, ..FdOptions::default() };
        let field = evolve_fd(&model, 1, &f, 100.0, &[2.5], &opts).unwrap();
        let e0 = field.energy[0];
        let drift = field.energy.iter().map(|e| (e - e0).abs() / e0).fold(0.0, f64::max);
        assert!(drift <= 1e-6, "{drift}");
    }

    #[test]
    fn zero_data_and_bad_courant_number() {
        let model = RadialModel::Free;
        let f = RadialSamples::from_fn(&model, 5.0, 0.05, |_| 0.0).unwrap();
        let field = evolve_fd(&model, 0, &f, 5.0, &[1.0], &FdOptions::default()).unwrap();
        assert!(field.scale() == 0.0);
        let bad = FdOptions { cfl: 0.95, ..FdOptions::default() };
        assert!(matches!(evolve_fd(&model, 0, &f, 5.0, &[1.0], &bad), Err(Error::Stability(_))));
        assert!(matches!(evolve_fd(&model, 0, &f, 5.0, &[1.01], &FdOptions::default()), Err(Error::Grid(_))));
    }

    #[test]
    fn finite_propagation_speed() {
        let model = RadialModel::Free;
        let f = RadialSamples::from_fn(&model, 5.0, 0.02, |r| bump(r, 2.0, 3.0)).unwrap();
        let opts = FdOptions { sample_dt: 0.0, ..FdOptions::default() };
        let field = evolve_fd(&model, 0, &f, 20.0, &[20.0], &opts).unwrap();
        let early = field
            .times
            .iter()
            .zip(field.series(0))
            .filter(|(t, _)| **t <= 16.0)
            .fold(0.0f64, |m, (_, v)| m.max(v.abs()));
        assert!(early <= 1e-10, "{early}");
        assert!(field.scale() > 1e-3);
    }
}
