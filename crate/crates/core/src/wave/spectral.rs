//! Spectral solver:
//! `u(t) = sum_l sinh(kappa_l t)/kappa_l <f, phi_l> phi_l + t Pi_0 f
//!        + (2/pi) int_0^inf sin(t lambda) Im[R(lambda + i0) f] d lambda`.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::split::zero_eigenstate;
use super::{RadialSamples, WaveField};
use crate::error::{Error, Result};
use crate::models::RadialModel;
use crate::quad::gauss_legendre;
use crate::radial::{find_bound_states, solve_mode_unchecked, ModeProblem};
use crate::specfun::BranchedComplex;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpectralOptions {
    pub lambda_max: f64,
    /// Lower end of the geometric panels toward `lambda = 0`.
    pub lambda_min: f64,
    /// Panels satisfy `width * t_max <= panel_phase`.
    pub panel_phase: f64,
    pub max_panel: f64,
    pub gl_order: usize,
}

impl Default for SpectralOptions {
    fn default() -> Self {
        Self { lambda_max: 40.0, lambda_min: 1e-8, panel_phase: 3.0, max_panel: 0.1, gl_order: 8 }
    }
}

fn panels(opts: &SpectralOptions, t_max: f64) -> Vec<(f64, f64)> {
    let width = opts.max_panel.min(opts.panel_phase / t_max.max(1.0));
    let split = (0.5 * width).min(opts.lambda_max);
    let mut out = Vec::new();
    let mut a = opts.lambda_min;
    while a < split {
        let b = (2.0 * a).min(split);
        out.push((a, b));
        a = b;
    }
    let n = ((opts.lambda_max - split) / width).ceil().max(1.0) as usize;
    let w = (opts.lambda_max - split) / n as f64;
    out.extend((0..n).map(|i| (split + i as f64 * w, split + (i + 1) as f64 * w)));
    out
}

/// `Im[R(lambda + i0) f]` at each observer for real `lambda > 0`.
fn spectral_density(
    model: &RadialModel,
    mode: i32,
    f: &RadialSamples,
    support: &[usize],
    observers: &[f64],
    lambda: f64,
) -> Result<Vec<f64>> {
    let kernel = solve_mode_unchecked(&ModeProblem::new(*model, mode, BranchedComplex::real(lambda))?)?;
    let grid = &f.grid;
    let mut g = vec![Complex64::new(0.0, 0.0); grid.n];
    for &k in support {
        g[k] = Complex64::new(kernel.regular(grid.r(k))?.0.re * f.values[k], 0.0);
    }
    let pairing = grid.integrate_weighted(&g, model.interface()).re;
    let factor = kernel.spectral_factor() * pairing;
    observers
        .iter()
        .map(|&r| Ok(factor * kernel.regular(r)?.0.re))
        .collect()
}

/// `int_0^{lm} lambda S d lambda` for `1/(lambda^2 S)` quadratic in
/// `ln lambda`, fitted through three points.
fn log_tail(pts: &[(f64, f64)], lm: f64) -> Result<f64> {
    let x: Vec<f64> = pts.iter().map(|p| p.0.ln()).collect();
    let y: Vec<f64> = pts.iter().map(|p| 1.0 / (p.0 * p.0 * p.1)).collect();
    if y.iter().any(|v| !v.is_finite()) {
        return Err(Error::RefinementLimit { achieved: f64::INFINITY });
    }
    // divided differences
    let d01 = (y[1] - y[0]) / (x[1] - x[0]);
    let d12 = (y[2] - y[1]) / (x[2] - x[1]);
    let alpha = (d12 - d01) / (x[2] - x[0]);
    let beta = d01 - alpha * (x[0] + x[1]);
    let gamma = y[0] - alpha * x[0] * x[0] - beta * x[0];
    let shift = beta / (2.0 * alpha);
    let e = gamma / alpha - shift * shift;
    if !(alpha.abs() > 0.0) || !(e / alpha.signum() > 0.0) {
        return Err(Error::RefinementLimit { achieved: f64::INFINITY });
    }
    // int_{-inf}^{X} dx / (alpha (x^2 + e))
    let se = (e * alpha.signum()).sqrt();
    let big_x = lm.ln() + shift;
    Ok(((big_x / se).atan() + PI / 2.0) / (alpha * se))
}

pub fn evolve_spectral(
    model: &RadialModel,
    mode: i32,
    f: &RadialSamples,
    times: &[f64],
    observers: &[f64],
    opts: &SpectralOptions,
) -> Result<WaveField> {
    if times.iter().any(|t| !(*t >= 0.0 && t.is_finite())) || observers.is_empty() {
        return Err(Error::Grid("need finite non-negative times and at least one observer".into()));
    }
    let mut values = vec![vec![0.0; times.len()]; observers.len()];
    let field = |values| WaveField {
        mode,
        r_grid: f.grid,
        times: times.to_vec(),
        observers: observers.to_vec(),
        values,
        cfl: 0.0,
        energy: Vec::new(),
    };
    if f.is_zero() {
        return Ok(field(values));
    }
    let interface = model.interface();

    for state in find_bound_states(model, mode)? {
        let c = state.pairing(&f.grid, &f.values);
        for (series, &r) in values.iter_mut().zip(observers) {
            let phi = state.profile(r);
            for (u, &t) in series.iter_mut().zip(times) {
                *u += (state.kappa * t).sinh() / state.kappa * c * phi;
            }
        }
    }
    if let Some(zero) = zero_eigenstate(model, mode)? {
        let c = f.pairing(&f.grid.sample(|r| zero.value(r)), interface);
        for (series, &r) in values.iter_mut().zip(observers) {
            let psi = zero.value(r);
            for (u, &t) in series.iter_mut().zip(times) {
                *u += t * c * psi;
            }
        }
    }

    // nodes touched by the cubic panels around the support of f
    let n = f.grid.n;
    let mut support: Vec<usize> = Vec::new();
    for k in 0..n {
        if (k.saturating_sub(3)..(k + 4).min(n)).any(|j| f.values[j] != 0.0) {
            support.push(k);
        }
    }
    let t_max = times.iter().fold(0.0f64, |m, t| m.max(*t));
    let (x, w) = gauss_legendre(opts.gl_order);
    let nodes: Vec<(f64, f64)> = panels(opts, t_max)
        .into_iter()
        .flat_map(|(a, b)| {
            let (c, h) = (0.5 * (a + b), 0.5 * (b - a));
            x.iter().zip(&w).map(move |(xi, wi)| (c + h * xi, h * wi)).collect::<Vec<_>>()
        })
        .collect();
    let density: Vec<Vec<f64>> = nodes
        .par_iter()
        .map(|&(lam, _)| spectral_density(model, mode, f, &support, observers, lam))
        .collect::<Result<_>>()?;

    // [0, lambda_min]: at a p-resonance S ~ A / (lambda^2 ((ln lambda + c)^2 + e))
    // carries a share ~ ln t / |ln lambda_min| of the signal and is
    // integrated in closed form; otherwise it is negligible and only bounded.
    let lm = opts.lambda_min;
    let presonant = mode.abs() == 1 && super::at_threshold(model, mode);
    let (tail, omitted) = if presonant {
        let probe: Vec<Vec<f64>> = [1.0, 10.0, 100.0, 1000.0]
            .iter()
            .map(|s| spectral_density(model, mode, f, &support, observers, s * lm))
            .collect::<Result<_>>()?;
        let mut tail = Vec::with_capacity(observers.len());
        let mut spread = 0.0f64;
        for i in 0..observers.len() {
            let pts: Vec<(f64, f64)> = (0..4).map(|j| (10f64.powi(j as i32) * lm, probe[j][i])).collect();
            let a = log_tail(&pts[0..3], lm)?;
            let b = log_tail(&pts[1..4], lm)?;
            spread = spread.max((a - b).abs());
            tail.push(a);
        }
        (tail, t_max * spread)
    } else {
        let first = density[0].iter().fold(0.0f64, |m, s| m.max(s.abs()));
        (vec![0.0; observers.len()], t_max * lm * lm * first)
    };

    let continuous: Vec<Vec<f64>> = times
        .par_iter()
        .map(|&t| {
            let mut acc = vec![0.0; observers.len()];
            for ((lam, wt), s) in nodes.iter().zip(&density) {
                let k = wt * (t * lam).sin();
                for (a, v) in acc.iter_mut().zip(s) {
                    *a += k * v;
                }
            }
            acc
        })
        .collect();
    for (j, acc) in continuous.iter().enumerate() {
        for (i, a) in acc.iter().enumerate() {
            values[i][j] += 2.0 / PI * (a + times[j] * tail[i]);
        }
    }
    let out = field(values);
    if omitted > 1e-6 * out.scale().max(1e-300) {
        return Err(Error::RefinementLimit { achieved: omitted / out.scale() });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn panels_cover_the_band() {
        let p = panels(&SpectralOptions::default(), 200.0);
        assert_eq!(p[0].0, 1e-8);
        assert!((p.last().unwrap().1 - 40.0).abs() < 1e-12);
        assert!(p.windows(2).all(|q| (q[0].1 - q[1].0).abs() < 1e-15));
        assert!(p.iter().all(|(a, b)| (b - a) * 200.0 <= 3.0 + 1e-9));
    }

    #[test]
    fn zero_data_gives_zero() {
        let model = RadialModel::round_well(1.0, 1.0).unwrap();
        let f = RadialSamples::from_fn(&model, 4.0, 0.05, |_| 0.0).unwrap();
        let field = evolve_spectral(&model, 0, &f, &[1.0, 2.0], &[1.5], &SpectralOptions::default()).unwrap();
        assert_eq!(field.scale(), 0.0);
    }
}
