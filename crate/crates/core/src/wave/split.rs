//! `u = u_d + u_z + u_r` at an observer.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::fit::{fit_decay, DecayLaw};
use super::{at_threshold, RadialSamples, WaveField};
use crate::contour::{jm_profile, ContourSpec};
use crate::error::{Error, Result};
use crate::lowfreq::{default_lambdas, fit_expansion, sample_pointwise, ExpansionFit, DEFAULT_LAMBDA_MAX};
use crate::models::RadialModel;
use crate::quad;
use crate::radial::BoundState;
use crate::specfun::bessel_j_real;

/// Normalized zero-energy eigenfunction (modes `|m| >= 2`, where the
/// threshold state `~ r^{-|m|}` is square integrable).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ZeroEigenstate {
    pub model: RadialModel,
    pub mode: i32,
    /// Multiplies both the inner profile and `c r^{-|m|}` outside.
    pub scale: f64,
    pub outer_coeff: f64,
}

impl ZeroEigenstate {
    pub fn value(&self, r: f64) -> f64 {
        let m = self.mode.unsigned_abs();
        let mf = m as f64;
        let raw = match self.model {
            RadialModel::RoundWell { a, radius } if r < radius => bessel_j_real(m, a * r),
            RadialModel::DeltaRing { radius, .. } if r < radius => r.powf(mf),
            RadialModel::RobinDisc { rho, .. } if r < rho => 0.0,
            _ => self.outer_coeff * r.powf(-mf),
        };
        self.scale * raw
    }
}

/// The zero-energy eigenstate of `mode`, if the model has one.
pub fn zero_eigenstate(model: &RadialModel, mode: i32) -> Result<Option<ZeroEigenstate>> {
    let m = mode.unsigned_abs();
    if m < 2 || !at_threshold(model, mode) {
        return Ok(None);
    }
    let mf = m as f64;
    let (interface, inner_sq, outer_coeff) = match *model {
        RadialModel::RoundWell { a, radius } => {
            let inner = quad::integrate_real(|r| bessel_j_real(m, a * r).powi(2) * r, &[0.0, radius], 1e-300, 1e-13)?;
            (radius, inner, bessel_j_real(m, a * radius) * radius.powf(mf))
        }
        RadialModel::DeltaRing { radius, .. } => (radius, radius.powf(2.0 * mf + 2.0) / (2.0 * mf + 2.0), radius.powf(2.0 * mf)),
        RadialModel::RobinDisc { rho, .. } => (rho, 0.0, 1.0),
        RadialModel::Free => unreachable!(),
    };
    let outer_sq = outer_coeff * outer_coeff * interface.powf(2.0 - 2.0 * mf) / (2.0 * mf - 2.0);
    Ok(Some(ZeroEigenstate {
        model: *model,
        mode,
        scale: 1.0 / (inner_sq + outer_sq).sqrt(),
        outer_coeff,
    }))
}

/// Low-frequency expansion of `(R(lambda) f)(r)` at one observer.
pub fn pointwise_fit(model: &RadialModel, mode: i32, f: &RadialSamples, r: f64) -> Result<ExpansionFit> {
    let lambdas = default_lambdas(1e-4, DEFAULT_LAMBDA_MAX, 10);
    let y = sample_pointwise(model, mode, &f.grid, &f.values, r, &lambdas)?;
    fit_expansion(&lambdas.into_iter().zip(y).collect::<Vec<_>>())
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundAmplitude {
    pub energy: f64,
    /// `<f, phi>`
    pub pairing: f64,
    /// `phi(r_obs)`
    pub profile: f64,
}

#[derive(Clone, Debug, Default)]
pub struct SplitInputs {
    pub bound: Vec<BoundState>,
    /// Pointwise low-frequency fit at the observer; required when the mode
    /// carries a p-resonance.
    pub fit: Option<ExpansionFit>,
    pub zero: Option<ZeroEigenstate>,
    /// Multiplies the `t Pi_0 f` term.
    pub zero_calibration: Option<f64>,
    /// Contour constants used for `J(t)`; `t` and `eta` are overridden.
    pub contour: Option<ContourSpec>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DecaySplit {
    pub observer: f64,
    pub times: Vec<f64>,
    pub u: Vec<f64>,
    pub u_d: Vec<f64>,
    pub u_z: Vec<f64>,
    pub u_r: Vec<f64>,
    pub u_d_amp: Vec<BoundAmplitude>,
    /// `<f, psi> psi(r_obs)` of the zero eigenvalue.
    pub zero_eigen_amp: f64,
    /// Coefficient of `J(t)`: `c_p` of the pointwise fit.
    pub u_z_amp: f64,
    pub b: Option<Complex64>,
    pub zero_calibration: f64,
    /// Coefficient of `t / log t` fitted to `u - u_d - t Pi_0 f` for `t >= 2`.
    pub fit_alpha: Option<f64>,
}

const JM_START: f64 = 10.0;

/// `J(t)` on `times`, zero below `JM_START` where the path integral is
/// badly conditioned. Long series use a table in `log t` with linear
/// interpolation of `J log(t) / t`.
fn jm_on(times: &[f64], b: Complex64, base: &ContourSpec) -> Result<Vec<f64>> {
    let eval = |t: f64| -> Result<f64> {
        let eta = base.eta.min(0.5 * t.ln() / base.a);
        Ok(jm_profile(&ContourSpec { t, eta, ..*base }, b)?.normalized)
    };
    let valid: Vec<f64> = times.iter().copied().filter(|t| *t >= JM_START).collect();
    if valid.is_empty() {
        return Ok(vec![0.0; times.len()]);
    }
    let (lo, hi) = valid.iter().fold((f64::INFINITY, 0.0f64), |(a, b), t| (a.min(*t), b.max(*t)));
    let table_size = 256;
    let normalized: Box<dyn Fn(f64) -> f64 + Sync> = if valid.len() <= table_size || hi / lo < 1.0 + 1e-9 {
        let vals: Vec<f64> = valid.par_iter().map(|&t| eval(t)).collect::<Result<_>>()?;
        let pairs: Vec<(f64, f64)> = valid.into_iter().zip(vals).collect();
        Box::new(move |t| pairs.iter().find(|(s, _)| *s == t).map_or(f64::NAN, |p| p.1))
    } else {
        let (ll, lh) = (lo.ln(), hi.ln());
        let nodes: Vec<f64> = (0..table_size).map(|i| ll + (lh - ll) * i as f64 / (table_size - 1) as f64).collect();
        let vals: Vec<f64> = nodes.par_iter().map(|&s| eval(s.exp())).collect::<Result<_>>()?;
        Box::new(move |t| {
            let x = (t.ln() - ll) / (lh - ll) * (table_size - 1) as f64;
            let i = (x.floor() as usize).min(table_size - 2);
            let w = x - i as f64;
            vals[i] * (1.0 - w) + vals[i + 1] * w
        })
    };
    Ok(times
        .iter()
        .map(|&t| if t >= JM_START { normalized(t) * t / t.ln() } else { 0.0 })
        .collect())
}

/// Subtracts the bound-state growth and the threshold terms from the series
/// at `field.observers[observer]`.
pub fn decompose(
    field: &WaveField,
    observer: usize,
    model: &RadialModel,
    f: &RadialSamples,
    inputs: &SplitInputs,
) -> Result<DecaySplit> {
    let r = *field
        .observers
        .get(observer)
        .ok_or_else(|| Error::IncompleteSplit(format!("no observer with index {observer}")))?;
    let times = field.times.clone();
    let u = field.values[observer].clone();
    let interface = model.interface();

    let mut u_d = vec![0.0; times.len()];
    let mut amps = Vec::new();
    for state in &inputs.bound {
        let c = state.pairing(&f.grid, &f.values);
        let phi = state.profile(r);
        for (v, &t) in u_d.iter_mut().zip(&times) {
            *v += (state.kappa * t).sinh() / state.kappa * c * phi;
        }
        amps.push(BoundAmplitude { energy: state.energy, pairing: c, profile: phi });
    }

    let calibration = inputs.zero_calibration.unwrap_or(1.0);
    let zero_amp = match &inputs.zero {
        Some(z) => f.pairing(&f.grid.sample(|s| z.value(s)), interface) * z.value(r),
        None => 0.0,
    };
    let mut u_z: Vec<f64> = times.iter().map(|t| calibration * zero_amp * t).collect();

    let mode = field.mode;
    let presonant = mode.abs() == 1 && at_threshold(model, mode);
    let mut amp = 0.0;
    let mut b_used = None;
    match &inputs.fit {
        Some(fit) if fit.m == 1 => {
            amp = fit.c_p().re;
            let b = Complex64::new(0.0, -fit.b.norm());
            let base = inputs.contour.unwrap_or(ContourSpec { a: 4.0, c: 1.0, c_prime: 1.0, t: JM_START, eta: 0.05, apex_cap: 1.0 });
            let base = ContourSpec { eta: base.eta.min(0.25 / b.norm()), ..base };
            let jm = jm_on(&times, b, &base)?;
            for (v, j) in u_z.iter_mut().zip(jm) {
                *v += amp * j;
            }
            b_used = Some(b);
        }
        _ if presonant => {
            return Err(Error::IncompleteSplit(format!(
                "mode {mode} has a p-resonance but no expansion fit with a reciprocal-log term was supplied"
            )))
        }
        _ => {}
    }

    let u_r: Vec<f64> = (0..times.len()).map(|j| u[j] - u_d[j] - u_z[j]).collect();
    let growth: Vec<f64> = (0..times.len()).map(|j| u[j] - u_d[j] - calibration * zero_amp * times[j]).collect();
    let fit_alpha = fit_decay(&times, &growth, DecayLaw::TOverLog, None).ok().and_then(|d| d.alpha);
    Ok(DecaySplit {
        observer: r,
        times,
        u,
        u_d,
        u_z,
        u_r,
        u_d_amp: amps,
        zero_eigen_amp: zero_amp,
        u_z_amp: amp,
        b: b_used,
        zero_calibration: calibration,
        fit_alpha,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::specfun::{bessel_zero, BesselZeroIndex};

    #[test]
    fn zero_eigenstates_are_normalized_and_continuous() {
        let j11 = bessel_zero(BesselZeroIndex::new(1, 1).unwrap());
        let models = [
            (RadialModel::round_well(j11, 1.0).unwrap(), 2),
            (RadialModel::delta_ring(-4.0, 1.0).unwrap(), 2),
            (RadialModel::robin_disc(1.0, 3.0).unwrap(), 3),
        ];
        for (model, mode) in models {
            let z = zero_eigenstate(&model, mode).unwrap().expect("threshold eigenstate");
            let ri = model.interface().unwrap();
            assert!((z.value(ri - 1e-9) - z.value(ri + 1e-9)).abs() < 1e-7 || matches!(model, RadialModel::RobinDisc { .. }));
            let n = quad::integrate_real(|r| z.value(r).powi(2) * r, &[0.0, ri, 10.0 * ri, 1e4], 1e-300, 1e-12).unwrap();
            let tail = z.value(1e4).powi(2) * 1e8 / (2.0 * mode as f64 - 2.0);
            assert!((n + tail - 1.0).abs() < 1e-8, "{model:?}: {n}");
        }
        assert!(zero_eigenstate(&RadialModel::round_well(j11, 1.0).unwrap(), 1).unwrap().is_none());
        assert!(zero_eigenstate(&RadialModel::round_well(3.0, 1.0).unwrap(), 2).unwrap().is_none());
    }
}
