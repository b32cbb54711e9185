use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DecayLaw {
    /// `u ~ alpha t / log t`
    TOverLog,
    /// `sup |u| log(t)^M` decreasing across dyadic windows
    LogPower(u32),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DecayFit {
    pub law: DecayLaw,
    pub window: (f64, f64),
    /// Least-squares coefficient of `t / log t`.
    pub alpha: Option<f64>,
    /// Relative residual `|u - alpha g| / |u|` of the coefficient fit.
    pub residual: f64,
    /// `(lo, hi, sup |u| log(t)^M)` per dyadic window.
    pub windows: Vec<(f64, f64, f64)>,
    pub passes: bool,
}

/// Fits `series(times)` on `window` (default: the whole series). The series
/// itself must span at least 1.5 decades.
pub fn fit_decay(times: &[f64], series: &[f64], law: DecayLaw, window: Option<(f64, f64)>) -> Result<DecayFit> {
    if times.len() != series.len() {
        return Err(Error::InsufficientData("times and series differ in length".into()));
    }
    let positive: Vec<f64> = times.iter().copied().filter(|t| *t > 0.0).collect();
    let lo_all = positive.iter().copied().fold(f64::INFINITY, f64::min);
    let hi_all = positive.iter().copied().fold(0.0, f64::max);
    if positive.len() < 8 || !(hi_all / lo_all >= 10f64.powf(1.5) * (1.0 - 1e-9)) {
        return Err(Error::InsufficientData(format!(
            "series spans {:.2} decades, need 1.5",
            (hi_all / lo_all).log10()
        )));
    }
    let (lo, hi) = window.unwrap_or((lo_all, hi_all));
    let pts: Vec<(f64, f64)> = times
        .iter()
        .zip(series)
        .filter(|(t, _)| **t >= lo && **t <= hi && **t > 1.0)
        .map(|(t, u)| (*t, *u))
        .collect();
    if pts.len() < 4 {
        return Err(Error::InsufficientData(format!("fewer than 4 samples in [{lo}, {hi}]")));
    }
    match law {
        DecayLaw::TOverLog => {
            let (mut ug, mut gg, mut uu) = (0.0, 0.0, 0.0);
            for &(t, u) in &pts {
                let g = t / t.ln();
                ug += u * g;
                gg += g * g;
                uu += u * u;
            }
            let alpha = ug / gg;
            let res: f64 = pts.iter().map(|&(t, u)| (u - alpha * t / t.ln()).powi(2)).sum();
            Ok(DecayFit {
                law,
                window: (lo, hi),
                alpha: Some(alpha),
                residual: if uu > 0.0 { (res / uu).sqrt() } else { 0.0 },
                windows: Vec::new(),
                passes: alpha.is_finite(),
            })
        }
        DecayLaw::LogPower(m) => {
            let mut windows = Vec::new();
            let mut a = pts[0].0;
            while 2.0 * a <= hi * (1.0 + 1e-12) {
                let b = 2.0 * a;
                let sup = pts
                    .iter()
                    .filter(|(t, _)| *t >= a && *t <= b)
                    .map(|(t, u)| u.abs() * t.ln().powi(m as i32))
                    .fold(0.0, f64::max);
                windows.push((a, b, sup));
                a = b;
            }
            if windows.len() < 2 {
                return Err(Error::InsufficientData("window holds fewer than two dyadic sub-windows".into()));
            }
            let passes = windows.windows(2).all(|w| w[1].2 < w[0].2);
            Ok(DecayFit { law, window: (lo, hi), alpha: None, residual: 0.0, windows, passes })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid() -> Vec<f64> {
        (0..2000).map(|i| 2.0 * 1.003f64.powi(i)).collect()
    }

    #[test]
    fn t_over_log_roundtrip() {
        let t = grid();
        let u: Vec<f64> = t.iter().map(|t| 3.0 * t / t.ln()).collect();
        let fit = fit_decay(&t, &u, DecayLaw::TOverLog, None).unwrap();
        assert!((fit.alpha.unwrap() - 3.0).abs() < 1e-6);
        assert!(fit.residual < 1e-12);
    }

    #[test]
    fn log_power_trend() {
        let t = grid();
        let u: Vec<f64> = t.iter().map(|t| t.ln().powi(-2)).collect();
        assert!(fit_decay(&t, &u, DecayLaw::LogPower(1), None).unwrap().passes);
        assert!(!fit_decay(&t, &u, DecayLaw::LogPower(3), None).unwrap().passes);
    }

    #[test]
    fn short_series_is_rejected() {
        let t: Vec<f64> = (0..100).map(|i| 10.0 + i as f64).collect();
        let u = vec![1.0; 100];
        assert!(matches!(fit_decay(&t, &u, DecayLaw::TOverLog, None), Err(Error::InsufficientData(_))));
    }
}
