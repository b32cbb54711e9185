#![allow(dead_code)]

use logdecay::wave::{FdOperator, RadialSamples, WaveField};

pub const J01: f64 = 2.404825557695773;

/// `sin^4` bump supported on `(lo, hi)`.
pub fn bump(lo: f64, hi: f64) -> impl Fn(f64) -> f64 + Copy {
    move |r| {
        if r <= lo || r >= hi {
            0.0
        } else {
            (std::f64::consts::PI * (r - lo) / (hi - lo)).sin().powi(4)
        }
    }
}

pub fn dense_evolution(op: &FdOperator, f: &[f64], times: &[f64], observers: &[f64]) -> Vec<Vec<f64>> {
    logdecay::verify::dense_evolution(op, f, times, observers).unwrap()
}

/// `max |a - b| / max |b|` over all observers and times.
pub fn relative_gap(a: &[Vec<f64>], b: &[Vec<f64>]) -> f64 {
    let scale = b.iter().flatten().fold(0.0f64, |m, v| m.max(v.abs()));
    let gap = a
        .iter()
        .flatten()
        .zip(b.iter().flatten())
        .fold(0.0f64, |m, (x, y)| m.max((x - y).abs()));
    gap / scale
}

/// Values of `field` at the sample times closest to `times`.
pub fn at_times(field: &WaveField, times: &[f64]) -> Vec<Vec<f64>> {
    let idx: Vec<usize> = times
        .iter()
        .map(|&t| {
            (0..field.times.len())
                .min_by(|&a, &b| (field.times[a] - t).abs().total_cmp(&(field.times[b] - t).abs()))
                .unwrap()
        })
        .collect();
    field.values.iter().map(|s| idx.iter().map(|&j| s[j]).collect()).collect()
}

pub fn samples(model: &logdecay::models::RadialModel, h: f64, f: impl Fn(f64) -> f64) -> RadialSamples {
    RadialSamples::from_fn(model, 8.0, h, f).unwrap()
}
