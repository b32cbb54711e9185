use std::f64::consts::PI;

use logdecay::lowfreq::{default_lambdas, fit_expansion, presonance_count, sample_lowfreq};
use logdecay::models::{round_well_presonance, RadialModel};
use logdecay::radial::RadialGrid;
use logdecay::Complex64;

const J01: f64 = 2.404825557695773;

fn bump(c: f64, w: f64) -> impl Fn(f64) -> f64 {
    move |r| {
        let x = (r - c) / w;
        if x.abs() < 1.0 {
            (1.0 - x * x).powi(4)
        } else {
            0.0
        }
    }
}

fn samples(model: RadialModel, mode: i32, f: &dyn Fn(f64) -> f64) -> Vec<(logdecay::specfun::BranchedComplex, Complex64)> {
    let grid = RadialGrid::aligned(&model, 4.0, 0.01).unwrap();
    let fs = grid.sample(f);
    let g = grid.sample(bump(1.0, 0.5));
    let lams = default_lambdas(1e-4, 1e-1, 10);
    let ys = sample_lowfreq(&model, mode, &grid, &fs, &g, &lams).unwrap();
    lams.into_iter().zip(ys).collect()
}

#[test]
fn resonant_well_has_one_presonance_per_mode() {
    let (model, _) = round_well_presonance(1.0, 1).unwrap();
    let f = bump(2.5, 0.5);
    let fits: Vec<_> = [1, -1].iter().map(|&m| fit_expansion(&samples(model, m, &f)).unwrap()).collect();
    for fit in &fits {
        assert_eq!(fit.m, 1, "{fit:?}");
        assert!((fit.arg_b() + PI / 2.0).abs() <= 0.1, "arg b = {}", fit.arg_b());
    }
    assert_eq!(presonance_count(&fits), 2);
}

#[test]
fn off_resonance_wells_have_no_singular_terms() {
    for frac in [0.5, 0.8] {
        let model = RadialModel::round_well(frac * J01, 1.0).unwrap();
        let fit = fit_expansion(&samples(model, 1, &bump(2.5, 0.5))).unwrap();
        assert_eq!(fit.m, 0, "a = {frac} j01: {fit:?}");
        assert!(fit.singular_ratio <= 1e-3);
    }
}

#[test]
fn free_mode_one_samples_stay_bounded() {
    let ys: Vec<f64> = samples(RadialModel::Free, 1, &bump(2.5, 0.5))
        .iter()
        .filter(|(l, _)| l.norm() <= 1e-2)
        .map(|(_, y)| y.norm())
        .collect();
    let (lo, hi) = ys.iter().fold((f64::INFINITY, 0.0f64), |(a, b), &y| (a.min(y), b.max(y)));
    assert!(hi / lo <= 2.0, "{lo} {hi}");
}

#[test]
fn resonance_scaling_and_projected_data() {
    let (model, states) = round_well_presonance(1.0, 1).unwrap();
    let u = states[0];
    let grid = RadialGrid::aligned(&model, 4.0, 0.01).unwrap();
    let f1 = grid.sample(bump(2.5, 0.5));
    let f2 = grid.sample(bump(1.5, 0.4));
    let uu = grid.sample(|r| u.value(r));
    let pair = |f: &[f64]| {
        let v: Vec<Complex64> = f.iter().zip(&uu).map(|(a, b)| Complex64::new(a * b, 0.0)).collect();
        grid.integrate_weighted(&v, Some(1.0)).re
    };
    let c = pair(&f1) / pair(&f2);
    let perp: Vec<f64> = f1.iter().zip(&f2).map(|(a, b)| a - c * b).collect();
    assert!(pair(&perp).abs() < 1e-12 * pair(&f1).abs());
    let g = grid.sample(bump(1.0, 0.5));
    let lams: Vec<_> = [1e-4, 3e-4, 1e-3]
        .iter()
        .map(|&s| logdecay::specfun::BranchedComplex::from_polar(s, PI / 2.0).unwrap())
        .collect();
    let generic = sample_lowfreq(&model, 1, &grid, &f1, &g, &lams).unwrap();
    let scaled: Vec<f64> = generic
        .iter()
        .zip(&lams)
        .map(|(y, l)| y.norm() * l.norm().powi(2) * l.norm().ln().abs())
        .collect();
    assert!((scaled[0] / scaled[2] - 1.0).abs() < 0.1, "{scaled:?}");
    let projected = sample_lowfreq(&model, 1, &grid, &perp, &g, &lams).unwrap();
    let weighted: Vec<f64> = projected.iter().zip(&lams).map(|(y, l)| y.norm() * l.norm().powi(2)).collect();
    assert!(weighted[0] < weighted[2] && weighted[0] < 1e-6, "{weighted:?}");
}
