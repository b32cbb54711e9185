mod common;

use common::{bump, dense_evolution, relative_gap, J01};
use logdecay::models::RadialModel;
use logdecay::radial::{find_bound_states, RadialGrid};
use logdecay::wave::{
    decompose, evolve_fd, evolve_spectral, pointwise_fit, FdOperator, FdOptions, RadialSamples, SpectralOptions,
    SplitInputs,
};

fn operator(model: &RadialModel, mode: i32, grid: RadialGrid) -> FdOperator {
    if logdecay::wave::at_threshold(model, mode) {
        FdOperator::at_threshold(model, mode, grid).unwrap().0
    } else {
        FdOperator::new(model, mode, grid).unwrap()
    }
}

#[test]
fn leapfrog_matches_dense_diagonalization() {
    let cases = [
        (RadialModel::Free, 0),
        (RadialModel::Free, 1),
        (RadialModel::round_well(J01, 1.0).unwrap(), 1),
        (RadialModel::round_well(0.5 * J01, 1.0).unwrap(), 1),
        (RadialModel::round_well(J01, 1.0).unwrap(), 0),
        (RadialModel::delta_ring(-2.0, 1.0).unwrap(), 1),
    ];
    let h = 0.05;
    let observers = [2.0, 4.0];
    for (model, mode) in cases {
        let f = RadialSamples::from_fn(&model, 8.0, h, bump(1.5, 3.5)).unwrap();
        let opts = FdOptions { sample_dt: 1.0, ..FdOptions::default() };
        let fd = evolve_fd(&model, mode, &f, 50.0, &observers, &opts).unwrap();
        let op = operator(&model, mode, RadialGrid::aligned(&model, 40.0, h).unwrap());
        let mut fv = vec![0.0; op.grid.n];
        fv[..f.values.len()].copy_from_slice(&f.values);
        let dense = dense_evolution(&op, &fv, &fd.times, &observers);
        let gap = relative_gap(&fd.values, &dense);
        assert!(gap <= 1e-4, "{} m={mode}: {gap:.2e}", model.name());
    }
}

#[test]
fn spectral_and_leapfrog_agree() {
    let cases = [(RadialModel::Free, 0), (RadialModel::delta_ring(-2.0, 1.0).unwrap(), 1)];
    let h = 0.02;
    for (model, mode) in cases {
        let f = RadialSamples::from_fn(&model, 8.0, h, bump(1.5, 3.5)).unwrap();
        let opts = FdOptions { sample_dt: 0.5, ..FdOptions::default() };
        let fd = evolve_fd(&model, mode, &f, 50.0, &[2.0, 5.0], &opts).unwrap();
        let sp = evolve_spectral(&model, mode, &f, &fd.times, &fd.observers, &SpectralOptions::default()).unwrap();
        let gap = relative_gap(&fd.values, &sp.values);
        assert!(gap <= 1e-3, "{} m={mode}: {gap:.2e}", model.name());
    }
}

#[test]
fn free_wave_leaves_the_observer() {
    let model = RadialModel::Free;
    let f = RadialSamples::from_fn(&model, 8.0, 0.05, bump(2.0, 3.0)).unwrap();
    let fd = evolve_fd(&model, 1, &f, 60.0, &[2.5], &FdOptions::default()).unwrap();
    let peak = fd.scale();
    let late = fd.times.iter().zip(fd.series(0)).filter(|(t, _)| **t >= 40.0).fold(0.0f64, |m, (_, u)| m.max(u.abs()));
    assert!(late <= 1e-3 * peak, "{late} vs {peak}");
}

#[test]
fn bound_state_growth_follows_the_sinh_law() {
    let model = RadialModel::round_well(J01, 1.0).unwrap();
    let f = RadialSamples::from_fn(&model, 8.0, 0.02, bump(0.2, 1.8)).unwrap();
    let states = find_bound_states(&model, 0).unwrap();
    assert_eq!(states.len(), 1);
    let fd = evolve_fd(&model, 0, &f, 40.0, &[0.5, 2.0], &FdOptions::default()).unwrap();
    let split = |i| decompose(&fd, i, &model, &f, &SplitInputs { bound: states.clone(), ..SplitInputs::default() }).unwrap();
    for i in 0..2 {
        let s = split(i);
        for (j, &t) in s.times.iter().enumerate() {
            if t >= 10.0 {
                let rel = (s.u[j] - s.u_d[j]).abs() / s.u_d[j].abs();
                assert!(rel <= 1e-2, "r={} t={t}: {rel:.2e}", s.observer);
            }
            if t >= 20.0 {
                assert!(s.u_r[j].abs() <= 1e-2 * s.u_d[j].abs());
            }
        }
    }
}

#[test]
fn free_split_is_all_remainder() {
    let model = RadialModel::Free;
    let f = RadialSamples::from_fn(&model, 8.0, 0.05, bump(1.5, 3.5)).unwrap();
    let fd = evolve_fd(&model, 1, &f, 20.0, &[2.0], &FdOptions::default()).unwrap();
    let s = decompose(&fd, 0, &model, &f, &SplitInputs::default()).unwrap();
    assert!(s.u_d.iter().chain(&s.u_z).all(|v| *v == 0.0));
    assert_eq!(s.u_r, s.u);
}

#[test]
fn resonant_split_needs_a_fit() {
    let model = RadialModel::round_well(J01, 1.0).unwrap();
    let f = RadialSamples::from_fn(&model, 8.0, 0.05, bump(1.5, 3.5)).unwrap();
    let fd = evolve_fd(&model, 1, &f, 5.0, &[2.0], &FdOptions::default()).unwrap();
    let err = decompose(&fd, 0, &model, &f, &SplitInputs::default()).unwrap_err();
    assert!(matches!(err, logdecay::Error::IncompleteSplit(_)));
    assert!(pointwise_fit(&model, 1, &f, 2.0).unwrap().m == 1);
}

#[test]
fn threshold_tuning_is_a_small_correction() {
    let model = RadialModel::round_well(J01, 1.0).unwrap();
    let mut prev = f64::INFINITY;
    for h in [0.1, 0.05, 0.025] {
        let grid = RadialGrid::aligned(&model, 10.0, h).unwrap();
        let (op, scale) = FdOperator::at_threshold(&model, 1, grid).unwrap();
        assert!(op.zero_energy_mismatch().unwrap().abs() <= 1e-12);
        let dev = (scale - 1.0).abs();
        assert!(dev < 0.5 * prev, "h={h}: {dev}");
        prev = dev;
    }
}
