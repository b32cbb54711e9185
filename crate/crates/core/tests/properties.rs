mod common;

use common::J01;
use logdecay::config::{model_from_config, model_to_config, parse_complex, parse_t_grid, KvConfig, SeriesTable};
use logdecay::contour::{remainder_window, RemainderBudget};
use logdecay::models::{
    delta_ring_presonance, robin_disc_presonance, round_well_presonance, zero_energy_mismatch, RadialModel,
};
use logdecay::radial::{solve_mode, ModeProblem};
use logdecay::specfun::{bessel_j, bessel_j_real, hankel1, BranchedComplex};
use logdecay::wave::{evolve_fd, FdOptions, RadialSamples};
use logdecay::Complex64;
use proptest::prelude::*;

fn model_strategy() -> impl Strategy<Value = RadialModel> {
    prop_oneof![
        Just(Ok(RadialModel::Free)),
        (0.1..5.0f64, 0.2..4.0f64).prop_map(|(a, r)| RadialModel::round_well(a, r)),
        (-5.0..5.0f64, 0.2..4.0f64).prop_map(|(a, r)| RadialModel::delta_ring(a, r)),
        (0.2..4.0f64, -3.0..3.0f64).prop_map(|(rho, sigma)| RadialModel::robin_disc(rho, sigma)),
    ]
    .prop_filter_map("valid model", |m| m.ok())
}

proptest! {
    #[test]
    fn bessel_derivative_recurrence(z in 0.3..30.0f64) {
        let h = 1e-5 * z.max(1.0);
        let fd = (bessel_j_real(1, z + h) - bessel_j_real(1, z - h)) / (2.0 * h);
        let exact = bessel_j_real(0, z) - bessel_j_real(1, z) / z;
        prop_assert!((fd - exact).abs() <= 1e-8 * (1.0 + exact.abs()), "{fd} vs {exact}");
    }

    #[test]
    fn bessel_j_is_real_on_the_real_axis(order in 0u32..5, x in 0.01..50.0f64) {
        let v = bessel_j(order, BranchedComplex::real(x));
        prop_assert!(v.im.abs() <= 1e-14 * (1.0 + v.re.abs()));
        prop_assert!((v.re - bessel_j_real(order, x)).abs() <= 1e-12 * (1.0 + v.re.abs()));
    }

    #[test]
    fn hankel_conjugate_symmetry(order in 0u32..4, modulus in 0.05..20.0f64, arg in 0.05..1.5f64) {
        let z = BranchedComplex::from_polar(modulus, arg).unwrap();
        let zbar = BranchedComplex::from_polar(modulus, std::f64::consts::PI - arg).unwrap();
        let h = hankel1(order, z).unwrap();
        let j = bessel_j(order, z);
        // reflection across the imaginary axis: J(-conj z) = (-1)^n conj J(z)
        let sign = if order % 2 == 0 { 1.0 } else { -1.0 };
        let j_reflected = bessel_j(order, zbar);
        prop_assert!((j_reflected - sign * j.conj()).norm() <= 1e-10 * (1.0 + j.norm()));
        let h_reflected = hankel1(order, zbar).unwrap();
        // H(-conj z) = -(-1)^n conj(H(z)) on the principal sheet
        prop_assert!((h_reflected + sign * h.conj()).norm() <= 1e-9 * (1.0 + h.norm()), "{h} {h_reflected}");
    }

    #[test]
    fn round_well_resonance_holds_for_every_radius(radius in 0.1..10.0f64, n in 1u32..4) {
        let (model, states) = round_well_presonance(radius, n).unwrap();
        let RadialModel::RoundWell { a, .. } = model else { unreachable!() };
        prop_assert!(bessel_j_real(0, a * radius).abs() <= 1e-12);
        for st in &states {
            let (c, d) = st.interface_residuals().unwrap();
            prop_assert!(c <= 1e-10 && d <= 1e-10);
        }
        prop_assert!(zero_energy_mismatch(&model, 1).abs() <= 1e-10);
    }

    #[test]
    fn ring_and_robin_parameters(radius in 0.1..10.0f64) {
        let (ring, _) = delta_ring_presonance(radius).unwrap();
        prop_assert_eq!(ring, RadialModel::DeltaRing { a: -2.0 / radius, radius });
        let (disc, states) = robin_disc_presonance(radius).unwrap();
        prop_assert_eq!(disc, RadialModel::RobinDisc { rho: radius, sigma: 1.0 / radius });
        for st in &states {
            prop_assert!(st.robin_residual(1.0 / radius).unwrap().abs() <= 1e-12);
        }
    }

    #[test]
    fn detuned_wells_are_not_resonant(radius in 0.2..5.0f64, scale in 0.3..0.9f64) {
        let model = RadialModel::round_well(scale * J01 / radius, radius).unwrap();
        prop_assert!(zero_energy_mismatch(&model, 1).abs() >= 1e-3);
    }

    #[test]
    fn remainder_window_is_decreasing(
        s in 0.0..3.0f64,
        p in 0.0..2.0f64,
        frac in 0.0..1.0f64,
        t0 in 3.0..1e3f64,
        ratio in 1.01..1e3f64,
    ) {
        let budget = RemainderBudget::new(s, p, frac * (s + p)).unwrap();
        let w = remainder_window(&budget, &[t0, t0 * ratio]);
        prop_assert!(w[1] <= w[0]);
        prop_assert!(w.iter().all(|v| *v > 0.0 && *v <= 1.0 / t0.ln().powf(budget.exponent()) * (1.0 + 1e-12)));
    }

    #[test]
    fn model_config_roundtrip(model in model_strategy()) {
        let text = model_to_config(&model).render();
        let back = model_from_config(&KvConfig::parse(&text).unwrap()).unwrap();
        prop_assert_eq!(back, model);
    }

    #[test]
    fn complex_literals_roundtrip(re in -1e6..1e6f64, im in -1e6..1e6f64) {
        let text = format!("{re:?}{im:+?}i");
        prop_assert_eq!(parse_complex(&text).unwrap(), Complex64::new(re, im));
    }

    #[test]
    fn log_time_grids(lo in -5.0..10.0f64, span in 0.1..10.0f64, n in 2usize..200) {
        let text = format!("e{lo}:e{}:{n}", lo + span);
        let grid = parse_t_grid(&text).unwrap();
        prop_assert_eq!(grid.len(), n);
        prop_assert!(grid.windows(2).all(|w| w[1] > w[0]));
        prop_assert!((grid[0].ln() - lo).abs() <= 1e-12 * (1.0 + lo.abs()));
        prop_assert!((grid[n - 1].ln() - lo - span).abs() <= 1e-12 * (1.0 + (lo + span).abs()));
        let ratios: Vec<f64> = grid.windows(2).map(|w| (w[1] / w[0]).ln()).collect();
        prop_assert!(ratios.iter().all(|r| (r - ratios[0]).abs() <= 1e-9));
    }

    #[test]
    fn series_tables_roundtrip_bytes(rows in prop::collection::vec(prop::collection::vec(any::<f64>().prop_filter("finite", |v| v.is_finite()), 3), 0..20)) {
        let mut table = SeriesTable::new(&["t", "u", "v"]);
        table.meta("seed", 9);
        table.rows = rows.clone();
        let text = table.render().unwrap();
        let back = SeriesTable::parse(&text).unwrap();
        prop_assert_eq!(&back.rows, &rows);
        prop_assert_eq!(back.render().unwrap(), text);
    }

    #[test]
    fn kv_config_roundtrip(entries in prop::collection::btree_map("[a-z][a-z0-9_-]{0,8}", "[A-Za-z0-9.:+-]{1,12}", 0..8)) {
        let mut cfg = KvConfig::default();
        for (k, v) in &entries {
            cfg.set(k, v.clone());
        }
        let back = KvConfig::parse(&cfg.render()).unwrap();
        for (k, v) in &entries {
            prop_assert_eq!(back.get(k), Some(v.as_str()));
        }
        prop_assert_eq!(back.render(), cfg.render());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn greens_kernel_is_symmetric(
        model in model_strategy(),
        mode in -2i32..3,
        modulus in 0.1..3.0f64,
        arg in 0.1..3.0f64,
        r1 in 0.0..1.0f64,
        r2 in 0.0..1.0f64,
    ) {
        let lambda = BranchedComplex::from_polar(modulus, arg).unwrap();
        let inner = model.inner_radius();
        let (r1, r2) = (inner + 0.05 + 6.0 * r1, inner + 0.05 + 6.0 * r2);
        let kernel = match solve_mode(&ModeProblem::new(model, mode, lambda).unwrap()) {
            Ok(k) => k,
            // an eigenvalue at lambda^2 is a legitimate refusal
            Err(_) => return Ok(()),
        };
        let (a, b) = (kernel.kernel(r1, r2).unwrap(), kernel.kernel(r2, r1).unwrap());
        prop_assert!((a - b).norm() <= 1e-9 * a.norm().max(1e-300), "{a} vs {b}");
    }

    #[test]
    fn leapfrog_is_linear(scale in -3.0..3.0f64, lo in 1.2..3.0f64, mode in 0i32..3) {
        let model = RadialModel::round_well(0.5 * J01, 1.0).unwrap();
        let f = |c: f64| RadialSamples::from_fn(&model, 10.0, 0.1, move |r| c * common::bump(lo, lo + 1.0)(r)).unwrap();
        let opts = FdOptions::default();
        let one = evolve_fd(&model, mode, &f(1.0), 10.0, &[2.0], &opts).unwrap();
        let scaled = evolve_fd(&model, mode, &f(scale), 10.0, &[2.0], &opts).unwrap();
        for (x, y) in one.series(0).iter().zip(scaled.series(0)) {
            prop_assert!((scale * x - y).abs() <= 1e-12 * (1.0 + y.abs()));
        }
    }
}

#[test]
fn first_ten_zeros_of_j0() {
    use logdecay::specfun::{bessel_zero, BesselZeroIndex};
    let mut prev = 0.0;
    for n in 1..=10 {
        let z = bessel_zero(BesselZeroIndex::new(0, n).unwrap());
        assert!(bessel_j_real(0, z).abs() <= 1e-12, "n={n}");
        assert!(z - prev > if n == 1 { 2.0 } else { 3.0 });
        prev = z;
    }
}
