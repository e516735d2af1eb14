//! Plant discretization, gain design, calibration and config handling.

mod common;

use gridstorm::model::{
    build_continuous, design_kalman_gain, discretize_zoh, load_grid_config, AgcParams, DiscreteLoop, GainSpec,
    GridConfig, ModelError, DEFAULT_MEASUREMENT_NOISE, DEFAULT_PROCESS_NOISE,
};
use gridstorm::numerics::{rng_stream, spectral_radius, Matrix};
use gridstorm::sim::{simulate, NoiseMode};
use proptest::prelude::*;

/// Forward-Euler integration of `ẋ = A x + B u` over `ts` with `steps` substeps.
fn euler(a: &Matrix, b: &Matrix, x0: &[f64], u: f64, ts: f64, steps: usize) -> Vec<f64> {
    let dt = ts / steps as f64;
    let mut x = x0.to_vec();
    for _ in 0..steps {
        let ax = a.mul_vec(&x);
        for i in 0..x.len() {
            x[i] += dt * (ax[i] + b[(i, 0)] * u);
        }
    }
    x
}

fn zoh_matches_euler(params: &AgcParams, ts: f64) -> f64 {
    let css = build_continuous(params).unwrap();
    let d = discretize_zoh(&css, ts).unwrap();
    let n = 4;
    let mut worst = 0.0f64;
    for j in 0..n {
        let mut e = vec![0.0; n];
        e[j] = 1.0;
        let x = euler(&css.a_c, &css.b_c, &e, 0.0, ts, 200_000);
        for i in 0..n {
            worst = worst.max((x[i] - d.a[(i, j)]).abs());
        }
    }
    let x = euler(&css.a_c, &css.b_c, &[0.0; 4], 1.0, ts, 200_000);
    for i in 0..n {
        worst = worst.max((x[i] - d.b[(i, 0)]).abs());
    }
    worst
}

#[test]
fn zoh_agrees_with_fine_euler() {
    for h in [5.0, 6.0] {
        let p = AgcParams::new(0.05, h, 0.5, 0.2, 7.0);
        let err = zoh_matches_euler(&p, 0.01);
        assert!(err <= 1e-6, "H = {h}: {err:e}");
    }
}

#[test]
fn designed_estimators_are_stable() {
    for g in common::grid3().generators.iter().chain(&common::toy1().generators) {
        let a_lc = g.plant.a.sub(&g.plant.l.mul(&g.plant.c));
        let rho = spectral_radius(&a_lc).unwrap();
        assert!(rho < 1.0, "{}: {rho}", g.name);
        assert!((rho - g.plant.estimator_radius()).abs() < 1e-12);
    }
}

#[test]
fn nominal_noise_free_residue_is_zero() {
    for grid in [common::grid3(), common::toy1()] {
        let mut rng = rng_stream(0, 0);
        let trace = simulate(grid, None, 1000, &grid.initial_state, NoiseMode::Off, &mut rng);
        assert_eq!(trace.records.len(), 1001);
        for rec in &trace.records {
            for g in &rec.gens {
                assert_eq!(g.r, [0.0, 0.0]);
                assert_eq!(g.f_hz, 60.0);
            }
        }
    }
}

#[test]
fn scalar_kalman_gain_matches_closed_form() {
    // Scalar filter DARE with c = 1: p is the positive root of p² + (r − a²r − q)p − qr = 0
    // and the predictor gain is l = a p / (p + r).
    let (a, q, r) = (0.9f64, 1.0f64, 1.0f64);
    let s = |v: f64| Matrix::from_rows(&[&[v]]);
    let qb = r - a * a * r - q;
    let p = (-qb + (qb * qb + 4.0 * q * r).sqrt()) / 2.0;
    let l = design_kalman_gain(&s(a), &s(1.0), &s(q), &s(r)).unwrap()[(0, 0)];
    assert!((l - a * p / (p + r)).abs() < 1e-9);
}

#[test]
fn lqr_gains_stabilize_plant() {
    let p = AgcParams::new(0.05, 5.0, 0.5, 0.2, 7.0);
    let q_n = Matrix::identity(4).scale(DEFAULT_PROCESS_NOISE);
    let r_n = Matrix::identity(2).scale(DEFAULT_MEASUREMENT_NOISE);
    let spec = GainSpec {
        k: None,
        l: None,
        lqr: Some((Matrix::identity(4), Matrix::identity(1))),
    };
    let dl = DiscreteLoop::design(&p, 0.01, q_n, r_n, &spec).unwrap();
    assert!(dl.has_feedback());
    // The stored gain enters as u = k x̂, so A + B k is the closed loop.
    let closed = dl.a.add(&dl.b.mul(&dl.k));
    assert!(spectral_radius(&closed).unwrap() < spectral_radius(&dl.a).unwrap().max(1.0));
}

#[test]
fn calibration_is_seeded_and_margined() {
    let doc = std::fs::read_to_string(common::config_path("toy1.json")).unwrap();
    let a = load_grid_config(&doc).unwrap();
    let b = load_grid_config(&doc).unwrap();
    assert_eq!(a.thresholds, b.thresholds);
    let mut cfg: serde_json::Value = serde_json::from_str(&doc).unwrap();
    cfg["calibration"]["seed"] = 7.into();
    let c = load_grid_config(&cfg.to_string()).unwrap();
    assert_ne!(a.thresholds, c.thresholds);
    // Threshold = 1.1 × the largest noisy nominal residue.
    let mut rng = rng_stream(0, gridstorm::model::CALIBRATION_STREAM);
    let trace = simulate(&a, None, 10_000, &a.initial_state, NoiseMode::On, &mut rng);
    let peak = trace.records.iter().map(|r| r.gens[0].r_inf).fold(0.0, f64::max);
    assert!((a.thresholds[0] - 1.1 * peak).abs() <= 1e-15 * peak);
}

#[test]
fn config_rejects_unknown_fields_and_droop_mismatch() {
    let doc = std::fs::read_to_string(common::config_path("toy1.json")).unwrap();
    let mut v: serde_json::Value = serde_json::from_str(&doc).unwrap();
    v["bogus"] = 1.into();
    assert!(GridConfig::parse(&v.to_string()).is_err());
    let mut v: serde_json::Value = serde_json::from_str(&doc).unwrap();
    v["generators"][0]["params"]["D"] = 10.0.into();
    assert!(matches!(
        load_grid_config(&v.to_string()),
        Err(ModelError::Generator { .. }) | Err(ModelError::DroopMismatch { .. })
    ));
}

#[test]
fn per_unit_frequency_conversion() {
    let g = common::grid3();
    assert_eq!(g.frequency_hz(0, 0.0), 60.0);
    assert!((g.frequency_hz(0, 0.01) - 60.6).abs() < 1e-12);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn designed_estimator_stable_over_parameter_box(
        r in 0.03f64..0.1,
        h in 3.0f64..8.0,
        t_tr in 0.2f64..0.8,
        t_g in 0.1f64..0.4,
        k_ref in 1.0f64..10.0,
    ) {
        let p = AgcParams::new(r, h, t_tr, t_g, k_ref);
        let q_n = Matrix::identity(4).scale(DEFAULT_PROCESS_NOISE);
        let r_n = Matrix::identity(2).scale(DEFAULT_MEASUREMENT_NOISE);
        if let Ok(dl) = DiscreteLoop::design(&p, 0.01, q_n, r_n, &GainSpec::default()) {
            prop_assert!(dl.estimator_radius() < 1.0);
        }
    }

    #[test]
    fn zoh_of_zero_input_is_exponential_semigroup(h in 3.0f64..8.0) {
        // A(ts)·A(ts) = A(2 ts).
        let p = AgcParams::new(0.05, h, 0.5, 0.2, 7.0);
        let css = build_continuous(&p).unwrap();
        let one = discretize_zoh(&css, 0.01).unwrap();
        let two = discretize_zoh(&css, 0.02).unwrap();
        prop_assert!(one.a.mul(&one.a).max_abs_diff(&two.a) < 1e-12);
    }
}
