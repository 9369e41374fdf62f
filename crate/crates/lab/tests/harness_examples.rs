use ewlimit::harness::{estimate_x_covariance, Setup};
use ewlimit::ExperimentConfig;
use ewlimit_core::{GaussianTestFunction, TorusParams};

fn config(replicas: u64, seed: u64) -> ExperimentConfig {
    config_eps(replicas, seed, 1e-10)
}

fn config_eps(replicas: u64, seed: u64, eps: f64) -> ExperimentConfig {
    ExperimentConfig::from_json(&format!(
        r#"{{
        "torus": {{"m": 64, "m2": 32}},
        "drift": {{"D": 2.0, "C": 1.0, "tie_in": true}},
        "rescale": {{"delta_list": [0.25], "s": 0.5, "t": 0.5}},
        "test_function": {{"components": [{{"amplitude": 1.0, "center": [0.0, 0.0], "sigma": 1.0}}]}},
        "mc": {{"replicas": {replicas}, "seed": {seed}}},
        "quadrature": {{"quad_n": 6, "eps": {eps:e}, "radial_n": 64, "angular_n": 32}}
    }}"#
    ))
    .unwrap()
}

#[test]
fn estimate_matches_the_weighted_torus_covariance() {
    // at eps = 1e-10 the retained cells of this test function just wrap on m = 64
    let cfg = config_eps(100_000, 17, 1e-8);
    let setup = Setup::new(&cfg).unwrap();
    let phi = GaussianTestFunction::unit();
    let p = TorusParams::new(64, 32).unwrap();
    let out = estimate_x_covariance(&cfg, &setup, &phi, &phi, 0.5, 0.5, 0.25, Some(p)).unwrap();
    assert_eq!(out.estimate.n, 100_000);
    let gap = (out.estimate.mean - out.exact).abs();
    assert!(
        gap <= 4.0 * out.estimate.stderr,
        "{:?} vs {}",
        out.estimate,
        out.exact
    );
}

#[test]
fn two_time_estimate_matches_too() {
    let cfg = config(20_000, 5);
    let setup = Setup::new(&cfg).unwrap();
    let phi = GaussianTestFunction::unit();
    let shifted = GaussianTestFunction::new(vec![ewlimit_core::GaussianComponent {
        amplitude: 1.0,
        center: [0.5, -0.5],
        sigma: 0.8,
    }])
    .unwrap();
    let out = estimate_x_covariance(&cfg, &setup, &phi, &shifted, 0.25, 0.5, 0.25, None).unwrap();
    let gap = (out.estimate.mean - out.exact).abs();
    assert!(gap <= 4.0 * out.estimate.stderr);
}

#[test]
fn noise_scaling_scales_the_estimate() {
    let phi = GaussianTestFunction::unit();
    let cfg = config(20_000, 1);
    let setup = Setup::new(&cfg).unwrap();
    let base = estimate_x_covariance(&cfg, &setup, &phi, &phi, 0.5, 0.5, 0.5, None).unwrap();
    let mut louder = setup.clone();
    louder.v *= 3.0;
    let cfg2 = config(20_000, 2);
    let scaled = estimate_x_covariance(&cfg2, &louder, &phi, &phi, 0.5, 0.5, 0.5, None).unwrap();
    assert!((scaled.exact - 3.0 * base.exact).abs() < 1e-12 * scaled.exact);
    let se = (scaled.estimate.stderr.powi(2) + 9.0 * base.estimate.stderr.powi(2)).sqrt();
    assert!((scaled.estimate.mean - 3.0 * base.estimate.mean).abs() <= 4.0 * se);
}

#[test]
fn zero_time_is_zero() {
    let cfg = config(1000, 3);
    let setup = Setup::new(&cfg).unwrap();
    let phi = GaussianTestFunction::unit();
    let out = estimate_x_covariance(&cfg, &setup, &phi, &phi, 0.0, 0.0, 0.25, None).unwrap();
    assert!(out.estimate.mean.abs() <= 4.0 * out.estimate.stderr || out.estimate.mean == 0.0);
}
