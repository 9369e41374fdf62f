use std::f64::consts::PI;

use ewlimit_core::{
    a_hat, build_whittaker_stencil, canonical_site, dual_frequencies, enumerate_sites,
    limit_coefficients, r_and_i, validate_assumptions, TorusParams, C64,
};
use proptest::prelude::*;

#[test]
fn symbol_matches_term_by_term_sum() {
    let (s, _) = build_whittaker_stencil(2.0, 1.0).unwrap();
    let k = [0.1, 0.2];
    let e = 1.0f64;
    let b = 1.0f64;
    let c = 1.0f64;
    let d = 2.0f64;
    // closed forms, re-derived: B = D - C = 1
    let up = (-b).exp() * (1.0 - (-d).exp()) / (1.0 - (-c).exp());
    let down = (-c).exp() * (1.0 - (-b).exp()) * (1.0 - (-d).exp()) / (1.0 - (-c).exp()).powi(2);
    let left = -(-d).exp() * (1.0 - (-b).exp()) / (1.0 - (-c).exp());
    let centre = -(up + down + left);
    let cis = |th: f64| C64::from_polar(e, th);
    let want = centre + cis(k[0] - k[1]) * up + cis(-k[1]) * down + cis(-k[0]) * left;
    assert!((a_hat(&s, k) - want).norm() < 1e-14);
}

#[test]
fn velocity_and_form_match_finite_differences() {
    let (s, _) = build_whittaker_stencil(2.0, 1.0).unwrap();
    let lc = limit_coefficients(&s).unwrap();
    let h = 1e-5;
    for j in 0..2 {
        let mut kp = [0.0; 2];
        let mut km = [0.0; 2];
        kp[j] = h;
        km[j] = -h;
        // U_j = i d_j A_hat(0)
        let grad = (a_hat(&s, kp) - a_hat(&s, km)) / (2.0 * h);
        let u = C64::new(0.0, 1.0) * grad;
        assert!((u.re - lc.velocity[j]).abs() < 1e-9);
        assert!(u.im.abs() < 1e-9);
    }
    let r = |k: [f64; 2]| r_and_i(&s, k).0;
    let h = 1e-4;
    for i in 0..2 {
        for j in 0..2 {
            let mut e_i = [0.0; 2];
            let mut e_j = [0.0; 2];
            e_i[i] = h;
            e_j[j] = h;
            let pp = r([e_i[0] + e_j[0], e_i[1] + e_j[1]]);
            let pm = r([e_i[0] - e_j[0], e_i[1] - e_j[1]]);
            let mp = r([-e_i[0] + e_j[0], -e_i[1] + e_j[1]]);
            let mm = r([-e_i[0] - e_j[0], -e_i[1] - e_j[1]]);
            let hess = (pp - pm - mp + mm) / (4.0 * h * h);
            assert!((0.5 * hess - lc.diffusion.get(i, j)).abs() < 1e-6, "{i}{j}");
        }
    }
    assert!((lc.velocity[0] + 0.638_550_2).abs() < 2e-7);
    assert!((lc.velocity[1] - 1.006_429_4).abs() < 1e-7);
}

#[test]
fn definition_form_agrees_on_the_torus() {
    // sum_x A_{x,0} e^{-i<x,k>} over the torus matrix equals the stencil form
    let (s, _) = build_whittaker_stencil(2.0, 1.0).unwrap();
    let p = TorusParams::new(8, 3).unwrap();
    let sites = enumerate_sites(&p);
    for f in dual_frequencies(&p) {
        let k = f.k(&p);
        let mut acc = C64::new(0.0, 0.0);
        for x in &sites {
            // A_{x,0} = sum_z A_{0,z} [0 ~ x + z]
            let mut a = 0.0;
            for &(z, c) in s.entries() {
                if canonical_site([x.x1 + z[0], x.x2 + z[1]], &p) == canonical_site([0, 0], &p) {
                    a += c;
                }
            }
            let th = k[0] * x.x1 as f64 + k[1] * x.x2 as f64;
            acc += C64::from_polar(a, -th);
        }
        assert!((acc - a_hat(&s, k)).norm() < 1e-13);
    }
}

#[test]
fn taylor_and_imaginary_bounds() {
    let (s, _) = build_whittaker_stencil(2.0, 1.0).unwrap();
    let lc = limit_coefficients(&s).unwrap();
    let mut worst = 0.0f64;
    for i in 0..50 {
        let th = 2.0 * PI * i as f64 / 50.0;
        for r in [0.1, 0.05, 0.02, 0.01] {
            let k = [r * th.cos(), r * th.sin()];
            let ku = k[0] * lc.velocity[0] + k[1] * lc.velocity[1];
            let rem = a_hat(&s, k) + C64::new(0.0, ku) - lc.diffusion.quad_form(k) / 2.0;
            worst = worst.max(rem.norm() / (r * r * r));
        }
    }
    assert!(worst.is_finite() && worst < 10.0, "{worst}");
    let rep = validate_assumptions(&s, 64).unwrap();
    assert!(rep.imag_residual < 10.0);
    assert!(rep.taylor_residual < 10.0);
}

#[test]
fn q_eigenvalues_and_normalizer() {
    for (d, c) in [(2.0, 1.0), (3.0, 1.0), (1.5, 0.5), (5.0, 4.5)] {
        let (s, _) = build_whittaker_stencil(d, c).unwrap();
        let lc = limit_coefficients(&s).unwrap();
        let e = lc.diffusion.sym_eigen();
        assert!(e.values[1] < 0.0);
        let v = lc.normalizer;
        assert!((v.get(0, 1) - v.get(1, 0)).abs() < 1e-14);
        assert!(v.sym_eigen().values[0] > 0.0);
        assert!(lc.det_normalizer > 0.0);
        let vi = lc.normalizer_inverse();
        assert!(((vi * vi).scale(-1.0)).max_abs_diff(&lc.diffusion) < 1e-10);
    }
}

proptest! {
    #[test]
    fn symbol_parity_and_periodicity(k1 in -10.0f64..10.0, k2 in -10.0f64..10.0) {
        let (s, _) = build_whittaker_stencil(2.0, 1.0).unwrap();
        let k = [k1, k2];
        let a = a_hat(&s, k);
        prop_assert!((a - a_hat(&s, [-k1, -k2]).conj()).norm() < 1e-14);
        prop_assert!((a - a_hat(&s, [k1 + 2.0 * PI, k2])).norm() < 1e-13);
        prop_assert!((a - a_hat(&s, [k1, k2 - 2.0 * PI])).norm() < 1e-13);
        let (r, i) = r_and_i(&s, k);
        let (rm, im) = r_and_i(&s, [-k1, -k2]);
        prop_assert!((r - rm).abs() < 1e-14);
        prop_assert!((i + im).abs() < 1e-14);
        prop_assert!(r <= 1e-12);
    }
}
