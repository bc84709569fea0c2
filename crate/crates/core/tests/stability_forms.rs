use std::f64::consts::PI;

use ldg_radial::grid::RadialGrid;
use ldg_radial::solver::{solve_finite, solve_infinite, BcMode, ProfilePair};
use ldg_radial::stability::{
    far_field_potential_defect, hardy_form, hardy_identity_defect, minimize_rayleigh, random_test_function, test_function,
    w_form, xi_form, xi_form_for_winding, TestFamily,
};
use ldg_radial::{build_grid, Grading, MaterialParams};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

const S3: f64 = 1.7320508075688772;

fn finite(b2: f64, k: i32, n: usize) -> ProfilePair {
    let p = MaterialParams::new(1.0, b2, 1.0, k).unwrap();
    let g = build_grid(20.0, n, Grading::Composite).unwrap();
    solve_finite(&p, &g, None, 1e-8, 100).unwrap()
}

fn infinite(b2: f64, k: i32, r_max: f64) -> ProfilePair {
    let p = MaterialParams::new(1.0, b2, 1.0, k).unwrap();
    solve_infinite(&p, r_max, 4000, BcMode::AsymptoticCorrected, 1e-8).unwrap()
}

#[test]
fn hardy_substitution_holds_and_converges_at_second_order() {
    for k in [1, 2, 3] {
        let coarse = finite(1.0, k, 1600);
        let fine = finite(1.0, k, 3200);
        let mut rc = ChaCha8Rng::seed_from_u64(5);
        let mut rf = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..5 {
            let xc = random_test_function(&coarse.grid, 0.3, 10.0, &mut rc);
            let xf = random_test_function(&fine.grid, 0.3, 10.0, &mut rf);
            let (ec, ef) = (hardy_identity_defect(&coarse, &xc).unwrap(), hardy_identity_defect(&fine, &xf).unwrap());
            assert!(ec <= 1e-5 && ef <= 1e-5, "k = {k}: {ec} {ef}");
            let order = (ec / ef).log2();
            assert!(order >= 1.9, "k = {k}: order {order}");
        }
    }
}

#[test]
fn hardy_substitution_on_far_field_profiles() {
    let prof = infinite(1.0, 2, 200.0);
    let xi = test_function(&prof.grid, TestFamily::log_sine_on(10.0, 200.0), 5.0).unwrap();
    let w: Vec<f64> = xi.iter().zip(&prof.u).map(|(x, u)| x * u).collect();
    let (a, b) = (w_form(&prof, &w).unwrap(), xi_form(&prof, &xi).unwrap());
    assert!((a - b).abs() <= 1e-6 * b.abs(), "{a} {b}");
}

#[test]
fn pure_hardy_log_sine_value() {
    // 400 nodes per log-period on (1, e^{2 pi}).
    let dt = 2.0 * PI / 400.0;
    let nodes: Vec<f64> = std::iter::once(0.0).chain((0..=440).map(|j| (-0.2 + dt * f64::from(j)).exp())).collect();
    let g = RadialGrid::from_nodes(nodes).unwrap();
    let xi = test_function(&g, TestFamily::LogSine { n: 0 }, 0.0).unwrap();
    let value = hardy_form(&g, &xi, 1).unwrap();
    let exact = -PI / 4.0;
    assert!((value - exact).abs() <= 0.01 * exact.abs(), "{value}");
}

#[test]
fn xi_form_is_nonincreasing_in_winding() {
    let prof = infinite(1.0, 1, 200.0);
    let xi = test_function(&prof.grid, TestFamily::GaussianBump { center: 40.0, width: 8.0 }, 0.0).unwrap();
    let vals: Vec<f64> = [1, 2, 3].iter().map(|&k| xi_form_for_winding(&prof, &xi, k).unwrap()).collect();
    assert!(vals[0] >= vals[1] && vals[1] >= vals[2], "{vals:?}");
}

#[test]
fn far_field_tilt_potential_matches_winding() {
    for (b2, k) in [(1.0, 1), (1.0, 2), (S3, 1), (S3, 2)] {
        let prof = infinite(b2, k, 200.0);
        let defect = far_field_potential_defect(&prof, 150.0, 200.0);
        assert!(defect <= 0.05, "b2 = {b2}, k = {k}: {defect}");
    }
}

#[test]
fn wide_annulus_certifies_instability() {
    for b2 in [1.0, 3.0] {
        for k in [2, 3] {
            let prof = infinite(b2, k, 400.0);
            let rep = minimize_rayleigh(&prof, (10.0, 400.0), 1).unwrap();
            assert!(rep.min_rayleigh < 0.0, "b2 = {b2}, k = {k}: {}", rep.min_rayleigh);
            let cert = rep.certificate.as_ref().unwrap();
            let recomputed = xi_form(&prof, cert).unwrap();
            assert!(recomputed < 0.0);
            assert_eq!(Some(recomputed), rep.certificate_form_value);
            assert!(prof.nodes().iter().zip(cert).all(|(r, x)| (*r > 10.0 && *r < 400.0) || *x == 0.0));
            assert!(rep.hardy_identity_error <= 1e-5);
            assert!(!rep.open_question);
        }
    }
}

#[test]
fn critical_log_sine_on_outer_annulus_is_negative() {
    let prof = infinite(S3, 2, 200.0);
    let xi = test_function(&prof.grid, TestFamily::log_sine_on(5.0, 200.0), 0.0).unwrap();
    assert!(xi_form(&prof, &xi).unwrap() < 0.0);
}

#[test]
fn narrow_outer_annulus_admits_no_negative_direction() {
    // Far out the form is u_inf^2 int (xi_t^2 - (k^2 - c_k)/4 xi^2) dt in t = ln r, so a
    // negative direction needs ln(r_b/r_a) > pi / sqrt((k^2 - c_k)/4); ln 4 is too short.
    for k in [2, 3] {
        let prof = infinite(1.0, k, 400.0);
        let rep = minimize_rayleigh(&prof, (100.0, 400.0), 1).unwrap();
        assert!(rep.min_rayleigh > 0.0 && rep.certificate.is_none(), "k = {k}: {}", rep.min_rayleigh);
    }
}

#[test]
fn unit_winding_is_reported_without_claim() {
    let prof = infinite(1.0, 1, 400.0);
    let rep = minimize_rayleigh(&prof, (100.0, 400.0), 1).unwrap();
    assert!(rep.open_question);
    assert!(rep.min_rayleigh.is_finite());
}

#[test]
fn test_functions_are_nondegenerate() {
    let prof = infinite(1.0, 2, 200.0);
    let g = &prof.grid;
    for fam in [TestFamily::log_sine_on(50.0, 200.0), TestFamily::GaussianBump { center: 100.0, width: 10.0 }] {
        let xi = test_function(g, fam, 2.0).unwrap();
        let mass: f64 = xi.iter().zip(g.weights()).map(|(x, w)| x * x * w).sum();
        assert!(mass > 0.0);
    }
}
