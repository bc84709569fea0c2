use ldg_radial::params::classify_regime;
use ldg_radial::solver::solve_finite;
use ldg_radial::stability::{hardy_form, w_form};
use ldg_radial::{apply_radial_laplacian, build_grid, bulk_gradient, bulk_hessian, quadrature, Grading, MaterialParams, RegimeTag};
use proptest::prelude::*;

fn material() -> impl Strategy<Value = MaterialParams> {
    (0.1f64..4.0, 0.05f64..4.0, 0.1f64..4.0, 1i32..5).prop_map(|(a, b, c, k)| MaterialParams::new(a, b, c, k).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn far_field_is_a_bulk_critical_point(p in material()) {
        let d = p.constants();
        let (du, dv) = bulk_gradient(&p, d.u_inf, d.v_inf);
        let scale = p.a2() * d.s_plus + p.c2() * d.s_plus.powi(3) + p.b2() * d.s_plus * d.s_plus;
        prop_assert!(du.abs() <= 1e-10 * scale && dv.abs() <= 1e-10 * scale, "{du} {dv}");
    }

    #[test]
    fn s_plus_satisfies_its_quadratic(p in material()) {
        let d = p.constants();
        let (b2, c2) = (p.b2(), p.c2());
        let lhs = (4.0 * c2 * d.s_plus - b2).powi(2);
        let rhs = b2 * b2 + 24.0 * p.a2() * c2;
        prop_assert!((lhs - rhs).abs() <= 1e-12 * rhs);
    }

    #[test]
    fn hessian_matches_finite_differences(p in material(), u in -2.0f64..2.0, v in -2.0f64..2.0) {
        let h = 1e-6;
        let hess = bulk_hessian(&p, u, v);
        let (gu_p, gv_p) = bulk_gradient(&p, u + h, v);
        let (gu_m, gv_m) = bulk_gradient(&p, u - h, v);
        let (gu_q, gv_q) = bulk_gradient(&p, u, v + h);
        let (gu_n, gv_n) = bulk_gradient(&p, u, v - h);
        let fd = [[(gu_p - gu_m) / (2.0 * h), (gu_q - gu_n) / (2.0 * h)], [(gv_p - gv_m) / (2.0 * h), (gv_q - gv_n) / (2.0 * h)]];
        for i in 0..2 {
            for j in 0..2 {
                prop_assert!((hess[i][j] - fd[i][j]).abs() <= 1e-5 * (1.0 + hess[i][j].abs()));
            }
        }
    }

    #[test]
    fn regime_matches_brute_sign(p in material()) {
        let disc = p.b2().powi(2) - 3.0 * p.a2() * p.c2();
        let tag = classify_regime(&p, 1e-9).tag;
        let brute = if disc.abs() <= 1e-9 * (p.b2().powi(2) + 3.0 * p.a2() * p.c2()) {
            RegimeTag::Critical
        } else if disc > 0.0 {
            RegimeTag::Supercritical
        } else {
            RegimeTag::Subcritical
        };
        prop_assert_eq!(tag, brute);
    }

    #[test]
    fn critical_family_has_c2_s_plus_equal_b2(a2 in 0.1f64..4.0, c2 in 0.1f64..4.0) {
        let b2 = (3.0 * a2 * c2).sqrt();
        let p = MaterialParams::new(a2, b2, c2, 1).unwrap();
        prop_assert_eq!(p.regime().tag, RegimeTag::Critical);
        prop_assert!((c2 * p.constants().s_plus - b2).abs() <= 1e-12 * b2);
    }

    #[test]
    fn quadrature_and_laplacian_are_linear(
        n in 16usize..200,
        radius in 0.5f64..50.0,
        m in 0u32..4,
        alpha in -3.0f64..3.0,
        seed in any::<u64>(),
    ) {
        let g = build_grid(radius, n, Grading::Composite).unwrap();
        let f: Vec<f64> = (0..g.len()).map(|i| ((i as u64 ^ seed) % 97) as f64 / 97.0 - 0.5).collect();
        let h: Vec<f64> = g.nodes().iter().map(|r| (r * 0.3).sin()).collect();
        let mix: Vec<f64> = f.iter().zip(&h).map(|(a, b)| alpha * a + b).collect();
        let q = quadrature(&g, &mix).unwrap();
        let q_parts = alpha * quadrature(&g, &f).unwrap() + quadrature(&g, &h).unwrap();
        prop_assert!((q - q_parts).abs() <= 1e-10 * (1.0 + q.abs()));
        let lm = apply_radial_laplacian(&g, &mix, m).unwrap();
        let lf = apply_radial_laplacian(&g, &f, m).unwrap();
        let lh = apply_radial_laplacian(&g, &h, m).unwrap();
        for i in 0..g.len() {
            let expected = alpha * lf[i] + lh[i];
            prop_assert!((lm[i] - expected).abs() <= 1e-9 * (1.0 + expected.abs()));
        }
    }

    #[test]
    fn hardy_form_is_quadratic(lambda in -5.0f64..5.0, k in 1i32..5, seed in any::<u32>()) {
        let g = build_grid(10.0, 200, Grading::Composite).unwrap();
        let xi: Vec<f64> = g
            .nodes()
            .iter()
            .map(|&r| if (1.0..8.0).contains(&r) { ((r - 1.0) * (8.0 - r)) * (1.0 + f64::from(seed % 7) * r.cos()) } else { 0.0 })
            .collect();
        let scaled: Vec<f64> = xi.iter().map(|x| lambda * x).collect();
        let base = hardy_form(&g, &xi, k).unwrap();
        let q = hardy_form(&g, &scaled, k).unwrap();
        prop_assert!((q - lambda * lambda * base).abs() <= 1e-10 * (1.0 + base.abs() * lambda * lambda));
    }
}

#[test]
fn w_form_is_quadratic_on_a_solved_profile() {
    let p = MaterialParams::new(1.0, 1.0, 1.0, 2).unwrap();
    let g = build_grid(20.0, 400, Grading::Composite).unwrap();
    let prof = solve_finite(&p, &g, None, 1e-8, 100).unwrap();
    let w: Vec<f64> = prof.nodes().iter().map(|&r| if r < 20.0 { r * (20.0 - r) * (-r / 5.0).exp() } else { 0.0 }).collect();
    let base = w_form(&prof, &w).unwrap();
    for lambda in [-2.0, 0.5, 3.0] {
        let scaled: Vec<f64> = w.iter().map(|x| lambda * x).collect();
        let q = w_form(&prof, &scaled).unwrap();
        assert!((q - lambda * lambda * base).abs() <= 1e-10 * (1.0 + base.abs() * lambda * lambda));
    }
}
