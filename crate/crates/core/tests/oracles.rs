//! Closed-form values the solvers must reproduce.

use exitspec::comparison::{build_comparison_space, BoundingFunctions};
use exitspec::diffusion::{compare_to_quadrature, DiffusionConfig};
use exitspec::radial::constant;
use exitspec::spectrum::{moment_spectrum, DEFAULT_TOL};
use exitspec::{solve_hierarchy, space_form_warping, ModelSpace};

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

#[test]
fn euclidean_first_two_orders() {
    for m in 2..=6usize {
        let mf = m as f64;
        for r in [0.3, 1.0, 2.5] {
            let s = moment_spectrum(&ModelSpace::space_form(m, 0.0).unwrap(), r, 1, DEFAULT_TOL).unwrap();
            assert!(rel(s.values[0], r / mf) < 1e-12);
            assert!(
                rel(s.values[1], r.powi(3) / (mf * mf * (mf + 2.0))) < 1e-11,
                "m={m} R={r}"
            );
        }
    }
}

#[test]
fn euclidean_torsion_profile() {
    let p = solve_hierarchy(&ModelSpace::space_form(3, 0.0).unwrap(), 1.5, 1, DEFAULT_TOL).unwrap();
    for r in [0.0, 0.4, 1.1, 1.5] {
        assert!((p.value(1, r).unwrap() - (2.25 - r * r) / 6.0).abs() < 1e-12);
        assert!((p.derivative(1, r).unwrap() + r / 3.0).abs() < 1e-11);
    }
}

#[test]
fn hyperbolic_plane_closed_forms() {
    for (b, r) in [(-1.0f64, 0.7), (-4.0, 0.7), (-4.0, 1.3)] {
        let k: f64 = (-b).sqrt();
        let p = solve_hierarchy(&ModelSpace::space_form(2, b).unwrap(), r, 1, DEFAULT_TOL).unwrap();
        assert!(rel(p.spectrum().values[0], (k * r / 2.0).tanh() / k) < 1e-12, "b={b}");
        assert!(rel(p.value(1, 0.0).unwrap(), 2.0 * (k * r / 2.0).cosh().ln() / (k * k)) < 1e-11);
    }
}

#[test]
fn round_sphere_cap() {
    for r in [0.5, 1.0, 2.0, 3.0] {
        let s = moment_spectrum(&ModelSpace::space_form(2, 1.0).unwrap(), r, 0, DEFAULT_TOL).unwrap();
        assert!(rel(s.values[0], (r / 2.0).tan()) < 1e-11, "R={r}");
    }
}

#[test]
fn raw_moments_scale_with_boundary() {
    let s = moment_spectrum(&ModelSpace::space_form(2, 0.0).unwrap(), 1.0, 2, DEFAULT_TOL).unwrap();
    assert!(rel(s.boundary_volume, 2.0 * std::f64::consts::PI) < 1e-14);
    for k in 0..=2 {
        assert!(rel(s.raw[k], s.values[k] * s.boundary_volume) < 1e-15);
    }
}

#[test]
fn comparison_space_with_linear_mean_convexity() {
    // h = h0 on Euclidean space: W(s) = s exp(-m h0 s / (m - 1))
    let bounds = BoundingFunctions::below(constant(1.0), constant(0.05));
    let cs = build_comparison_space(&space_form_warping(0.0), &bounds, 4, 2.0, 1e-13).unwrap();
    for s in [0.25, 1.0, 2.0] {
        let want = s * (-4.0 * 0.05 * s / 3.0f64).exp();
        assert!(rel(cs.warping_at(s), want) < 1e-10);
    }
}

#[test]
fn expected_exit_time_of_planar_disk() {
    let model = ModelSpace::space_form(2, 0.0).unwrap();
    let mut cfg = DiffusionConfig::new(model.clone(), 1.0);
    cfg.paths = 20_000;
    cfg.dt = 2.5e-4;
    cfg.max_order = 1;
    let p = solve_hierarchy(&model, 1.0, 1, DEFAULT_TOL).unwrap();
    let cmp = compare_to_quadrature(&cfg, &p).unwrap();
    assert_eq!(cmp.rows[1].quad_value, 0.25);
    assert!(cmp.rows[1].z.unwrap().abs() < 4.0, "{:?}", cmp.rows[1]);
}
