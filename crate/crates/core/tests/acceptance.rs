//! Acceptance battery: each criterion prints one PASS/FAIL line and the
//! process fails if any criterion does.

use std::time::Instant;

use exitspec::comparison::{
    balance_check, build_comparison_space, compare_intrinsic, default_balance_grid, default_lemma_grid,
    lemma_paren_check, BoundingFunctions, Direction,
};
use exitspec::diffusion::{compare_to_quadrature, sample_exit_moments, z_scores_against, DiffusionConfig};
use exitspec::mesh::{
    catenoid, disk, estimate_hypothesis_fields, extract_extrinsic_ball, helicoid, mesh_spectrum,
    solve_discrete_hierarchy, verify_mesh, SurfaceMesh,
};
use exitspec::radial::constant;
use exitspec::spectrum::{moment_spectrum, DEFAULT_TOL};
use exitspec::{solve_hierarchy, space_form_warping, ModelSpace, Result};

struct Verdict {
    passed: bool,
    detail: String,
}

fn verdict(passed: bool, detail: String) -> Result<Verdict> {
    Ok(Verdict { passed, detail })
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

fn euclidean_exactness() -> Result<Verdict> {
    let mut worst0: f64 = 0.0;
    for m in [2usize, 3, 5] {
        for r in [0.5, 1.0, 2.0] {
            let s = moment_spectrum(&ModelSpace::space_form(m, 0.0)?, r, 0, DEFAULT_TOL)?;
            worst0 = worst0.max(rel(s.values[0], r / m as f64));
        }
    }
    let s = moment_spectrum(&ModelSpace::space_form(2, 0.0)?, 1.0, 1, DEFAULT_TOL)?;
    let err1 = rel(s.values[1], 1.0 / 16.0);
    verdict(
        worst0 <= 1e-10 && err1 <= 1e-8,
        format!("max rel err A0 {worst0:.2e} (tol 1e-10), A1 {err1:.2e} (tol 1e-8)"),
    )
}

fn hyperbolic_closed_forms() -> Result<Verdict> {
    let model = ModelSpace::space_form(2, -1.0)?;
    let mut worst: f64 = 0.0;
    for r in [0.5, 1.0, 1.5] {
        let p = solve_hierarchy(&model, r, 1, DEFAULT_TOL)?;
        worst = worst.max((p.value(1, 0.0)? - 2.0 * (r / 2.0).cosh().ln()).abs());
        worst = worst.max((p.spectrum().values[0] - (r / 2.0).tanh()).abs());
    }
    verdict(worst <= 1e-8, format!("max err {worst:.2e} (tol 1e-8)"))
}

fn divergence_identity() -> Result<Verdict> {
    let mut worst: f64 = 0.0;
    for b in [0.0, -1.0, -4.0] {
        for m in [2usize, 3] {
            for r in [0.5, 1.0, 2.0] {
                let p = solve_hierarchy(&ModelSpace::space_form(m, b)?, r, 6, DEFAULT_TOL)?;
                let boundary = p.spectrum();
                let volume = p.volume_spectrum()?;
                for k in 0..=5 {
                    worst = worst.max(rel(volume.values[k], boundary.values[k]));
                }
            }
        }
    }
    verdict(worst <= 1e-8, format!("max rel gap k<=5 {worst:.2e} (tol 1e-8)"))
}

fn reduction_to_model() -> Result<Verdict> {
    let flat = BoundingFunctions::below(constant(1.0), constant(0.0));
    let (mut gap, mut spec): (f64, f64) = (0.0, 0.0);
    for b in [0.0, -1.0] {
        for m in [2usize, 3] {
            let w = space_form_warping(b);
            let radius = 1.5;
            let cs = build_comparison_space(&w, &flat, m, radius, 1e-13)?;
            let peak = w.eval(radius);
            for i in 0..=1000 {
                let s = cs.stretched_radius() * i as f64 / 1000.0;
                gap = gap.max((cs.warping_at(s) - w.eval(s)).abs() / peak);
            }
            let got = moment_spectrum(cs.as_model(), cs.stretched_radius(), 5, DEFAULT_TOL)?;
            let want = moment_spectrum(&ModelSpace::space_form(m, b)?, radius, 5, DEFAULT_TOL)?;
            for k in 0..=5 {
                spec = spec.max(rel(got.values[k], want.values[k]));
            }
        }
    }
    verdict(
        gap <= 1e-8 && spec <= 1e-8,
        format!("|W-w|/max w {gap:.2e}, spectra rel gap {spec:.2e} (tol 1e-8)"),
    )
}

fn lambda_ode_closed_form() -> Result<Verdict> {
    let mut worst: f64 = 0.0;
    for h0 in [0.1, 0.3] {
        for m in [2usize, 3] {
            let bounds = BoundingFunctions::below(constant(1.0), constant(h0));
            let cs = build_comparison_space(&space_form_warping(0.0), &bounds, m, 1.0, 1e-13)?;
            let mf = m as f64;
            for i in 1..=1000 {
                let s = cs.stretched_radius() * i as f64 / 1000.0;
                worst = worst.max(rel(cs.warping_at(s), s * (-mf * h0 * s / (mf - 1.0)).exp()));
            }
        }
    }
    verdict(worst <= 1e-6, format!("max rel err of W {worst:.2e} (tol 1e-6)"))
}

fn balance() -> Result<Verdict> {
    let flat = BoundingFunctions::below(constant(1.0), constant(0.0));
    let mut min_strict = f64::INFINITY;
    let mut all_strict = true;
    let mut zero: f64 = 0.0;
    for b in [-0.25, -1.0, -4.0, 0.0] {
        for m in [2usize, 3] {
            let cs = build_comparison_space(&space_form_warping(b), &flat, m, 1.0, 1e-13)?;
            let grid = default_balance_grid(&cs);
            assert_eq!(grid.len(), 512);
            if b < 0.0 {
                let rep = balance_check(&cs, true, &grid)?;
                all_strict &= rep.balanced;
                min_strict = min_strict.min(rep.min_margin);
            } else {
                let rep = balance_check(&cs, false, &grid)?;
                zero = zero.max(rep.margins.iter().fold(0.0, |a, x| a.max(x.abs())));
            }
        }
    }
    verdict(
        all_strict && zero <= 1e-10,
        format!("min strict margin {min_strict:.3e} (> 0), flat |margin| {zero:.2e} (tol 1e-10)"),
    )
}

fn lemma_positivity() -> Result<Verdict> {
    let flat = BoundingFunctions::below(constant(1.0), constant(0.0));
    let mut balanced_min = f64::INFINITY;
    let mut strict_min = f64::INFINITY;
    for b in [-0.25, -1.0, -4.0, 0.0] {
        for m in [2usize, 3] {
            let cs = build_comparison_space(&space_form_warping(b), &flat, m, 1.0, 1e-13)?;
            let rep = lemma_paren_check(&cs, 3, &default_lemma_grid(&cs))?;
            // per_order[i] holds order i + 1
            let v = rep.per_order[1].min(rep.per_order[2]);
            if b < 0.0 {
                strict_min = strict_min.min(v);
            } else {
                balanced_min = balanced_min.min(v);
            }
        }
    }
    verdict(
        balanced_min >= -1e-9 && strict_min > 0.0,
        format!("k=2,3 min balanced {balanced_min:.2e} (>= -1e-9), strictly balanced {strict_min:.3e} (> 0)"),
    )
}

fn intrinsic_theorem() -> Result<Verdict> {
    let h1 = ModelSpace::space_form(2, -1.0)?;
    let flat = ModelSpace::space_form(2, 0.0)?;
    let h4 = ModelSpace::space_form(2, -4.0)?;
    let mut ok = true;
    let mut min_margin = f64::INFINITY;
    for r in [0.5, 1.0, 2.0] {
        for (other, dir) in [(&flat, Direction::Le), (&h4, Direction::Ge)] {
            for v in compare_intrinsic(&h1, other, r, 5, dir)? {
                ok &= v.holds && v.strict;
                min_margin = min_margin.min(v.margin);
            }
        }
    }
    verdict(ok, format!("all 36 inequalities strict, min margin {min_margin:.3e}"))
}

fn monte_carlo() -> Result<Verdict> {
    let mut worst: f64 = 0.0;
    for b in [0.0, -1.0] {
        let model = ModelSpace::space_form(2, b)?;
        let cfg = DiffusionConfig::new(model.clone(), 1.0);
        assert_eq!((cfg.paths, cfg.dt, cfg.r0), (100_000, 1e-4, 0.0));
        let profiles = solve_hierarchy(&model, 1.0, 2, DEFAULT_TOL)?;
        let cmp = compare_to_quadrature(&cfg, &profiles)?;
        for row in cmp.rows.iter().filter(|r| r.k >= 1) {
            worst = worst.max(row.z.map_or(f64::INFINITY, f64::abs));
        }
    }
    let model = ModelSpace::space_form(2, 0.0)?;
    let mut cfg = DiffusionConfig::new(model.clone(), 0.5);
    cfg.paths = 10_000;
    let run = sample_exit_moments(&cfg)?;
    let wrong = solve_hierarchy(&model, 1.0, 2, DEFAULT_TOL)?;
    let control = z_scores_against(&run.estimates, 0.0, &wrong)?
        .iter()
        .filter_map(|r| r.z)
        .fold(f64::INFINITY, |a, z| a.min(z.abs()));
    verdict(
        worst <= 3.0 && control > 10.0,
        format!("max |z| {worst:.2} (<= 3), mismatched-R control min |z| {control:.1} (> 10)"),
    )
}

fn flat_error(rings: usize) -> Result<(f64, usize)> {
    let ball = extract_extrinsic_ball(&disk(1.25, rings)?, 1.0)?;
    let h = solve_discrete_hierarchy(&ball, 1, 1e-12)?;
    let s = mesh_spectrum(&h)?;
    let exact = moment_spectrum(&ModelSpace::space_form(2, 0.0)?, ball.radius(), 1, DEFAULT_TOL)?;
    let err = rel(s.values[0], exact.values[0]).max(rel(s.values[1], exact.values[1]));
    Ok((err, ball.vertices().len()))
}

fn mesh_equality() -> Result<Verdict> {
    let ball = extract_extrinsic_ball(&disk(1.25, 72)?, 1.0)?;
    let h = solve_discrete_hierarchy(&ball, 1, 1e-12)?;
    let s = mesh_spectrum(&h)?;
    let e0 = rel(s.values[0], 0.5);
    let e1 = rel(s.values[1], 0.0625);
    let (a, _) = flat_error(20)?;
    let (b, _) = flat_error(40)?;
    let (c, _) = flat_error(80)?;
    let rate = (a / b).log2().min((b / c).log2());
    verdict(
        e0 <= 0.02 && e1 <= 0.02 && rate >= 1.7,
        format!(
            "{} vertices: rel err A0 {e0:.2e}, A1 {e1:.2e} (tol 2e-2); refinement rate {rate:.2} (>= 1.7)",
            ball.vertices().len()
        ),
    )
}

fn max_abs_c(mesh: &SurfaceMesh) -> Result<f64> {
    Ok(estimate_hypothesis_fields(&extract_extrinsic_ball(mesh, 1.0)?).max_abs_c)
}

fn mesh_inequality() -> Result<Verdict> {
    let mut ok = true;
    let mut min_rel_margin = f64::INFINITY;
    let surfaces = [("catenoid", catenoid(1.6, 120)?), ("helicoid", helicoid(1.6, 1.0, 40)?)];
    for (_, mesh) in &surfaces {
        for r in [0.6, 1.0] {
            let rep = verify_mesh(mesh, r, 3, 1e-12, None)?;
            ok &= rep.all_hold;
            for v in &rep.verdicts {
                min_rel_margin = min_rel_margin.min(v.margin / v.model_value);
            }
        }
    }
    let cat = [
        max_abs_c(&catenoid(1.6, 60)?)?,
        max_abs_c(&catenoid(1.6, 120)?)?,
        max_abs_c(&catenoid(1.6, 240)?)?,
    ];
    let hel = [
        max_abs_c(&helicoid(1.6, 1.0, 20)?)?,
        max_abs_c(&helicoid(1.6, 1.0, 40)?)?,
        max_abs_c(&helicoid(1.6, 1.0, 80)?)?,
    ];
    let shrinks = |c: &[f64; 3]| c[1] < c[0] && c[2] < c[1] && c[2] < 0.25 * c[0];
    verdict(
        ok && shrinks(&cat) && shrinks(&hel),
        format!(
            "k<=3 bounds hold, min relative margin {min_rel_margin:.3e}; max|C| catenoid {:.1e} -> {:.1e} -> {:.1e}, helicoid {:.1e} -> {:.1e} -> {:.1e}",
            cat[0], cat[1], cat[2], hel[0], hel[1], hel[2]
        ),
    )
}

type Criterion = (&'static str, f64, fn() -> Result<Verdict>);

fn main() {
    let criteria: [Criterion; 11] = [
        ("euclidean exactness", 1.0, euclidean_exactness),
        ("hyperbolic closed forms", 1.0, hyperbolic_closed_forms),
        ("divergence identity", 5.0, divergence_identity),
        ("comparison-space reduction", 2.0, reduction_to_model),
        ("lambda-ode closed form", 2.0, lambda_ode_closed_form),
        ("balance", 1.0, balance),
        ("lemma positivity", 5.0, lemma_positivity),
        ("intrinsic comparison", 2.0, intrinsic_theorem),
        ("monte-carlo agreement", 120.0, monte_carlo),
        ("mesh equality case", 30.0, mesh_equality),
        ("mesh inequality case", 120.0, mesh_inequality),
    ];
    let mut failed = 0;
    for (i, (name, budget, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = run();
        let secs = start.elapsed().as_secs_f64();
        let (passed, detail) = match outcome {
            Ok(v) => (v.passed && secs < *budget, v.detail),
            Err(e) => (false, format!("error: {e}")),
        };
        if !passed {
            failed += 1;
        }
        println!(
            "criterion {:>2} {:<28} {}  {detail}; {secs:.2} s (budget {budget} s)",
            i + 1,
            name,
            if passed { "PASS" } else { "FAIL" }
        );
    }
    println!(
        "acceptance: {} of {} criteria passed",
        criteria.len() - failed,
        criteria.len()
    );
    if failed > 0 {
        std::process::exit(1);
    }
}
