//! A fast self-check battery over closed forms and cross-method agreement.

use exitspec::comparison::{
    balance_check, build_comparison_space, compare_intrinsic, lemma_paren_check, log_grid, BoundingFunctions, Direction,
};
use exitspec::diffusion::{compare_to_quadrature, DiffusionConfig};
use exitspec::mesh::{catenoid, disk, flat_disk_error, verify_mesh};
use exitspec::radial::constant;
use exitspec::spectrum::{moment_spectrum, DEFAULT_TOL};
use exitspec::{solve_hierarchy, space_form_warping, ModelSpace, Result};
use serde_json::json;

use crate::args::{Format, SuiteArgs};
use crate::commands::{envelope, Outcome};
use crate::report::{fmt17, Table};

struct Battery {
    table: Table,
    failed: usize,
}

impl Battery {
    fn record(&mut self, criterion: &str, check: String, value: f64, reference: f64, tolerance: f64, passed: bool) {
        if !passed {
            self.failed += 1;
        }
        self.table.push(vec![
            criterion.to_string(),
            check,
            fmt17(value),
            fmt17(reference),
            fmt17(tolerance),
            passed.to_string(),
        ]);
    }

    /// `|value - reference| <= tolerance * |reference|`.
    fn relative(&mut self, criterion: &str, check: String, value: f64, reference: f64, tolerance: f64) {
        let passed = (value - reference).abs() <= tolerance * reference.abs();
        self.record(criterion, check, value, reference, tolerance, passed);
    }
}

fn rel_err(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

fn closed_forms(b: &mut Battery) -> Result<()> {
    for m in [2usize, 3, 5] {
        for r in [0.5, 1.0, 2.0] {
            let s = moment_spectrum(&ModelSpace::space_form(m, 0.0)?, r, 0, DEFAULT_TOL)?;
            b.relative("euclidean", format!("A0 m={m} R={r}"), s.values[0], r / m as f64, 1e-10);
        }
    }
    let s = moment_spectrum(&ModelSpace::space_form(2, 0.0)?, 1.0, 1, DEFAULT_TOL)?;
    b.relative("euclidean", "A1 m=2 R=1".into(), s.values[1], 0.0625, 1e-8);
    let h = ModelSpace::space_form(2, -1.0)?;
    for r in [0.5, 1.0, 1.5] {
        let p = solve_hierarchy(&h, r, 1, DEFAULT_TOL)?;
        let u1 = 2.0 * (r / 2.0).cosh().ln();
        b.relative("hyperbolic", format!("u1(0) R={r}"), p.value(1, 0.0)?, u1, 1e-8);
        b.relative(
            "hyperbolic",
            format!("A0 R={r}"),
            p.spectrum().values[0],
            (r / 2.0).tanh(),
            1e-8,
        );
    }
    Ok(())
}

fn divergence(b: &mut Battery) -> Result<()> {
    for curv in [0.0, -1.0, -4.0] {
        for m in [2usize, 3] {
            let p = solve_hierarchy(&ModelSpace::space_form(m, curv)?, 1.0, 6, DEFAULT_TOL)?;
            let boundary = p.spectrum();
            let volume = p.volume_spectrum()?;
            let worst = (0..=5)
                .map(|k| rel_err(volume.values[k], boundary.values[k]))
                .fold(0.0, f64::max);
            b.record(
                "divergence",
                format!("b={curv} m={m} k<=5"),
                worst,
                0.0,
                1e-8,
                worst <= 1e-8,
            );
        }
    }
    Ok(())
}

fn comparison(b: &mut Battery) -> Result<()> {
    let flat = BoundingFunctions::below(constant(1.0), constant(0.0));
    for curv in [0.0, -1.0] {
        let w = space_form_warping(curv);
        let cs = build_comparison_space(&w, &flat, 2, 1.0, 1e-13)?;
        let peak = w.eval(1.0);
        let gap = (0..=200)
            .map(|i| {
                let s = i as f64 / 200.0;
                (cs.warping_at(s) - w.eval(s)).abs()
            })
            .fold(0.0, f64::max)
            / peak;
        b.record(
            "reduction",
            format!("|W-w|/max w b={curv}"),
            gap,
            0.0,
            1e-8,
            gap <= 1e-8,
        );
        let got = moment_spectrum(cs.as_model(), cs.stretched_radius(), 3, DEFAULT_TOL)?;
        let want = moment_spectrum(&ModelSpace::space_form(2, curv)?, 1.0, 3, DEFAULT_TOL)?;
        let worst = (0..=3)
            .map(|k| rel_err(got.values[k], want.values[k]))
            .fold(0.0, f64::max);
        b.record(
            "reduction",
            format!("spectra b={curv}"),
            worst,
            0.0,
            1e-8,
            worst <= 1e-8,
        );
    }
    for h0 in [0.1, 0.3] {
        for m in [2usize, 3] {
            let bounds = BoundingFunctions::below(constant(1.0), constant(h0));
            let cs = build_comparison_space(&space_form_warping(0.0), &bounds, m, 1.0, 1e-13)?;
            let mf = m as f64;
            let worst = (1..=200)
                .map(|i| {
                    let s = cs.stretched_radius() * i as f64 / 200.0;
                    rel_err(cs.warping_at(s), s * (-mf * h0 * s / (mf - 1.0)).exp())
                })
                .fold(0.0, f64::max);
            b.record("lambda-ode", format!("h0={h0} m={m}"), worst, 0.0, 1e-6, worst <= 1e-6);
        }
    }
    Ok(())
}

fn balance(b: &mut Battery) -> Result<()> {
    let flat = BoundingFunctions::below(constant(1.0), constant(0.0));
    for curv in [-0.25, -1.0, -4.0, 0.0] {
        for m in [2usize, 3] {
            let cs = build_comparison_space(&space_form_warping(curv), &flat, m, 1.0, 1e-13)?;
            let strict = curv < 0.0;
            let grid = log_grid(cs.stretched_radius(), 512);
            let rep = balance_check(&cs, strict, &grid)?;
            if strict {
                b.record(
                    "balance",
                    format!("b={curv} m={m} strict"),
                    rep.min_margin,
                    0.0,
                    0.0,
                    rep.balanced,
                );
            } else {
                let worst = rep.margins.iter().fold(0.0f64, |a, x| a.max(x.abs()));
                b.record(
                    "balance",
                    format!("b={curv} m={m} zero"),
                    worst,
                    0.0,
                    1e-10,
                    worst <= 1e-10,
                );
            }
            let lemma = lemma_paren_check(&cs, 3, &log_grid(cs.radius(), 128))?;
            for (k, v) in lemma.per_order.iter().enumerate().map(|(i, v)| (i + 1, v)).skip(1) {
                let passed = if strict { *v > 0.0 } else { *v >= -1e-9 };
                b.record(
                    "lemma",
                    format!("b={curv} m={m} k={k}"),
                    *v,
                    0.0,
                    if strict { 0.0 } else { 1e-9 },
                    passed,
                );
            }
        }
    }
    Ok(())
}

fn intrinsic(b: &mut Battery) -> Result<()> {
    let h1 = ModelSpace::space_form(2, -1.0)?;
    let flat = ModelSpace::space_form(2, 0.0)?;
    let h4 = ModelSpace::space_form(2, -4.0)?;
    for r in [0.5, 1.0, 2.0] {
        for (other, dir, name) in [(&flat, Direction::Le, "<= Q0"), (&h4, Direction::Ge, ">= Q-4")] {
            let v = compare_intrinsic(&h1, other, r, 5, dir)?;
            let min = v.iter().map(|x| x.margin).fold(f64::INFINITY, f64::min);
            b.record(
                "intrinsic",
                format!("Q-1 {name} R={r}"),
                min,
                0.0,
                0.0,
                v.iter().all(|x| x.holds && x.strict),
            );
        }
    }
    Ok(())
}

fn monte_carlo(b: &mut Battery, a: &SuiteArgs) -> Result<()> {
    for curv in [0.0, -1.0] {
        let model = ModelSpace::space_form(2, curv)?;
        let mut cfg = DiffusionConfig::new(model.clone(), 1.0);
        cfg.dt = a.dt;
        cfg.paths = a.paths;
        cfg.seed = a.seed;
        let profiles = solve_hierarchy(&model, 1.0, 2, DEFAULT_TOL)?;
        let cmp = compare_to_quadrature(&cfg, &profiles)?;
        for row in cmp.rows.iter().filter(|r| r.k >= 1) {
            let z = row.z.unwrap_or(f64::NAN);
            b.record(
                "monte-carlo",
                format!("Q{curv} k={} z", row.k),
                z,
                0.0,
                3.0,
                z.abs() <= 3.0,
            );
        }
    }
    Ok(())
}

fn mesh(b: &mut Battery) -> Result<()> {
    let errors = [0.1, 0.05]
        .iter()
        .map(|&h| flat_disk_error(h, 1.0, 1, 1e-12))
        .collect::<Result<Vec<_>>>()?;
    let rate = (errors[0] / errors[1]).log2();
    b.record(
        "mesh-disk",
        "error at h=0.05".into(),
        errors[1],
        0.0,
        0.02,
        errors[1] <= 0.02,
    );
    b.record("mesh-disk", "refinement rate".into(), rate, 1.7, 0.0, rate >= 1.7);
    let r = verify_mesh(&disk(1.25, 30)?, 1.0, 1, 1e-12, Some(0.0))?;
    b.relative("mesh-disk", "A0 rings=30".into(), r.mesh_spectrum[0], 0.5, 0.02);
    for radius in [0.6, 1.0] {
        let r = verify_mesh(&catenoid(1.6, 60)?, radius, 3, 1e-12, None)?;
        let min = r.verdicts.iter().map(|v| v.margin).fold(f64::INFINITY, f64::min);
        b.record(
            "mesh-catenoid",
            format!("R={radius} k<=3"),
            min,
            0.0,
            r.mesh_tol,
            r.all_hold,
        );
    }
    Ok(())
}

pub fn run(a: &SuiteArgs) -> Result<Outcome> {
    let mut b = Battery {
        table: Table::new(&["criterion", "check", "value", "reference", "tolerance", "passed"]),
        failed: 0,
    };
    closed_forms(&mut b)?;
    divergence(&mut b)?;
    comparison(&mut b)?;
    balance(&mut b)?;
    intrinsic(&mut b)?;
    if !a.skip_mc {
        monte_carlo(&mut b, a)?;
    }
    mesh(&mut b)?;
    let checks = b.table.rows.len();
    eprintln!("suite: {} of {checks} checks passed", checks - b.failed);
    let report = envelope(
        "suite",
        json!({"paths": a.paths, "dt": a.dt, "seed": a.seed, "skip_mc": a.skip_mc}),
        json!({"checks": checks, "failed": b.failed, "rows": b.table.rows}),
    );
    Ok(Outcome {
        ok: b.failed == 0,
        table: b.table,
        report,
        default_format: Format::Csv,
    })
}
