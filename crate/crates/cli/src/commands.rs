use std::io::Write;
use std::sync::Arc;

use exitspec::comparison::{
    balance_check, build_comparison_space, compare_intrinsic, lemma_paren_check, log_grid, spectrum_bound,
    BoundingFunctions, ComparisonSpace, Constellation, Direction, Side,
};
use exitspec::diffusion::{compare_to_quadrature, sample_exit_moments, DiffusionConfig};
use exitspec::expr::{caret_diagnostic, parse_radial_expression};
use exitspec::mesh::{load_mesh, verify_mesh, Generator, MeshFormat, PoleSelector, SurfaceMesh};
use exitspec::radial::SharedRadial;
use exitspec::spectrum::DEFAULT_MAX_ORDER;
use exitspec::{solve_hierarchy, space_form_warping, Error, ModelSpace, Result, WarpingFunction};
use serde_json::{json, Value};

use crate::args::*;
use crate::report::{fmt17, json_bytes, read_report, write_atomic, Report, Table, SCHEMA_VERSION};

/// What a command produced: the tabular output, the JSON report, and
/// whether the checked statement held.
pub struct Outcome {
    pub table: Table,
    pub report: Value,
    pub default_format: Format,
    pub ok: bool,
}

pub fn expression(flag: &str, text: &str) -> Result<SharedRadial> {
    parse_radial_expression(text)
        .map(|e| Arc::new(e) as SharedRadial)
        .map_err(|e| match &e {
            Error::Parse { position, .. } => Error::Parse {
                position: *position,
                message: format!("--{flag}:\n{}", caret_diagnostic(text, &e)),
            },
            _ => e,
        })
}

/// A warping function from `--b` or `--w`, and the `b_or_custom` label.
/// A custom `w` lives on `[0, w_max]`, defaulting to `[0, radius]`.
pub fn warping(
    prefix: &str,
    b: Option<f64>,
    w: Option<&str>,
    w_max: Option<f64>,
    radius: f64,
) -> Result<(WarpingFunction, String)> {
    match (b, w) {
        (Some(_), Some(_)) => Err(Error::Usage(format!("give only one of --{prefix}b and --{prefix}w"))),
        (Some(b), None) => Ok((space_form_warping(b), fmt17(b))),
        (None, Some(text)) => {
            let profile = expression(&format!("{prefix}w"), text)?;
            let w = WarpingFunction::custom(profile, w_max.unwrap_or(radius))?;
            Ok((w, text.trim().to_string()))
        }
        (None, None) => Err(Error::Usage(format!("give --{prefix}b or --{prefix}w"))),
    }
}

fn model(args: &ModelArgs, radius: f64) -> Result<(ModelSpace, String)> {
    let (w, label) = warping("", args.b, args.w.as_deref(), args.w_max, radius)?;
    Ok((ModelSpace::new(args.m, w)?, label))
}

fn bounds(args: &BoundArgs) -> Result<BoundingFunctions> {
    let g = expression("g", &args.g)?;
    let h = expression("h", &args.h)?;
    let side = match args.side {
        SideArg::Below => Side::Below,
        SideArg::Above => Side::Above,
    };
    Ok(BoundingFunctions::new(g, h, side))
}

fn check_radius(r: f64) -> Result<()> {
    if r > 0.0 && r.is_finite() {
        Ok(())
    } else {
        Err(Error::Validation(format!("R must be positive, got {r}")))
    }
}

pub fn envelope(command: &str, parameters: Value, results: Value) -> Value {
    json!({
        "schema_version": SCHEMA_VERSION,
        "command": command,
        "parameters": parameters,
        "results": results,
    })
}

pub fn spectrum(a: &SpectrumArgs) -> Result<Outcome> {
    check_radius(a.radius)?;
    if a.max_order > DEFAULT_MAX_ORDER {
        eprintln!(
            "warning: K = {} exceeds {DEFAULT_MAX_ORDER}; check error_estimate in the JSON report",
            a.max_order
        );
    }
    let (model, label) = model(&a.model, a.radius)?;
    let set = solve_hierarchy(&model, a.radius, a.max_order + 1, a.tol)?;
    let spec = set.spectrum();
    let mut table = Table::new(&[
        "model_id",
        "b_or_custom",
        "m",
        "R",
        "k",
        "A_hat_k",
        "A_raw_k",
        "tol",
        "provenance",
    ]);
    let mut volume_route = Vec::new();
    for k in 0..=a.max_order {
        table.push(vec![
            model.warping().id(),
            label.clone(),
            model.dim().to_string(),
            fmt17(a.radius),
            k.to_string(),
            fmt17(spec.values[k]),
            fmt17(spec.raw[k]),
            fmt17(a.tol),
            spec.provenance.as_str().to_string(),
        ]);
        volume_route.push(set.volume_moment(k)?);
    }
    let report = envelope(
        "spectrum",
        json!({"model_id": model.warping().id(), "b_or_custom": label, "m": model.dim(), "R": a.radius, "K": a.max_order, "tol": a.tol}),
        json!({
            "A_hat": &spec.values[..=a.max_order],
            "A_raw": &spec.raw[..=a.max_order],
            "boundary_volume": spec.boundary_volume,
            "provenance": spec.provenance.as_str(),
            "A_hat_volume_route": volume_route,
            "error_estimate": (0..=a.max_order).map(|k| set.error_estimate(k)).collect::<Vec<_>>(),
            "panels": set.panel_count(),
        }),
    );
    Ok(Outcome {
        table,
        report,
        default_format: Format::Csv,
        ok: true,
    })
}

fn space(
    model: &ModelArgs,
    b: &BoundArgs,
    radius: f64,
    tol: f64,
) -> Result<(ComparisonSpace, BoundingFunctions, String)> {
    check_radius(radius)?;
    let (w, label) = warping("", model.b, model.w.as_deref(), model.w_max, radius)?;
    let bounds = bounds(b)?;
    for warning in bounds.warnings() {
        eprintln!("warning: {warning}");
    }
    let cs = build_comparison_space(&w, &bounds, model.m, radius, tol)?;
    Ok((cs, bounds, label))
}

fn space_parameters(model: &ModelArgs, b: &BoundArgs, label: &str, radius: f64) -> Value {
    json!({
        "b_or_custom": label,
        "m": model.m,
        "g": b.g,
        "h": b.h,
        "side": if b.side == SideArg::Below { "below" } else { "above" },
        "R": radius,
    })
}

pub fn compare_space(a: &CompareSpaceArgs) -> Result<Outcome> {
    let (cs, bounds, label) = space(&a.model, &a.bounds, a.radius, a.tol)?;
    let n = a.grid.max(1);
    let mut table = Table::new(&["s", "r", "W", "lambda"]);
    let mut radii = Vec::with_capacity(n);
    for i in 1..=n {
        let r = a.radius * i as f64 / n as f64;
        let s = cs.stretching().forward(r).min(cs.stretched_radius());
        table.push(vec![fmt17(s), fmt17(r), fmt17(cs.warping_at(s)), fmt17(cs.lambda(r))]);
        radii.push(r);
    }
    let balance = balance_check(&cs, false, &log_grid(cs.stretched_radius(), n))?;
    let (w, _) = warping("", a.model.b, a.model.w.as_deref(), a.model.w_max, a.radius)?;
    let con = Constellation::new(a.model.m, a.model.m, &w, &bounds, a.radius, a.tol)?;
    let (bound, ok) = match spectrum_bound(&con, a.max_order) {
        Ok(b) => (
            json!({
                "A_hat": &b.spectrum.values[..=a.max_order],
                "ball_radius": b.ball_radius,
                "direction": b.direction.as_str(),
            }),
            true,
        ),
        Err(Error::Hypothesis(msg)) => {
            eprintln!("hypothesis violation: {msg}");
            (Value::Null, false)
        }
        Err(e) => return Err(e),
    };
    let report = envelope(
        "compare-space",
        space_parameters(&a.model, &a.bounds, &label, a.radius),
        json!({
            "label": cs.label(),
            "stretched_radius": cs.stretched_radius(),
            "lambda_ode_residual": cs.lambda_ode_residual(&radii),
            "balanced": balance.balanced,
            "min_balance_margin": balance.min_margin,
            "bound_spectrum": bound,
        }),
    );
    Ok(Outcome {
        table,
        report,
        default_format: Format::Csv,
        ok,
    })
}

pub fn balance(a: &BalanceArgs) -> Result<Outcome> {
    let (cs, _, label) = space(&a.model, &a.bounds, a.radius, a.tol)?;
    let n = a.grid.max(2);
    let report = balance_check(&cs, a.strict, &log_grid(cs.stretched_radius(), n))?;
    let mut table = Table::new(&["s", "margin"]);
    for (s, m) in report.grid.iter().zip(&report.margins) {
        table.push(vec![fmt17(*s), fmt17(*m)]);
    }
    let lemma = if a.lemma_order > 0 {
        let l = lemma_paren_check(&cs, a.lemma_order, &log_grid(cs.radius(), n))?;
        json!({"min": l.min, "per_order": l.per_order, "argmin": l.argmin})
    } else {
        Value::Null
    };
    if !report.balanced {
        eprintln!(
            "hypothesis violation: {} is not {}balanced (min margin {} at s = {})",
            cs.label(),
            if a.strict { "strictly " } else { "" },
            fmt17(report.min_margin),
            fmt17(report.argmin)
        );
    }
    let json = envelope(
        "balance",
        space_parameters(&a.model, &a.bounds, &label, a.radius),
        json!({
            "balanced": report.balanced,
            "strict": report.strict,
            "min_margin": report.min_margin,
            "argmin": report.argmin,
            "min_eta_minus_h": report.min_eta_minus_h,
            "lemma": lemma,
        }),
    );
    Ok(Outcome {
        table,
        report: json,
        default_format: Format::Csv,
        ok: report.balanced,
    })
}

pub fn intrinsic(a: &IntrinsicArgs) -> Result<Outcome> {
    check_radius(a.radius)?;
    let (wn, ln) = warping("N-", a.ambient_b, a.ambient_w.as_deref(), a.ambient_w_max, a.radius)?;
    let (wb, lb) = warping("bound-", a.bound_b, a.bound_w.as_deref(), a.bound_w_max, a.radius)?;
    let ambient = ModelSpace::new(a.m, wn)?;
    let bound = ModelSpace::new(a.m, wb)?;
    let direction = match a.direction {
        DirectionArg::Le => Direction::Le,
        DirectionArg::Ge => Direction::Ge,
    };
    let verdicts = compare_intrinsic(&ambient, &bound, a.radius, a.max_order, direction)?;
    let mut table = Table::new(&["k", "ambient", "bound", "margin", "holds", "strict"]);
    for v in &verdicts {
        table.push(vec![
            v.k.to_string(),
            fmt17(v.ambient),
            fmt17(v.bound),
            fmt17(v.margin),
            v.holds.to_string(),
            v.strict.to_string(),
        ]);
    }
    let ok = verdicts.iter().all(|v| v.holds);
    let report = envelope(
        "intrinsic",
        json!({"ambient": ln, "bound": lb, "m": a.m, "R": a.radius, "K": a.max_order, "direction": direction.as_str()}),
        json!({"verdict": if ok { "PASS" } else { "FAIL" }, "verdicts": verdicts}),
    );
    Ok(Outcome {
        table,
        report,
        default_format: Format::Csv,
        ok,
    })
}

pub fn simulate(a: &SimulateArgs) -> Result<Outcome> {
    check_radius(a.radius)?;
    let (model, label) = model(&a.model, a.radius)?;
    let cfg = DiffusionConfig {
        model: model.clone(),
        radius: a.radius,
        r0: a.r0,
        dt: a.dt,
        paths: a.paths,
        seed: a.seed,
        max_order: a.max_order,
        step_budget: a.step_budget,
    };
    cfg.validate()?;
    let (run, rows) = if a.no_compare {
        (sample_exit_moments(&cfg)?, None)
    } else {
        let profiles = solve_hierarchy(&model, a.radius, a.max_order.max(1), exitspec::spectrum::DEFAULT_TOL)?;
        let cmp = compare_to_quadrature(&cfg, &profiles)?;
        (cmp.run, Some(cmp.rows))
    };
    for w in &run.warnings {
        eprintln!("warning: {w}");
    }
    let mut table = Table::new(&["model_id", "m", "R", "r0", "k", "mc_mean", "std_err", "quad_value", "z"]);
    let opt = |x: Option<f64>| x.map(fmt17).unwrap_or_default();
    let base = |k: usize| {
        vec![
            model.warping().id(),
            model.dim().to_string(),
            fmt17(a.radius),
            fmt17(a.r0),
            k.to_string(),
        ]
    };
    match &rows {
        Some(rows) => {
            for z in rows {
                let mut row = base(z.k);
                row.extend([fmt17(z.mc_mean), fmt17(z.std_err), fmt17(z.quad_value), opt(z.z)]);
                table.push(row);
            }
        }
        None => {
            let mut row = base(0);
            row.extend([fmt17(1.0), fmt17(0.0), String::new(), String::new()]);
            table.push(row);
            for e in &run.estimates {
                let mut row = base(e.k);
                row.extend([fmt17(e.mean), fmt17(e.std_error), String::new(), String::new()]);
                table.push(row);
            }
        }
    }
    let report = envelope(
        "simulate",
        json!({
            "model_id": model.warping().id(), "b_or_custom": label, "m": model.dim(), "R": a.radius, "r0": a.r0,
            "dt": a.dt, "paths": a.paths, "seed": a.seed, "K": a.max_order,
            "step_budget": cfg.effective_step_budget(),
        }),
        json!({
            "estimates": run.estimates,
            "comparison": rows,
            "mean_steps": run.mean_steps,
            "max_steps": run.max_steps,
            "warnings": run.warnings,
        }),
    );
    Ok(Outcome {
        table,
        report,
        default_format: Format::Csv,
        ok: true,
    })
}

fn parse_point(text: &str) -> Result<[f64; 3]> {
    let parts: Vec<f64> = text
        .split(',')
        .map(|t| t.trim().parse::<f64>())
        .collect::<std::result::Result<_, _>>()
        .map_err(|_| Error::Usage(format!("--pole-point expects x,y,z, got '{text}'")))?;
    match parts[..] {
        [x, y, z] => Ok([x, y, z]),
        _ => Err(Error::Usage(format!("--pole-point expects x,y,z, got '{text}'"))),
    }
}

fn surface(a: &MeshVerifyArgs) -> Result<(SurfaceMesh, String)> {
    let pole = match (&a.pole_index, &a.pole_point) {
        (Some(_), Some(_)) => return Err(Error::Usage("give only one of --pole-index and --pole-point".into())),
        (Some(i), None) => Some(PoleSelector::Index(*i)),
        (None, Some(p)) => Some(PoleSelector::Nearest(parse_point(p)?)),
        (None, None) => None,
    };
    let (mesh, source) = match (&a.mesh, &a.generate) {
        (Some(_), Some(_)) => return Err(Error::Usage("give only one of --mesh and --generate".into())),
        (Some(path), None) => {
            let format = match &a.mesh_format {
                Some(f) => {
                    Some(MeshFormat::parse(f).ok_or_else(|| Error::Usage(format!("unknown mesh format '{f}'")))?)
                }
                None => None,
            };
            let loaded = load_mesh(path, format, pole.unwrap_or(PoleSelector::Index(0)))?;
            for w in &loaded.warnings {
                eprintln!("warning: {w}");
            }
            (loaded.mesh, path.display().to_string())
        }
        (None, Some(spec)) => {
            let g = Generator::parse(spec)?;
            let mesh = g.build()?;
            let mesh = match pole {
                Some(p) => mesh.with_pole(p)?,
                None => mesh,
            };
            (mesh, g.to_string())
        }
        (None, None) => return Err(Error::Usage("give --mesh or --generate".into())),
    };
    Ok((mesh, source))
}

pub fn mesh_verify(a: &MeshVerifyArgs) -> Result<Outcome> {
    check_radius(a.radius)?;
    let (mesh, source) = surface(a)?;
    let r = verify_mesh(&mesh, a.radius, a.max_order, a.solver_tol, a.mesh_tol)?;
    for w in &r.quality.warnings {
        eprintln!("warning: {w}");
    }
    let mut table = Table::new(&["k", "mesh_value", "model_value", "bound_with_tol", "margin", "holds"]);
    for v in &r.verdicts {
        table.push(vec![
            v.k.to_string(),
            fmt17(v.mesh_value),
            fmt17(v.model_value),
            fmt17(v.model_value * (1.0 + r.mesh_tol)),
            fmt17(v.margin),
            v.holds.to_string(),
        ]);
    }
    let report = envelope(
        "mesh-verify",
        json!({
            "source": source, "pole": mesh.pole(), "R": a.radius, "K": a.max_order,
            "solver_tol": a.solver_tol, "mesh_tol": a.mesh_tol,
        }),
        serde_json::to_value(&r).map_err(|e| Error::Io(e.to_string()))?,
    );
    Ok(Outcome {
        table,
        report,
        default_format: Format::Json,
        ok: r.all_hold,
    })
}

pub fn read(a: &ReadReportArgs) -> Result<String> {
    Ok(match read_report(&a.path)? {
        Report::Csv { kind, table } => format!(
            "{}: {kind} CSV report, {} row(s), columns {}\n",
            a.path.display(),
            table.rows.len(),
            table.header.join(",")
        ),
        Report::Json { command, .. } => format!(
            "{}: {command} JSON report, schema_version {SCHEMA_VERSION}\n",
            a.path.display()
        ),
    })
}

/// Write the outcome where `output` asks for it.
pub fn emit(out: &OutputArgs, outcome: &Outcome) -> Result<()> {
    let format = out.format.unwrap_or(outcome.default_format);
    let primary = match format {
        Format::Csv => outcome.table.to_csv()?,
        Format::Json => json_bytes(&outcome.report)?,
    };
    match &out.out {
        Some(path) => write_atomic(path, &primary)?,
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout.write_all(&primary)?;
            stdout.flush()?;
        }
    }
    if let Some(path) = &out.json {
        write_atomic(path, &json_bytes(&outcome.report)?)?;
    }
    Ok(())
}
