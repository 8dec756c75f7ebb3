use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use exitspec_cli::report::{read_report, Report};

fn exitspec(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_exitspec"))
        .args(args)
        .env_remove("EXITSPEC_THREADS")
        .output()
        .unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

fn path_str(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn column(text: &str, name: &str) -> Vec<f64> {
    match exitspec_cli::report::parse_report(text).unwrap() {
        r @ Report::Csv { .. } => r.column(name).unwrap(),
        other => panic!("{other:?}"),
    }
}

#[test]
fn hyperbolic_plane_first_moment() {
    let o = exitspec(&["spectrum", "--b", "-1", "--R", "1", "--K", "0"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let a = column(&stdout(&o), "A_hat_k");
    assert!((a[0] - 0.5f64.tanh()).abs() < 1e-10);
}

#[test]
fn euclidean_spectrum_at_order_zero() {
    let o = exitspec(&["spectrum", "--b", "0", "--R", "1", "--K", "0", "--format", "json"]);
    assert_eq!(code(&o), 0);
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["schema_version"], "1");
    assert!((v["results"]["A_hat"][0].as_f64().unwrap() - 0.5).abs() < 1e-12);
    let vol = v["results"]["A_hat_volume_route"][0].as_f64().unwrap();
    assert!((vol - 0.5).abs() < 1e-10);
}

#[test]
fn custom_warping_matches_space_form() {
    let o = exitspec(&["spectrum", "--w", "sinh(r)", "--R", "1", "--K", "2"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let custom = column(&stdout(&o), "A_hat_k");
    let o = exitspec(&["spectrum", "--b", "-1", "--R", "1", "--K", "2"]);
    let space_form = column(&stdout(&o), "A_hat_k");
    for (a, b) in custom.iter().zip(&space_form) {
        assert!((a - b).abs() < 1e-9 * b, "{a} {b}");
    }
}

#[test]
fn intrinsic_comparison_passes() {
    let o = exitspec(&[
        "intrinsic",
        "--N-b",
        "-1",
        "--bound-b",
        "0",
        "--R",
        "1",
        "--format",
        "json",
    ]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["results"]["verdict"], "PASS");
}

#[test]
fn exit_codes() {
    // curvature ordered the wrong way
    assert_eq!(
        code(&exitspec(&["intrinsic", "--N-b", "0", "--bound-b", "-1", "--R", "1"])),
        1
    );
    // mean-convex bound that breaks balance
    let o = exitspec(&["balance", "--b", "0", "--h", "0.2", "--R", "1"]);
    assert_eq!(code(&o), 1);
    assert!(stderr(&o).contains("not balanced"));
    assert_eq!(code(&exitspec(&["spectrum", "--b", "0", "--R", "-1"])), 2);
    assert_eq!(code(&exitspec(&["spectrum", "--R", "1"])), 2);
    assert_eq!(code(&exitspec(&["spectrum", "--b", "0", "--w", "r", "--R", "1"])), 2);
    assert_eq!(code(&exitspec(&["no-such-command"])), 2);
    assert_eq!(code(&exitspec(&["--help"])), 0);
    // a budget of one step cannot reach the boundary
    let o = exitspec(&[
        "simulate",
        "--b",
        "0",
        "--R",
        "1",
        "--paths",
        "10",
        "--step-budget",
        "1",
    ]);
    assert_eq!(code(&o), 3, "{}", stderr(&o));
}

#[test]
fn parse_errors_point_at_the_column() {
    let o = exitspec(&["spectrum", "--w", "sinh(r", "--R", "1"]);
    assert_eq!(code(&o), 2);
    let err = stderr(&o);
    assert!(err.contains("sinh(r\n") && err.contains('^'), "{err}");
}

#[test]
fn compare_space_reduces_to_base_model() {
    let o = exitspec(&[
        "compare-space",
        "--b",
        "-1",
        "--R",
        "1",
        "--grid",
        "16",
        "--format",
        "json",
    ]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    let r = &v["results"];
    assert!((r["stretched_radius"].as_f64().unwrap() - 1.0).abs() < 1e-12);
    assert_eq!(r["balanced"], true);
    let a0 = r["bound_spectrum"]["A_hat"][0].as_f64().unwrap();
    assert!((a0 - 0.5f64.tanh()).abs() < 1e-9);

    let o = exitspec(&["compare-space", "--b", "0", "--h", "0.2", "--R", "1", "--grid", "8"]);
    assert_eq!(code(&o), 1);
    assert_eq!(column(&stdout(&o), "lambda").len(), 8);
}

#[test]
fn config_values_yield_to_flags() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.cfg");
    std::fs::write(&cfg, "b = -1\n[spectrum]\nR = 2\nK = 1\n").unwrap();
    let o = exitspec(&["spectrum", "--config", path_str(&cfg)]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let a = column(&stdout(&o), "A_hat_k");
    assert_eq!(a.len(), 2);
    assert!((a[0] - 1f64.tanh()).abs() < 1e-10);

    let o = exitspec(&["spectrum", "--config", path_str(&cfg), "--R", "1", "--b", "0"]);
    let a = column(&stdout(&o), "A_hat_k");
    assert!((a[0] - 0.5).abs() < 1e-12);

    std::fs::write(&cfg, "[spectrum]\nbogus = 1\n").unwrap();
    assert_eq!(
        code(&exitspec(&[
            "spectrum",
            "--config",
            path_str(&cfg),
            "--b",
            "0",
            "--R",
            "1"
        ])),
        2
    );
}

fn simulate_to(dir: &Path, name: &str, threads: Option<&str>) -> PathBuf {
    let out = dir.join(name);
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_exitspec"));
    cmd.args([
        "simulate", "--b", "0", "--R", "1", "--dt", "1e-3", "--paths", "2000", "--seed", "7", "--out",
    ])
    .arg(&out);
    match threads {
        Some(t) => cmd.env("EXITSPEC_THREADS", t),
        None => cmd.env_remove("EXITSPEC_THREADS"),
    };
    let o = cmd.output().unwrap();
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    out
}

#[test]
fn simulation_is_reproducible_across_thread_counts() {
    let dir = tempfile::tempdir().unwrap();
    let a = std::fs::read(simulate_to(dir.path(), "a.csv", Some("1"))).unwrap();
    let b = std::fs::read(simulate_to(dir.path(), "b.csv", Some("4"))).unwrap();
    let c = std::fs::read(simulate_to(dir.path(), "c.csv", None)).unwrap();
    assert_eq!(a, b);
    assert_eq!(a, c);
    let text = String::from_utf8(a).unwrap();
    assert_eq!(column(&text, "k"), vec![0.0, 1.0, 2.0]);
    let lines: Vec<&str> = text.lines().collect();
    assert!(lines[1].ends_with(','), "k = 0 has no z: {}", lines[1]);
    for z in column(&text, "z").iter().skip(1) {
        assert!(z.abs() < 4.0, "{z}");
    }

    let bad = Command::new(env!("CARGO_BIN_EXE_exitspec"))
        .args(["spectrum", "--b", "0", "--R", "1"])
        .env("EXITSPEC_THREADS", "zero")
        .output()
        .unwrap();
    assert_eq!(code(&bad), 2);
}

#[test]
fn reports_round_trip_through_the_reader() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("s.csv");
    let json = dir.path().join("s.json");
    let o = exitspec(&[
        "spectrum",
        "--b",
        "-4",
        "--m",
        "3",
        "--R",
        "0.7",
        "--K",
        "3",
        "--out",
        path_str(&csv),
        "--json",
        path_str(&json),
    ]);
    assert_eq!(code(&o), 0);
    assert!(o.stdout.is_empty());
    let Report::Csv { kind, table } = read_report(&csv).unwrap() else {
        panic!()
    };
    assert_eq!(kind, "spectrum");
    assert_eq!(table.rows.len(), 4);
    let Report::Json { command, value } = read_report(&json).unwrap() else {
        panic!()
    };
    assert_eq!(command, "spectrum");
    let from_csv = read_report(&csv).unwrap().column("A_hat_k").unwrap();
    for (k, a) in from_csv.iter().enumerate() {
        assert_eq!(value["results"]["A_hat"][k].as_f64().unwrap(), *a);
    }
    let o = exitspec(&["read-report", path_str(&csv)]);
    assert_eq!(code(&o), 0);
    assert!(stdout(&o).contains("spectrum CSV report, 4 row(s)"));

    std::fs::write(&csv, "what,is,this\n1,2,3\n").unwrap();
    assert_eq!(code(&exitspec(&["read-report", path_str(&csv)])), 2);
}

#[test]
fn mesh_verify_on_generated_and_loaded_meshes() {
    let o = exitspec(&[
        "mesh-verify",
        "--generate",
        "helicoid:extent=1.6,pitch=1,half=24",
        "--R",
        "1",
        "--K",
        "2",
    ]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["results"]["all_hold"], true);
    assert_eq!(v["results"]["quality"]["euler_characteristic"], 1);

    let dir = tempfile::tempdir().unwrap();
    let off = dir.path().join("quad.off");
    std::fs::write(
        &off,
        "OFF\n5 4 0\n0 0 0\n1 0 0\n0 1 0\n-1 0 0\n0 -1 0\n3 0 1 2\n3 0 2 3\n3 0 3 4\n3 0 4 1\n",
    )
    .unwrap();
    let o = exitspec(&[
        "mesh-verify",
        "--mesh",
        path_str(&off),
        "--pole-point",
        "0,0,0",
        "--R",
        "0.5",
        "--K",
        "1",
        "--mesh-tol",
        "1",
    ]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));

    // the ball reaches the edge of the mesh
    let o = exitspec(&["mesh-verify", "--mesh", path_str(&off), "--R", "2"]);
    assert_eq!(code(&o), 2);
}

#[test]
fn suite_passes_without_monte_carlo() {
    let o = exitspec(&["suite", "--skip-mc"]);
    assert_eq!(code(&o), 0, "{}", stdout(&o));
    let passed = column(&stdout(&o), "value").len();
    assert!(passed > 50);
    assert!(!stdout(&o).contains(",false"));
}
