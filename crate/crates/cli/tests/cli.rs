//! End-to-end tests of the `mep` binary: exit codes, file outputs, and
//! agreement between subcommands.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn mep() -> Command {
    Command::new(env!("CARGO_BIN_EXE_mep"))
}

fn scenario(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("../../scenarios")
        .join(name)
        .canonicalize()
        .expect("fixture exists")
}

fn stdout_of(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).expect("utf8 stdout")
}

fn stderr_of(out: &Output) -> String {
    String::from_utf8(out.stderr.clone()).expect("utf8 stderr")
}

/// Parses `name = value` from a subcommand's line-oriented stdout.
fn line_value(stdout: &str, name: &str) -> f64 {
    let prefix = format!("{name} = ");
    stdout
        .lines()
        .find_map(|l| l.strip_prefix(&prefix))
        .unwrap_or_else(|| panic!("no `{name}` line in:\n{stdout}"))
        .parse()
        .expect("numeric value")
}

fn first_path_record(out_dir: &Path) -> toml::Value {
    let text = fs::read_to_string(out_dir.join("result.toml")).expect("result.toml");
    let doc: toml::Table = text.parse().expect("valid TOML");
    doc["paths"][0].clone()
}

#[test]
fn solve_writes_outputs_and_reruns_byte_identically() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    for dir in [a.path(), b.path()] {
        let out = mep()
            .args(["solve"])
            .arg(scenario("bench/bench_small.toml"))
            .arg("--out")
            .arg(dir)
            .output()
            .unwrap();
        assert!(out.status.success(), "{}", stderr_of(&out));
    }
    for name in ["field.csv", "grid.csv", "path_0.csv"] {
        let left = fs::read(a.path().join(name)).unwrap();
        let right = fs::read(b.path().join(name)).unwrap();
        assert!(!left.is_empty(), "{name} empty");
        assert_eq!(left, right, "{name} differs between identical runs");
    }
    let field = fs::read_to_string(a.path().join("field.csv")).unwrap();
    assert_eq!(field.lines().next(), Some("x,y,vbar,V_scaled"));
    let grid = fs::read_to_string(a.path().join("grid.csv")).unwrap();
    assert_eq!(grid.lines().next(), Some("x,y,class"));
    let path = fs::read_to_string(a.path().join("path_0.csv")).unwrap();
    assert_eq!(path.lines().next(), Some("t,x,y"));
    assert!(a.path().join("result.toml").exists());
}

#[test]
fn eval_reproduces_the_solve_report() {
    let dir = tempfile::tempdir().unwrap();
    let out = mep()
        .args(["solve"])
        .arg(scenario("bench/bench_small.toml"))
        .arg("--out")
        .arg(dir.path())
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", stderr_of(&out));
    let record = first_path_record(dir.path());
    let want = record["exposure"].as_float().unwrap();
    let want_scaled = record["exposure_scaled"].as_float().unwrap();

    let out = mep()
        .args(["eval"])
        .arg(scenario("bench/bench_small.toml"))
        .arg(dir.path().join("path_0.csv"))
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", stderr_of(&out));
    let text = stdout_of(&out);
    let got = line_value(&text, "exposure");
    let got_scaled = line_value(&text, "exposure_scaled");
    assert!((got - want).abs() <= 1e-12 * want.abs(), "{got} vs {want}");
    assert!(
        (got_scaled - want_scaled).abs() <= 1e-12 * want_scaled.abs(),
        "{got_scaled} vs {want_scaled}"
    );
}

#[test]
fn eval_missing_path_file_is_a_validation_error() {
    let out = mep()
        .args(["eval"])
        .arg(scenario("bench/bench_small.toml"))
        .arg("/nonexistent/path.csv")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2), "{}", stderr_of(&out));
}

#[test]
fn unknown_scenario_key_is_a_validation_error() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.toml");
    let mut text = fs::read_to_string(scenario("bench/bench_small.toml")).unwrap();
    text.insert_str(0, "frobnicate = 1\n");
    fs::write(&bad, text).unwrap();
    let out = mep().args(["solve"]).arg(&bad).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert!(
        stderr_of(&out).contains("unknown field"),
        "{}",
        stderr_of(&out)
    );
}

#[test]
fn starved_solver_exits_with_nonconvergence() {
    let dir = tempfile::tempdir().unwrap();
    let starved = dir.path().join("starved.toml");
    let mut text = fs::read_to_string(scenario("bench/bench_small.toml")).unwrap();
    text.push_str("\n[solver]\nmax_outer_iters = 1\n");
    fs::write(&starved, text).unwrap();
    let out = mep()
        .args(["solve"])
        .arg(&starved)
        .arg("--out")
        .arg(dir.path())
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(3), "{}", stderr_of(&out));
    assert!(stderr_of(&out).contains("did not converge"));
}

/// A sensor whose plateau covers the whole domain makes the raw intensity
/// exactly one everywhere, so any path costs exactly its length.
fn unit_corridor(dir: &Path) -> PathBuf {
    let file = dir.join("unit.toml");
    fs::write(
        &file,
        r#"
sources = [[0.0, 5.0]]
goal = [10.0, 5.0]

[domain]
min = [0.0, 0.0]
max = [10.0, 10.0]

[[nodes]]
x = 5.0
y = 5.0
model = "boolean_disk"
params = { radius = 1000.0, delta = 0.0 }
"#,
    )
    .unwrap();
    file
}

#[test]
fn oracle_prices_the_unit_corridor_at_its_length() {
    let dir = tempfile::tempdir().unwrap();
    let out = mep()
        .args(["oracle"])
        .arg(unit_corridor(dir.path()))
        .args(["--h", "0.5"])
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", stderr_of(&out));
    let got = line_value(&stdout_of(&out), "oracle_exposure");
    assert!((got - 10.0).abs() < 1e-9, "{got}");
}

#[test]
fn oracle_richardson_reports_three_levels_and_a_limit() {
    let dir = tempfile::tempdir().unwrap();
    let out = mep()
        .args(["oracle"])
        .arg(unit_corridor(dir.path()))
        .args(["--h", "0.5", "--richardson"])
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", stderr_of(&out));
    let text = stdout_of(&out);
    let levels = text
        .lines()
        .filter(|l| l.starts_with("oracle_exposure[h="))
        .count();
    assert_eq!(levels, 3, "{text}");
    let limit = line_value(&text, "richardson_limit");
    assert!((limit - 10.0).abs() < 1e-9, "{limit}");
}

#[test]
fn grid_writes_vertices_and_triangles() {
    let dir = tempfile::tempdir().unwrap();
    let out_csv = dir.path().join("g.csv");
    let out = mep()
        .args(["grid"])
        .arg(scenario("bench/bench_small.toml"))
        .arg("--out")
        .arg(&out_csv)
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", stderr_of(&out));
    let grid = fs::read_to_string(&out_csv).unwrap();
    assert_eq!(grid.lines().next(), Some("x,y,class"));
    assert!(grid.lines().count() > 10);
    let tris = fs::read_to_string(dir.path().join("g.tris.csv")).unwrap();
    assert_eq!(tris.lines().next(), Some("a,b,c"));
    assert!(tris.lines().count() > 10);
}

#[test]
fn bench_manifest_runs_groups_and_references() {
    let dir = tempfile::tempdir().unwrap();
    let out = mep()
        .args(["bench"])
        .arg(scenario("bench/manifest.toml"))
        .arg("--refs")
        .arg(scenario("bench/refs.csv"))
        .args(["--jobs", "2"])
        .arg("--out")
        .arg(dir.path())
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", stderr_of(&out));
    let records = fs::read_to_string(dir.path().join("records.csv")).unwrap();
    assert_eq!(
        records.lines().next(),
        Some("label,group,exposure,wall_time_s,reference,improvement_pct,error")
    );
    assert_eq!(records.lines().count(), 4, "{records}");
    let summary = fs::read_to_string(dir.path().join("summary.toml")).unwrap();
    assert!(summary.contains("group = \"open\""), "{summary}");
    assert!(summary.contains("group = \"walls\""), "{summary}");
    let text = stdout_of(&out);
    assert!(text.contains("group open: 2 instances, 0 failed"), "{text}");
}

#[test]
fn bench_results_do_not_depend_on_worker_count() {
    let strip_wall_time = |records: &str| -> Vec<String> {
        records
            .lines()
            .map(|l| {
                let cols: Vec<&str> = l.split(',').collect();
                [&cols[..3], &cols[4..]].concat().join(",")
            })
            .collect()
    };
    let serial = tempfile::tempdir().unwrap();
    let out = mep()
        .args(["bench"])
        .arg(scenario("bench/manifest.toml"))
        .args(["--jobs", "1"])
        .arg("--out")
        .arg(serial.path())
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", stderr_of(&out));
    let parallel = tempfile::tempdir().unwrap();
    let out = mep()
        .args(["bench"])
        .arg(scenario("bench/manifest.toml"))
        .arg("--out")
        .arg(parallel.path())
        .env("MEP_JOBS", "3")
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", stderr_of(&out));
    assert_eq!(
        strip_wall_time(&fs::read_to_string(serial.path().join("records.csv")).unwrap()),
        strip_wall_time(&fs::read_to_string(parallel.path().join("records.csv")).unwrap())
    );
}

#[test]
fn empty_field_yields_a_straight_free_path() {
    let dir = tempfile::tempdir().unwrap();
    let out = mep()
        .args(["solve"])
        .arg(scenario("empty_field.toml"))
        .arg("--out")
        .arg(dir.path())
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", stderr_of(&out));
    let record = first_path_record(dir.path());
    assert_eq!(record["exposure"].as_float().unwrap(), 0.0);
    // Only the tiny positivity floor acts: cost ~ floor * length.
    assert!(record["exposure_scaled"].as_float().unwrap() < 5e-8);

    let csv = fs::read_to_string(dir.path().join("path_0.csv")).unwrap();
    let pts: Vec<(f64, f64)> = csv
        .lines()
        .skip(1)
        .map(|l| {
            let cols: Vec<&str> = l.split(',').collect();
            (cols[1].parse().unwrap(), cols[2].parse().unwrap())
        })
        .collect();
    assert_eq!(pts.first(), Some(&(0.0, 5.0)));
    assert_eq!(pts.last(), Some(&(10.0, 5.0)));
    let wobble = pts
        .iter()
        .map(|&(_, y)| (y - 5.0).abs())
        .fold(0.0, f64::max);
    assert!(wobble < 0.5, "path wobble {wobble}");
}
