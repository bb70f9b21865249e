//! `mep`: minimal exposure paths through sensor fields.
//!
//! Exit codes: 0 on success, 2 on validation/parse errors, 3 when the
//! solver fails to converge or no path exists.

use std::path::{Path as FsPath, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

use clap::{Parser, Subcommand};

use mep_cli::benchmark::run_benchmark;
use mep_cli::export;
use mep_cli::oracle::{dijkstra_oracle, richardson_limit, OracleError};
use mep_cli::run::{run_solve, RunError, RunSummary};
use mep_cli::scenario::{load_scenario, ScenarioError};
use mep_core::geometry::{sample_grid, triangulate};
use mep_core::path::{evaluate_exposure, evaluate_scaled_exposure};

#[derive(Parser)]
#[command(name = "mep", version, about = "Minimal exposure paths through sensor fields")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve a scenario and write field.csv, grid.csv, path_<i>.csv, result.toml
    Solve {
        scenario: PathBuf,
        /// Output directory (created if missing)
        #[arg(long, default_value = ".")]
        out: PathBuf,
    },
    /// Evaluate the exposure of a stored `t,x,y` path under a scenario's field
    Eval { scenario: PathBuf, path: PathBuf },
    /// Independent lattice shortest-path exposure estimate
    Oracle {
        scenario: PathBuf,
        /// Lattice spacing
        #[arg(long)]
        h: f64,
        /// Also extrapolate the zero-spacing limit from runs at h, h/2, h/4
        #[arg(long)]
        richardson: bool,
    },
    /// Sample and triangulate the grid without solving
    Grid {
        scenario: PathBuf,
        /// Vertex CSV file; triangles land beside it as `<stem>.tris.csv`
        #[arg(long)]
        out: PathBuf,
    },
    /// Run a manifest of scenarios, optionally comparing to a reference table
    Bench {
        manifest: PathBuf,
        /// `label,reference` CSV of exposures to compare against
        #[arg(long)]
        refs: Option<PathBuf>,
        /// Concurrent instances (default: $MEP_JOBS, then 1)
        #[arg(long)]
        jobs: Option<usize>,
        /// Output directory (default: `<manifest dir>/bench_out`)
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

/// CLI-level failure, split by exit code.
enum Failure {
    /// Bad input of any kind: exit 2.
    Validation(String),
    /// The computation itself failed (non-convergence, no path): exit 3.
    NonConvergence(String),
}

impl From<ScenarioError> for Failure {
    fn from(e: ScenarioError) -> Self {
        Failure::Validation(e.to_string())
    }
}

impl From<RunError> for Failure {
    fn from(e: RunError) -> Self {
        match e {
            RunError::NonConvergence(_) => Failure::NonConvergence(e.to_string()),
            _ => Failure::Validation(e.to_string()),
        }
    }
}

impl From<OracleError> for Failure {
    fn from(e: OracleError) -> Self {
        match e {
            OracleError::Unreachable(_) => Failure::NonConvergence(e.to_string()),
            OracleError::Validation(_) => Failure::Validation(e.to_string()),
        }
    }
}

fn main() -> ExitCode {
    match dispatch(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Validation(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::NonConvergence(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(3)
        }
    }
}

fn dispatch(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Command::Solve { scenario, out } => {
            let s = load_scenario(&scenario)?;
            let summary = run_solve(&s, &out)?;
            print!("{}", render_summary(&summary, &out));
            Ok(())
        }
        Command::Eval { scenario, path } => {
            let s = load_scenario(&scenario)?;
            let planned = export::read_path_csv(&path)?;
            println!("waypoints = {}", planned.waypoints.len());
            println!("length = {}", planned.length());
            println!(
                "exposure = {}",
                evaluate_exposure(&s.field, &planned, s.h_eval)
            );
            println!(
                "exposure_scaled = {}",
                evaluate_scaled_exposure(&s.field, &planned, s.h_eval)
            );
            Ok(())
        }
        Command::Oracle {
            scenario,
            h,
            richardson,
        } => {
            let s = load_scenario(&scenario)?;
            if richardson {
                let est = richardson_limit(&s, h)?;
                for (h, cost) in est.hs.iter().zip(est.costs) {
                    println!("oracle_exposure[h={h}] = {cost}");
                }
                println!("richardson_limit = {}", est.limit);
            } else {
                println!("oracle_exposure = {}", dijkstra_oracle(&s, h)?);
            }
            Ok(())
        }
        Command::Grid { scenario, out } => {
            let s = load_scenario(&scenario)?;
            let points = sample_grid(&s.domain, &s.field, s.goal, &s.sources, &s.grid)
                .map_err(|e| Failure::Validation(e.to_string()))?;
            let grid = Arc::new(
                triangulate(&points).map_err(|e| Failure::Validation(e.to_string()))?,
            );
            let write = |path: &FsPath, contents: String| -> Result<(), Failure> {
                export::write_atomic(path, contents.as_bytes()).map_err(|e| {
                    Failure::Validation(format!("cannot write {}: {e}", path.display()))
                })
            };
            write(&out, export::grid_csv(&grid))?;
            let tris = out.with_extension("tris.csv");
            write(&tris, export::triangles_csv(&grid))?;
            println!(
                "grid: {} vertices, {} triangles -> {}, {}",
                grid.len(),
                grid.triangles().len(),
                out.display(),
                tris.display()
            );
            Ok(())
        }
        Command::Bench {
            manifest,
            refs,
            jobs,
            out,
        } => {
            let jobs = jobs
                .or_else(|| std::env::var("MEP_JOBS").ok().and_then(|s| s.parse().ok()))
                .unwrap_or(1);
            let out = out.unwrap_or_else(|| {
                manifest
                    .parent()
                    .unwrap_or(FsPath::new("."))
                    .join("bench_out")
            });
            let report = run_benchmark(&manifest, refs.as_deref(), jobs, &out)?;
            for r in &report.records {
                let exposure = r
                    .exposure
                    .map(|e| e.to_string())
                    .unwrap_or_else(|| format!("FAILED: {}", r.error.as_deref().unwrap_or("?")));
                let vs = match (r.reference, r.improvement_pct) {
                    (Some(reference), Some(pct)) => {
                        format!(" vs {reference} ({pct:+.2}%)")
                    }
                    _ => String::new(),
                };
                println!(
                    "{}: exposure {exposure}{vs} [{:.2} s]",
                    r.label, r.wall_time_s
                );
            }
            for g in &report.groups {
                let imp = match (g.mean_improvement_pct, g.std_improvement_pct) {
                    (Some(mean), Some(std)) => {
                        format!(", improvement {mean:+.2}% (std {std:.2})")
                    }
                    (Some(mean), None) => format!(", improvement {mean:+.2}%"),
                    _ => String::new(),
                };
                println!(
                    "group {}: {} instances, {} failed{imp}",
                    g.group, g.n_instances, g.n_failed
                );
            }
            println!("records -> {}", out.join("records.csv").display());
            Ok(())
        }
    }
}

fn render_summary(summary: &RunSummary, out: &FsPath) -> String {
    use std::fmt::Write;
    let mut text = String::new();
    let run = &summary.run;
    writeln!(
        text,
        "grid: {} vertices, {} triangles ({:.2} s)",
        run.n_vertices, run.n_triangles, run.grid_time_s
    )
    .unwrap();
    writeln!(
        text,
        "solve: {} outer iterations ({:.2} s)",
        run.outer_iterations, run.solve_time_s
    )
    .unwrap();
    for p in &summary.paths {
        match (p.exposure, p.value_at_source) {
            (Some(exposure), Some(value)) => writeln!(
                text,
                "source ({}, {}): exposure {exposure}, source value {value} ({:.2} s)",
                p.source[0], p.source[1], p.extract_time_s
            )
            .unwrap(),
            _ => writeln!(
                text,
                "source ({}, {}): {}",
                p.source[0], p.source[1], p.status
            )
            .unwrap(),
        }
    }
    writeln!(text, "results -> {}", out.join("result.toml").display()).unwrap();
    text
}
