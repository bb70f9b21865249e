//! The solve pipeline: grid construction, one value-function solve, and a
//! path per source, plus file emission for plotting.

use std::path::Path as FsPath;
use std::sync::Arc;
use std::time::Instant;

use serde::Serialize;
use thiserror::Error;

use mep_core::geometry::{sample_grid, triangulate};
use mep_core::path::{
    evaluate_exposure, evaluate_scaled_exposure, extract_path, local_optimize,
};
use mep_core::solver::{solve, SolverError, ValueField};
use mep_core::{Path as PlannedPath, Vec2};

use crate::export;
use crate::scenario::Scenario;

#[derive(Debug, Error)]
pub enum RunError {
    #[error("invalid scenario: {0}")]
    Validation(String),
    #[error(transparent)]
    NonConvergence(SolverError),
    #[error("cannot write {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

/// Everything a solve produces before any file is written.
pub struct PipelineResult {
    pub value: ValueField,
    pub outcomes: Vec<SourceOutcome>,
    pub grid_time_s: f64,
    pub solve_time_s: f64,
}

/// Per-source planning outcome. Failures are recorded, not fatal: other
/// sources still plan against the shared value function.
pub struct SourceOutcome {
    pub source: Vec2,
    pub outcome: Result<PlannedSource, String>,
    pub extract_time_s: f64,
}

pub struct PlannedSource {
    pub path: PlannedPath,
    /// Exposure of the extracted path before local smoothing.
    pub exposure_initial: f64,
    /// Exposure after local smoothing; never larger than the initial one.
    pub exposure: f64,
    /// Same integral over the rescaled intensity, comparable to
    /// `value_at_source`.
    pub exposure_scaled: f64,
    /// Recovered (unscaled-time, rescaled-intensity) value at the source.
    pub value_at_source: f64,
}

/// Builds the grid, solves the value function once, and extracts an
/// optimized path per source.
pub fn run_pipeline(scenario: &Scenario) -> Result<PipelineResult, RunError> {
    let grid_start = Instant::now();
    let points = sample_grid(
        &scenario.domain,
        &scenario.field,
        scenario.goal,
        &scenario.sources,
        &scenario.grid,
    )
    .map_err(|e| RunError::Validation(e.to_string()))?;
    let grid = Arc::new(triangulate(&points).map_err(|e| RunError::Validation(e.to_string()))?);
    let grid_time_s = grid_start.elapsed().as_secs_f64();

    let solve_start = Instant::now();
    let value = solve(
        &scenario.domain,
        &scenario.field,
        scenario.goal,
        Arc::clone(&grid),
        &scenario.solver,
    )
    .map_err(|e| match e {
        SolverError::NonConvergence { .. } => RunError::NonConvergence(e),
        other => RunError::Validation(other.to_string()),
    })?;
    let solve_time_s = solve_start.elapsed().as_secs_f64();

    let outcomes = scenario
        .sources
        .iter()
        .map(|&source| plan_source(scenario, &value, source))
        .collect();

    Ok(PipelineResult {
        value,
        outcomes,
        grid_time_s,
        solve_time_s,
    })
}

fn plan_source(scenario: &Scenario, value: &ValueField, source: Vec2) -> SourceOutcome {
    let start = Instant::now();
    let outcome = extract_path(
        value,
        &scenario.field,
        &scenario.domain,
        source,
        scenario.goal,
        &scenario.solver,
    )
    .map(|path| {
        let exposure_initial = evaluate_exposure(&scenario.field, &path, scenario.h_eval);
        let smoothed = local_optimize(
            &scenario.field,
            &scenario.domain,
            &path,
            &scenario.solver,
            scenario.h_eval,
            scenario.grid.seed,
        );
        PlannedSource {
            exposure_initial,
            exposure: evaluate_exposure(&scenario.field, &smoothed, scenario.h_eval),
            exposure_scaled: evaluate_scaled_exposure(&scenario.field, &smoothed, scenario.h_eval),
            value_at_source: value.recovered_value_at(source),
            path: smoothed,
        }
    })
    .map_err(|e| e.to_string());
    SourceOutcome {
        source,
        outcome,
        extract_time_s: start.elapsed().as_secs_f64(),
    }
}

// ---------------------------------------------------------------------------
// Summary document
// ---------------------------------------------------------------------------

#[derive(Debug, Serialize)]
pub struct RunSummary {
    pub run: RunStats,
    pub paths: Vec<PathRecord>,
}

#[derive(Debug, Serialize)]
pub struct RunStats {
    pub n_vertices: usize,
    pub n_triangles: usize,
    /// Number of value-function solves; always 1 regardless of the number
    /// of sources, which is the point of solving a goal-anchored field.
    pub n_solves: usize,
    pub outer_iterations: usize,
    pub grid_time_s: f64,
    pub solve_time_s: f64,
    pub total_time_s: f64,
}

#[derive(Debug, Serialize)]
pub struct PathRecord {
    pub source: [f64; 2],
    pub status: String,
    pub extract_time_s: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub file: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub exposure: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub exposure_initial: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub exposure_scaled: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub value_at_source: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n_waypoints: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub length: Option<f64>,
}

impl RunSummary {
    pub fn from_pipeline(result: &PipelineResult, total_time_s: f64) -> Self {
        let grid = result.value.grid();
        RunSummary {
            run: RunStats {
                n_vertices: grid.len(),
                n_triangles: grid.triangles().len(),
                n_solves: 1,
                outer_iterations: result.value.outer_iterations(),
                grid_time_s: result.grid_time_s,
                solve_time_s: result.solve_time_s,
                total_time_s,
            },
            paths: result
                .outcomes
                .iter()
                .enumerate()
                .map(|(i, o)| match &o.outcome {
                    Ok(planned) => PathRecord {
                        source: o.source.into(),
                        status: "ok".into(),
                        extract_time_s: o.extract_time_s,
                        file: Some(format!("path_{i}.csv")),
                        exposure: Some(planned.exposure),
                        exposure_initial: Some(planned.exposure_initial),
                        exposure_scaled: Some(planned.exposure_scaled),
                        value_at_source: Some(planned.value_at_source),
                        n_waypoints: Some(planned.path.waypoints.len()),
                        length: Some(planned.path.length()),
                    },
                    Err(msg) => PathRecord {
                        source: o.source.into(),
                        status: msg.clone(),
                        extract_time_s: o.extract_time_s,
                        file: None,
                        exposure: None,
                        exposure_initial: None,
                        exposure_scaled: None,
                        value_at_source: None,
                        n_waypoints: None,
                        length: None,
                    },
                })
                .collect(),
        }
    }
}

/// Runs the pipeline and writes `field.csv`, `grid.csv`, one
/// `path_<i>.csv` per successfully planned source, and `result.toml` into
/// `out_dir` (created if missing).
pub fn run_solve(scenario: &Scenario, out_dir: &FsPath) -> Result<RunSummary, RunError> {
    let total_start = Instant::now();
    let result = run_pipeline(scenario)?;

    std::fs::create_dir_all(out_dir).map_err(|source| RunError::Io {
        path: out_dir.display().to_string(),
        source,
    })?;
    let write = |name: String, contents: String| -> Result<(), RunError> {
        let path = out_dir.join(&name);
        export::write_atomic(&path, contents.as_bytes()).map_err(|source| RunError::Io {
            path: path.display().to_string(),
            source,
        })
    };

    let grid = result.value.grid();
    write("field.csv".into(), export::field_csv(grid, result.value.vbar()))?;
    write("grid.csv".into(), export::grid_csv(grid))?;
    for (i, o) in result.outcomes.iter().enumerate() {
        if let Ok(planned) = &o.outcome {
            write(format!("path_{i}.csv"), export::path_csv(&planned.path))?;
        }
    }

    let summary = RunSummary::from_pipeline(&result, total_start.elapsed().as_secs_f64());
    let doc = toml::to_string_pretty(&summary).expect("summary serialization cannot fail");
    write("result.toml".into(), doc)?;
    Ok(summary)
}
