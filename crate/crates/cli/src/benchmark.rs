//! Manifest-driven benchmark harness.
//!
//! A manifest lists scenario files with labels and optional groups; the
//! harness solves each one, optionally compares exposures against a
//! reference table, and summarizes improvement percentages per group.
//! Instances run concurrently up to a job limit, and per-instance
//! failures are recorded without stopping the run.

use std::collections::HashMap;
use std::fs;
use std::path::Path as FsPath;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::export;
use crate::run::run_solve;
use crate::scenario::{load_scenario, ScenarioError};

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct ManifestDoc {
    #[serde(default)]
    instances: Vec<InstanceDoc>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct InstanceDoc {
    label: String,
    /// Scenario file path, relative to the manifest's directory.
    scenario: String,
    /// Summary group; defaults to the label prefix before the first `/`.
    #[serde(default)]
    group: Option<String>,
}

/// One benchmark row: what ran, what it cost, how it compares.
#[derive(Clone, Debug, Serialize)]
pub struct BenchmarkRecord {
    pub label: String,
    pub group: String,
    pub exposure: Option<f64>,
    pub wall_time_s: f64,
    pub reference: Option<f64>,
    /// `100 · (reference − ours) / reference`; positive means we beat the
    /// reference.
    pub improvement_pct: Option<f64>,
    pub error: Option<String>,
}

#[derive(Clone, Debug, Serialize)]
pub struct GroupSummary {
    pub group: String,
    pub n_instances: usize,
    pub n_failed: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mean_exposure: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mean_improvement_pct: Option<f64>,
    /// Sample standard deviation; absent with fewer than two compared
    /// instances.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub std_improvement_pct: Option<f64>,
}

pub struct BenchmarkReport {
    pub records: Vec<BenchmarkRecord>,
    pub groups: Vec<GroupSummary>,
}

/// Parses a two-column `label,reference` CSV.
fn load_references(path: &FsPath) -> Result<HashMap<String, f64>, ScenarioError> {
    let text = fs::read_to_string(path).map_err(|source| ScenarioError::Io {
        path: path.display().to_string(),
        source,
    })?;
    let mut reader = csv::Reader::from_reader(text.as_bytes());
    let mut refs = HashMap::new();
    for (i, row) in reader.deserialize::<(String, f64)>().enumerate() {
        let (label, value) =
            row.map_err(|e| ScenarioError::Parse(format!("references row {}: {e}", i + 1)))?;
        refs.insert(label, value);
    }
    Ok(refs)
}

fn sanitize(label: &str) -> String {
    label
        .chars()
        .map(|c| if c.is_ascii_alphanumeric() || c == '-' || c == '.' { c } else { '_' })
        .collect()
}

/// Runs every manifest instance (with up to `jobs` in flight), writing
/// per-instance solve outputs under `out_dir/<label>/` and the collected
/// `records.csv` / `summary.toml` into `out_dir`.
pub fn run_benchmark(
    manifest_path: &FsPath,
    refs_path: Option<&FsPath>,
    jobs: usize,
    out_dir: &FsPath,
) -> Result<BenchmarkReport, ScenarioError> {
    let text = fs::read_to_string(manifest_path).map_err(|source| ScenarioError::Io {
        path: manifest_path.display().to_string(),
        source,
    })?;
    let manifest: ManifestDoc =
        toml::from_str(&text).map_err(|e| ScenarioError::Parse(e.to_string()))?;
    let refs = match refs_path {
        Some(p) => load_references(p)?,
        None => HashMap::new(),
    };
    let base = manifest_path.parent().unwrap_or(FsPath::new("."));
    fs::create_dir_all(out_dir).map_err(|source| ScenarioError::Io {
        path: out_dir.display().to_string(),
        source,
    })?;

    let n = manifest.instances.len();
    let records: Mutex<Vec<Option<BenchmarkRecord>>> = Mutex::new(vec![None; n]);
    let next = AtomicUsize::new(0);
    let jobs = jobs.max(1).min(n.max(1));

    std::thread::scope(|scope| {
        for _ in 0..jobs {
            scope.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::Relaxed);
                if i >= n {
                    break;
                }
                let record = run_instance(&manifest.instances[i], base, &refs, out_dir);
                records.lock().expect("no poisoned workers")[i] = Some(record);
            });
        }
    });

    let records: Vec<BenchmarkRecord> = records
        .into_inner()
        .expect("workers finished")
        .into_iter()
        .map(|r| r.expect("every instance claimed"))
        .collect();
    let groups = summarize(&records);

    let mut csv_writer = csv::Writer::from_writer(Vec::new());
    for record in &records {
        csv_writer.serialize(record).expect("record serializes");
    }
    let csv_bytes = csv_writer.into_inner().expect("flush");
    let io_err = |path: &FsPath, source: std::io::Error| ScenarioError::Io {
        path: path.display().to_string(),
        source,
    };
    let records_path = out_dir.join("records.csv");
    export::write_atomic(&records_path, &csv_bytes).map_err(|e| io_err(&records_path, e))?;

    #[derive(Serialize)]
    struct SummaryOut<'a> {
        groups: &'a [GroupSummary],
    }
    let summary_path = out_dir.join("summary.toml");
    let summary = toml::to_string_pretty(&SummaryOut { groups: &groups })
        .expect("summary serializes");
    export::write_atomic(&summary_path, summary.as_bytes())
        .map_err(|e| io_err(&summary_path, e))?;

    Ok(BenchmarkReport { records, groups })
}

fn run_instance(
    instance: &InstanceDoc,
    base: &FsPath,
    refs: &HashMap<String, f64>,
    out_dir: &FsPath,
) -> BenchmarkRecord {
    let group = instance.group.clone().unwrap_or_else(|| {
        instance
            .label
            .split_once('/')
            .map(|(g, _)| g.to_string())
            .unwrap_or_else(|| "all".to_string())
    });
    let reference = refs.get(&instance.label).copied();
    let start = Instant::now();
    let outcome = load_scenario(&base.join(&instance.scenario))
        .map_err(|e| e.to_string())
        .and_then(|scenario| {
            run_solve(&scenario, &out_dir.join(sanitize(&instance.label)))
                .map_err(|e| e.to_string())
        })
        .and_then(|summary| {
            summary
                .paths
                .first()
                .and_then(|p| p.exposure)
                .ok_or_else(|| {
                    summary
                        .paths
                        .first()
                        .map(|p| p.status.clone())
                        .unwrap_or_else(|| "scenario has no sources".to_string())
                })
        });
    let wall_time_s = start.elapsed().as_secs_f64();
    match outcome {
        Ok(exposure) => BenchmarkRecord {
            label: instance.label.clone(),
            group,
            exposure: Some(exposure),
            wall_time_s,
            reference,
            improvement_pct: reference.map(|r| 100.0 * (r - exposure) / r),
            error: None,
        },
        Err(error) => BenchmarkRecord {
            label: instance.label.clone(),
            group,
            exposure: None,
            wall_time_s,
            reference,
            improvement_pct: None,
            error: Some(error),
        },
    }
}

fn summarize(records: &[BenchmarkRecord]) -> Vec<GroupSummary> {
    let mut order: Vec<&str> = Vec::new();
    for r in records {
        if !order.contains(&r.group.as_str()) {
            order.push(&r.group);
        }
    }
    order
        .into_iter()
        .map(|group| {
            let members: Vec<&BenchmarkRecord> =
                records.iter().filter(|r| r.group == group).collect();
            let exposures: Vec<f64> = members.iter().filter_map(|r| r.exposure).collect();
            let improvements: Vec<f64> =
                members.iter().filter_map(|r| r.improvement_pct).collect();
            let mean = |xs: &[f64]| xs.iter().sum::<f64>() / xs.len() as f64;
            let mean_improvement = (!improvements.is_empty()).then(|| mean(&improvements));
            let std_improvement = (improvements.len() >= 2).then(|| {
                let m = mean(&improvements);
                (improvements.iter().map(|x| (x - m).powi(2)).sum::<f64>()
                    / (improvements.len() - 1) as f64)
                    .sqrt()
            });
            GroupSummary {
                group: group.to_string(),
                n_instances: members.len(),
                n_failed: members.iter().filter(|r| r.error.is_some()).count(),
                mean_exposure: (!exposures.is_empty()).then(|| mean(&exposures)),
                mean_improvement_pct: mean_improvement,
                std_improvement_pct: std_improvement,
            }
        })
        .collect()
}
