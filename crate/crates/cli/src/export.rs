//! Plot-ready file emission: CSV tables and atomic writes.
//!
//! All CSVs carry a header row and full-precision decimal floats, so a
//! rewritten file is byte-identical when the data is identical.

use std::fs;
use std::io;
use std::path::Path as FsPath;

use mep_core::geometry::SpatialGrid;
use mep_core::solver::recover_value;
use mep_core::Path as PlannedPath;
use mep_core::Vec2;

use crate::scenario::ScenarioError;

/// Writes `contents` to `path` via a temporary sibling file and rename, so
/// readers never observe a half-written file.
pub fn write_atomic(path: &FsPath, contents: &[u8]) -> io::Result<()> {
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(".tmp");
    let tmp = std::path::PathBuf::from(tmp);
    fs::write(&tmp, contents)?;
    fs::rename(&tmp, path)
}

fn csv_string<F>(fill: F) -> String
where
    F: FnOnce(&mut csv::Writer<Vec<u8>>) -> csv::Result<()>,
{
    let mut w = csv::Writer::from_writer(Vec::new());
    fill(&mut w).expect("in-memory CSV write cannot fail");
    String::from_utf8(w.into_inner().expect("writer flush")).expect("CSV is UTF-8")
}

/// Value field rows: `x,y,vbar,V_scaled` per grid vertex.
pub fn field_csv(grid: &SpatialGrid, vbar: &[f64]) -> String {
    csv_string(|w| {
        w.write_record(["x", "y", "vbar", "V_scaled"])?;
        for (v, &value) in grid.vertices().iter().zip(vbar) {
            w.serialize((v.x, v.y, value, recover_value(value)))?;
        }
        Ok(())
    })
}

/// Grid vertex rows: `x,y,class`.
pub fn grid_csv(grid: &SpatialGrid) -> String {
    csv_string(|w| {
        w.write_record(["x", "y", "class"])?;
        for (v, class) in grid.vertices().iter().zip(grid.classes()) {
            w.serialize((v.x, v.y, class.name()))?;
        }
        Ok(())
    })
}

/// Triangle rows: `a,b,c` vertex indices.
pub fn triangles_csv(grid: &SpatialGrid) -> String {
    csv_string(|w| {
        w.write_record(["a", "b", "c"])?;
        for t in grid.triangles() {
            w.serialize((t[0], t[1], t[2]))?;
        }
        Ok(())
    })
}

/// Path rows: `t,x,y` with `t = i · Δt`.
pub fn path_csv(path: &PlannedPath) -> String {
    csv_string(|w| {
        w.write_record(["t", "x", "y"])?;
        for (i, p) in path.waypoints.iter().enumerate() {
            w.serialize((i as f64 * path.dt, p.x, p.y))?;
        }
        Ok(())
    })
}

/// Reads a `t,x,y` CSV back into a path. The time step is inferred from
/// the first two rows (1.0 for single-waypoint paths).
pub fn read_path_csv(path: &FsPath) -> Result<PlannedPath, ScenarioError> {
    let text = fs::read_to_string(path).map_err(|source| ScenarioError::Io {
        path: path.display().to_string(),
        source,
    })?;
    let mut reader = csv::Reader::from_reader(text.as_bytes());
    let mut times = Vec::new();
    let mut waypoints = Vec::new();
    for (i, row) in reader.deserialize::<(f64, f64, f64)>().enumerate() {
        let (t, x, y) =
            row.map_err(|e| ScenarioError::Parse(format!("path row {}: {e}", i + 1)))?;
        times.push(t);
        waypoints.push(Vec2::new(x, y));
    }
    if waypoints.is_empty() {
        return Err(ScenarioError::Validation("path file has no waypoints".into()));
    }
    let dt = if times.len() >= 2 {
        let dt = times[1] - times[0];
        if !(dt.is_finite() && dt > 0.0) {
            return Err(ScenarioError::Validation(format!(
                "path time column must increase, got dt = {dt}"
            )));
        }
        dt
    } else {
        1.0
    };
    Ok(PlannedPath { waypoints, dt })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn path_csv_roundtrip() {
        let path = PlannedPath {
            waypoints: vec![
                Vec2::new(0.1, 0.2),
                Vec2::new(1.0 / 3.0, 2.0f64.sqrt()),
                Vec2::new(5.0, -1.25),
            ],
            dt: 0.1,
        };
        let text = path_csv(&path);
        let dir = tempfile::tempdir().unwrap();
        let file = dir.path().join("p.csv");
        write_atomic(&file, text.as_bytes()).unwrap();
        let back = read_path_csv(&file).unwrap();
        assert_eq!(back.waypoints, path.waypoints);
        assert!((back.dt - path.dt).abs() < 1e-15);
        // No stray temporary remains after an atomic write.
        assert!(!dir.path().join("p.csv.tmp").exists());
    }

    #[test]
    fn csv_headers_are_stable() {
        let path = PlannedPath {
            waypoints: vec![Vec2::new(0.0, 0.0)],
            dt: 0.5,
        };
        assert!(path_csv(&path).starts_with("t,x,y\n"));
    }
}
