//! Point-set CSV input and output with precise error positions.
//!
//! One point per row, comma-separated coordinates, optional header line.
//! The metric tag travels in a sidecar `<file>.meta.json`; absent a sidecar,
//! points are taken as l1.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use hyperspec::{Metric, PointSet};

#[derive(Debug, Serialize, Deserialize)]
struct Sidecar {
    metric: Metric,
}

fn sidecar_path(csv: &Path) -> PathBuf {
    let mut name = csv.file_name().unwrap_or_default().to_os_string();
    name.push(".meta.json");
    csv.with_file_name(name)
}

/// Parse a CSV file of points. Malformed numbers are reported with
/// 1-indexed line and column; a fully non-numeric first row is treated as a
/// header and skipped.
pub fn read_points(path: &Path) -> Result<PointSet, String> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| format!("cannot read {}: {e}", path.display()))?;
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for (line_idx, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let tokens: Vec<&str> = line.split(',').map(str::trim).collect();
        let parsed: Vec<Result<f64, _>> = tokens.iter().map(|t| t.parse::<f64>()).collect();
        if rows.is_empty() && line_idx == 0 && parsed.iter().all(|p| p.is_err()) {
            continue; // header row
        }
        let mut row = Vec::with_capacity(parsed.len());
        for (col_idx, value) in parsed.into_iter().enumerate() {
            match value {
                Ok(v) => row.push(v),
                Err(_) => {
                    return Err(format!(
                        "{}: line {}, column {}: expected a number, found {:?}",
                        path.display(),
                        line_idx + 1,
                        col_idx + 1,
                        tokens[col_idx]
                    ));
                }
            }
        }
        rows.push(row);
    }
    if rows.is_empty() {
        return Err(format!("{}: no points found", path.display()));
    }

    let metric = match std::fs::read_to_string(sidecar_path(path)) {
        Ok(meta) => {
            let sidecar: Sidecar = serde_json::from_str(&meta)
                .map_err(|e| format!("{}: invalid sidecar: {e}", path.display()))?;
            sidecar.metric
        }
        Err(_) => Metric::L1,
    };
    PointSet::new(metric, rows).map_err(|e| format!("{}: {e}", path.display()))
}

/// Write a point set as CSV next to a `<file>.meta.json` sidecar carrying
/// the metric tag.
pub fn write_points(path: &Path, points: &PointSet) -> Result<(), String> {
    let mut out = String::new();
    for i in 0..points.len() {
        let row: Vec<String> = points.point(i).iter().map(|v| format!("{v}")).collect();
        out.push_str(&row.join(","));
        out.push('\n');
    }
    std::fs::write(path, out).map_err(|e| format!("cannot write {}: {e}", path.display()))?;
    let sidecar = Sidecar {
        metric: points.metric(),
    };
    std::fs::write(
        sidecar_path(path),
        serde_json::to_string_pretty(&sidecar).expect("sidecar serializes"),
    )
    .map_err(|e| format!("cannot write sidecar for {}: {e}", path.display()))
}
