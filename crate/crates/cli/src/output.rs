//! Long-format CSV + JSON emission with order normalization, and the run
//! manifest.

use anyhow::{Context, Result};
use serde::Serialize;
use std::path::{Path, PathBuf};

/// One observable row of a sweep: grid coordinates plus a named value.
#[derive(Debug, Clone, Serialize)]
pub struct Row {
    pub point: usize,
    pub coords: Vec<(String, f64)>,
    pub observable: String,
    pub value: f64,
    pub converged: bool,
}

/// Write rows sorted by (point, observable) so parallel execution order
/// never leaks into the output.
pub fn write_rows(dir: &Path, stem: &str, mut rows: Vec<Row>) -> Result<Vec<PathBuf>> {
    rows.sort_by(|a, b| (a.point, &a.observable).cmp(&(b.point, &b.observable)));
    std::fs::create_dir_all(dir)?;
    let csv_path = dir.join(format!("{stem}.csv"));
    let mut wtr = csv::Writer::from_path(&csv_path)
        .with_context(|| format!("creating {}", csv_path.display()))?;
    let coord_names: Vec<String> = rows
        .first()
        .map(|r| r.coords.iter().map(|(n, _)| n.clone()).collect())
        .unwrap_or_default();
    let mut header = vec!["point".to_string()];
    header.extend(coord_names.iter().cloned());
    header.extend(["observable".to_string(), "value".to_string(), "converged".to_string()]);
    wtr.write_record(&header)?;
    for r in &rows {
        let mut rec = vec![r.point.to_string()];
        rec.extend(r.coords.iter().map(|(_, v)| format!("{v:.12e}")));
        rec.push(r.observable.clone());
        rec.push(format!("{:.12e}", r.value));
        rec.push(r.converged.to_string());
        wtr.write_record(&rec)?;
    }
    wtr.flush()?;

    let json_path = dir.join(format!("{stem}.json"));
    let json = serde_json::to_string_pretty(&rows)?;
    std::fs::write(&json_path, json)?;
    Ok(vec![csv_path, json_path])
}

#[derive(Debug, Serialize)]
pub struct Manifest<'a, C: Serialize> {
    pub command: &'a str,
    pub version: &'a str,
    pub seed: u64,
    pub workers: usize,
    pub strict: bool,
    pub started_unix_s: u64,
    pub wall_time_s: f64,
    pub outputs: Vec<String>,
    /// Fully resolved configuration, defaults applied.
    pub config: &'a C,
}

pub fn write_manifest<C: Serialize>(dir: &Path, manifest: &Manifest<C>) -> Result<PathBuf> {
    std::fs::create_dir_all(dir)?;
    let path = dir.join("manifest.json");
    std::fs::write(&path, serde_json::to_string_pretty(manifest)?)?;
    Ok(path)
}
