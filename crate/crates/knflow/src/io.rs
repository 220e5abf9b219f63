//! File formats: curve CSV with a JSON meta sidecar, report JSON, audit CSV
//! and the run manifest. Every write goes through a temporary file in the
//! target directory followed by a rename.

use std::io::Write;
use std::path::{Path, PathBuf};

use knflow_core::flows::{Curve, CurveMeta};
use knflow_core::Point;
use serde::{Deserialize, Serialize};

use crate::error::{CliError, Result};

/// Writes `bytes` to `path` atomically.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = path
        .parent()
        .filter(|d| !d.as_os_str().is_empty())
        .unwrap_or(Path::new("."));
    std::fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(|e| CliError::io(dir, e))?;
    tmp.write_all(bytes).map_err(|e| CliError::io(path, e))?;
    tmp.as_file()
        .sync_all()
        .map_err(|e| CliError::io(path, e))?;
    tmp.persist(path).map_err(|e| CliError::io(path, e.error))?;
    Ok(())
}

/// Pretty JSON with a trailing newline.
pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value).map_err(|e| CliError::format(path, e))?;
    text.push('\n');
    write_atomic(path, text.as_bytes())
}

/// Sidecar path: `curve.csv` -> `curve.meta.json`.
pub fn meta_path(csv: &Path) -> PathBuf {
    csv.with_extension("meta.json")
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MetaFile {
    pub method: String,
    pub tau: Option<f64>,
    pub functional: String,
    #[serde(rename = "K")]
    pub k: Option<f64>,
    #[serde(rename = "N")]
    pub n: Option<f64>,
    pub stop_time: Option<f64>,
}

fn csv_bytes(header: &[String], rows: impl Iterator<Item = Vec<f64>>) -> Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let fail = |e: csv::Error| CliError::format("<csv>", e);
    w.write_record(header).map_err(fail)?;
    for row in rows {
        // `Display` for f64 is the shortest round-trip representation.
        w.write_record(row.iter().map(|v| v.to_string()))
            .map_err(fail)?;
    }
    w.into_inner().map_err(|e| CliError::format("<csv>", e))
}

/// Writes `path` (`t,x0[,x1,...]`) and its meta sidecar.
pub fn write_curve(path: &Path, c: &Curve) -> Result<Vec<PathBuf>> {
    let mut header = vec!["t".to_string()];
    header.extend((0..c.dim()).map(|k| format!("x{k}")));
    let rows = c.times().iter().zip(c.points()).map(|(t, p)| {
        let mut r = vec![*t];
        r.extend_from_slice(p.coords());
        r
    });
    write_atomic(path, &csv_bytes(&header, rows)?)?;
    let m = c.meta();
    let meta = MetaFile {
        method: m.method.clone(),
        tau: m.tau,
        functional: m.functional.clone(),
        k: m.k,
        n: m.n,
        stop_time: c.stop_time(),
    };
    let mp = meta_path(path);
    write_json(&mp, &meta)?;
    Ok(vec![path.to_path_buf(), mp])
}

/// Reads a curve CSV and, when present, its meta sidecar.
pub fn read_curve(path: &Path) -> Result<Curve> {
    let mut r = csv::Reader::from_path(path).map_err(|e| CliError::format(path, e))?;
    let header = r.headers().map_err(|e| CliError::format(path, e))?.clone();
    if header.get(0) != Some("t") || header.len() < 2 {
        return Err(CliError::format(path, "header must be t,x0[,x1,...]"));
    }
    for (k, h) in header.iter().skip(1).enumerate() {
        if h != format!("x{k}") {
            return Err(CliError::format(path, format!("unexpected column {h}")));
        }
    }
    let mut times = Vec::new();
    let mut points = Vec::new();
    for rec in r.records() {
        let rec = rec.map_err(|e| CliError::format(path, e))?;
        let vals: Vec<f64> = rec
            .iter()
            .map(|s| s.trim().parse::<f64>())
            .collect::<std::result::Result<_, _>>()
            .map_err(|e| CliError::format(path, e))?;
        if vals.len() != header.len() {
            return Err(CliError::format(path, "ragged row"));
        }
        times.push(vals[0]);
        points.push(Point(vals[1..].to_vec()));
    }
    let mut c = Curve::new(times, points).map_err(|e| CliError::format(path, e))?;
    let mp = meta_path(path);
    if mp.exists() {
        let text = std::fs::read_to_string(&mp).map_err(|e| CliError::io(&mp, e))?;
        let m: MetaFile = serde_json::from_str(&text).map_err(|e| CliError::format(&mp, e))?;
        c = c.with_stop_time(m.stop_time).with_meta(CurveMeta {
            method: m.method,
            tau: m.tau,
            functional: m.functional,
            k: m.k,
            n: m.n,
        });
    }
    Ok(c)
}

/// Writes a numeric table with the given header.
pub fn write_table(
    path: &Path,
    header: &[&str],
    rows: impl Iterator<Item = Vec<f64>>,
) -> Result<()> {
    let header: Vec<String> = header.iter().map(|s| s.to_string()).collect();
    write_atomic(path, &csv_bytes(&header, rows)?)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckRecord {
    pub stage: usize,
    pub command: String,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub version: String,
    pub config_sha256: String,
    pub outputs: Vec<String>,
    pub checks: Vec<CheckRecord>,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    use sha2::{Digest, Sha256};
    hex::encode(Sha256::digest(bytes))
}
